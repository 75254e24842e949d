#pragma once

#include <cstdint>
#include <span>

#include "dialectid/encoder.hpp"

namespace dialectid {

// Row-wise softmax, numerically stabilised.
template <typename Real>
Matrix<Real> softmax_rows(const Matrix<Real>& logits);

// Mean cross-entropy of logits rows against integer targets. When grad is
// non-null it receives dLoss/dLogits.
template <typename Real>
Real softmax_cross_entropy(const Matrix<Real>& logits, std::span<const std::int32_t> targets,
                           Matrix<Real>* grad = nullptr);

}  // namespace dialectid
