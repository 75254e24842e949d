#include "dialectid/loss.hpp"

#include <cmath>

#include "dialectid/error.hpp"

namespace dialectid {

template <typename Real>
Matrix<Real> softmax_rows(const Matrix<Real>& logits) {
  Matrix<Real> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Real mx = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - mx).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

template <typename Real>
Real softmax_cross_entropy(const Matrix<Real>& logits, std::span<const std::int32_t> targets,
                           Matrix<Real>* grad) {
  if (static_cast<std::size_t>(logits.rows()) != targets.size())
    throw ConfigError("cross-entropy: logits rows and targets differ");
  if (targets.empty()) throw ConfigError("cross-entropy: empty selection");
  const auto n = static_cast<Real>(targets.size());
  if (grad) grad->resize(logits.rows(), logits.cols());
  Real total = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const std::int32_t t = targets[static_cast<std::size_t>(r)];
    if (t < 0 || t >= logits.cols()) throw ConfigError("cross-entropy: target out of range");
    const Real mx = logits.row(r).maxCoeff();
    const auto shifted = (logits.row(r).array() - mx).eval();
    const Real log_z = std::log(shifted.exp().sum());
    total += log_z - shifted(t);
    if (grad) {
      grad->row(r) = ((shifted - log_z).exp() / n).matrix();
      (*grad)(r, t) -= Real(1) / n;
    }
  }
  return total / n;
}

template Matrix<float> softmax_rows<float>(const Matrix<float>&);
template Matrix<double> softmax_rows<double>(const Matrix<double>&);
template float softmax_cross_entropy<float>(const Matrix<float>&, std::span<const std::int32_t>,
                                            Matrix<float>*);
template double softmax_cross_entropy<double>(const Matrix<double>&,
                                              std::span<const std::int32_t>, Matrix<double>*);

}  // namespace dialectid
