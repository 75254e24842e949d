#pragma once

#include <cstddef>
#include <vector>

#include "dialectid/encoder.hpp"

namespace dialectid {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Linear warmup over the first `warmup` steps, then linear decay to zero
// at `total`.
struct LinearSchedule {
  double peak = 0.0;
  std::size_t total = 0;
  std::size_t warmup = 0;

  static LinearSchedule make(double peak, std::size_t total, double warmup_fraction);
  double at(std::size_t step) const;
};

template <typename Real>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // params[i] -= lr * m̂/(√v̂ + ε) using grads[i]; the tensor list must keep
  // the same shapes and order across calls.
  void step(const std::vector<Matrix<Real>*>& params,
            const std::vector<const Matrix<Real>*>& grads, double lr);

  std::size_t steps_taken() const { return t_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<Matrix<Real>> m_, v_;
};

template <typename Real>
std::vector<Matrix<Real>*> tensors_of(EncoderParams<Real>& p) {
  std::vector<Matrix<Real>*> out;
  p.for_each([&](std::string_view, Matrix<Real>& m) { out.push_back(&m); });
  return out;
}

template <typename Real>
std::vector<const Matrix<Real>*> tensors_of(const EncoderParams<Real>& p) {
  std::vector<const Matrix<Real>*> out;
  p.for_each([&](std::string_view, const Matrix<Real>& m) { out.push_back(&m); });
  return out;
}

}  // namespace dialectid
