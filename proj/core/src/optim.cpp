#include "dialectid/optim.hpp"

#include <algorithm>
#include <cmath>

#include "dialectid/error.hpp"

namespace dialectid {

LinearSchedule LinearSchedule::make(double peak, std::size_t total, double warmup_fraction) {
  LinearSchedule s;
  s.peak = peak;
  s.total = total;
  s.warmup = static_cast<std::size_t>(std::floor(warmup_fraction * static_cast<double>(total)));
  return s;
}

double LinearSchedule::at(std::size_t step) const {
  if (step < warmup) return peak * static_cast<double>(step + 1) / static_cast<double>(warmup);
  if (step >= total) return 0.0;
  return peak * static_cast<double>(total - step) / static_cast<double>(total - warmup);
}

template <typename Real>
void Adam<Real>::step(const std::vector<Matrix<Real>*>& params,
                      const std::vector<const Matrix<Real>*>& grads, double lr) {
  if (params.size() != grads.size()) throw ConfigError("adam: params/grads count mismatch");
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.push_back(Matrix<Real>::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix<Real>::Zero(p->rows(), p->cols()));
    }
  }
  if (m_.size() != params.size()) throw ConfigError("adam: tensor list changed between steps");
  ++t_;
  const Real b1 = static_cast<Real>(cfg_.beta1), b2 = static_cast<Real>(cfg_.beta2);
  const Real c1 = static_cast<Real>(1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
  const Real c2 = static_cast<Real>(1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
  const Real step_size = static_cast<Real>(lr);
  const Real eps = static_cast<Real>(cfg_.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = *grads[i];
    auto& m = m_[i];
    auto& v = v_[i];
    m = b1 * m + (Real(1) - b1) * g;
    v = b2 * v + (Real(1) - b2) * g.cwiseProduct(g);
    if (step_size == Real(0)) continue;
    params[i]->array() -=
        step_size * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace dialectid
