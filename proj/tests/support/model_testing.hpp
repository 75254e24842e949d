#pragma once

// Helpers shared by the encoder unit tests and the acceptance suite: batch
// construction, parameter jitter, and a central-difference gradient check of
// a combined classification + tied masked-LM loss.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dialectid/classify.hpp"
#include "dialectid/encoder.hpp"
#include "dialectid/loss.hpp"
#include "dialectid/rng.hpp"

namespace dialectid::testing {

inline Encoding make_encoding(const std::vector<std::int32_t>& real_ids, std::size_t length) {
  Encoding e;
  e.ids.assign(length, kPadId);
  e.mask.assign(length, 0);
  for (std::size_t i = 0; i < real_ids.size() && i < length; ++i) {
    e.ids[i] = real_ids[i];
    e.mask[i] = 1;
  }
  e.num_real = std::min(real_ids.size(), length);
  return e;
}

// Random batch: [CLS] w1..wk [SEP] with k in [1, max_real-2], padded to length.
inline std::vector<Encoding> random_batch(Rng& rng, std::size_t batch, std::size_t length,
                                          std::size_t max_real, int vocab_size) {
  std::vector<Encoding> out;
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t k = 1 + rng.below(std::max<std::size_t>(1, max_real - 2));
    std::vector<std::int32_t> ids = {kClsId};
    for (std::size_t i = 0; i < k; ++i)
      ids.push_back(kNumSpecial + static_cast<std::int32_t>(rng.below(vocab_size - kNumSpecial)));
    ids.push_back(kSepId);
    out.push_back(make_encoding(ids, length));
  }
  return out;
}

template <typename Real>
void jitter(Matrix<Real>& m, Rng& rng, double sd) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += static_cast<Real>(sd * rng.normal());
}

struct GradProblem {
  std::vector<Encoding> batch;
  std::vector<std::int32_t> class_targets;
  std::vector<std::size_t> mlm_rows;  // rows of the hidden matrix
  std::vector<std::int32_t> mlm_targets;
};

struct GradState {
  EncoderParams<double> encoder;
  HeadParams<double> head;
};

// Head cross-entropy on pooled output plus masked-LM cross-entropy with
// logits = hidden · Eᵀ at the chosen rows.
inline double combined_loss(const GradState& s, const GradProblem& pb, GradState* grads) {
  const bool want = grads != nullptr;
  const auto fwd = forward(s.encoder, pb.batch, want);
  const Matrix<double> logits = head_forward(fwd.pooled, s.head);
  Matrix<double> g_cls;
  double loss = softmax_cross_entropy<double>(logits, pb.class_targets, want ? &g_cls : nullptr);

  Matrix<double> rows(static_cast<Eigen::Index>(pb.mlm_rows.size()), fwd.hidden.cols());
  for (std::size_t i = 0; i < pb.mlm_rows.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)) = fwd.hidden.row(static_cast<Eigen::Index>(pb.mlm_rows[i]));
  const Matrix<double> mlm_logits = rows * s.encoder.token_embeddings.transpose();
  Matrix<double> g_mlm;
  loss += softmax_cross_entropy<double>(mlm_logits, pb.mlm_targets, want ? &g_mlm : nullptr);
  if (!want) return loss;

  Matrix<double> grad_pooled = g_cls * s.head.weight.transpose();
  Matrix<double> grad_hidden = pooled_to_hidden_grad(grad_pooled, fwd.seq_len);
  const Matrix<double> grad_rows = g_mlm * s.encoder.token_embeddings;
  for (std::size_t i = 0; i < pb.mlm_rows.size(); ++i)
    grad_hidden.row(static_cast<Eigen::Index>(pb.mlm_rows[i])) += grad_rows.row(static_cast<Eigen::Index>(i));
  grads->encoder = backward(s.encoder, *fwd.trace, grad_hidden);
  grads->encoder.token_embeddings += g_mlm.transpose() * rows;
  grads->head.weight = fwd.pooled.transpose() * g_cls;
  grads->head.bias = g_cls.colwise().sum();
  return loss;
}

struct GradCheckResult {
  std::size_t checked = 0;
  std::size_t failed = 0;
  std::size_t tensor_kinds = 0;
  std::size_t below_floor = 0;
  double worst_relative = 0.0;
  std::string worst_name;
};

// Central differences with step h on `per_tensor` random coordinates of every
// tensor. Relative error |a−n| / max(|a|, |n|); pairs whose absolute
// difference is below abs_floor (rounding noise of the difference quotient,
// e.g. key biases, whose true gradient is zero because softmax ignores a
// per-query shift) are counted as agreeing.
inline GradCheckResult gradient_check(GradState& s, const GradProblem& pb, std::size_t per_tensor,
                                      double h, double tolerance, std::uint64_t seed,
                                      double abs_floor = 1e-9) {
  GradState g;
  combined_loss(s, pb, &g);
  Rng rng(seed);
  GradCheckResult res;

  std::vector<std::int32_t> used_ids;
  for (const auto& e : pb.batch)
    for (auto id : e.ids) used_ids.push_back(id);
  std::size_t longest_real = 1;
  for (const auto& e : pb.batch) longest_real = std::max(longest_real, e.num_real);

  auto check = [&](const std::string& name, Matrix<double>& param, const Matrix<double>& grad) {
    ++res.tensor_kinds;
    for (std::size_t k = 0; k < per_tensor; ++k) {
      Eigen::Index r = static_cast<Eigen::Index>(rng.below(param.rows()));
      const Eigen::Index c = static_cast<Eigen::Index>(rng.below(param.cols()));
      // Embedding rows outside the batch have identically zero gradient;
      // sample rows that the loss actually touches.
      if (name == "token_embeddings" && k % 2 == 0) r = used_ids[rng.below(used_ids.size())];
      if (name == "position_embeddings") r = static_cast<Eigen::Index>(rng.below(longest_real));
      const double saved = param(r, c);
      param(r, c) = saved + h;
      const double up = combined_loss(s, pb, nullptr);
      param(r, c) = saved - h;
      const double down = combined_loss(s, pb, nullptr);
      param(r, c) = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grad(r, c);
      const double diff = std::abs(analytic - numeric);
      const double scale = std::max(std::abs(analytic), std::abs(numeric));
      const double rel = scale > 0 ? diff / scale : 0.0;
      ++res.checked;
      if (diff < abs_floor && rel >= tolerance) ++res.below_floor;
      if (diff >= abs_floor && rel >= tolerance) ++res.failed;
      if (diff >= abs_floor && rel > res.worst_relative) {
        res.worst_relative = rel;
        res.worst_name = name;
      }
    }
  };

  std::vector<std::pair<std::string, Matrix<double>*>> params;
  std::vector<const Matrix<double>*> grads;
  s.encoder.for_each([&](std::string_view n, Matrix<double>& m) { params.emplace_back(std::string(n), &m); });
  g.encoder.for_each([&](std::string_view, const Matrix<double>& m) { grads.push_back(&m); });
  for (std::size_t i = 0; i < params.size(); ++i) check(params[i].first, *params[i].second, *grads[i]);
  check("head.weight", s.head.weight, g.head.weight);
  check("head.bias", s.head.bias, g.head.bias);
  return res;
}

// Desk-shaped problem with parameters moved well away from initialisation
// so that layer norm gains/biases and attention are all non-trivial.
inline GradState make_grad_state(const EncoderConfig& cfg, int outputs, std::uint64_t seed, double sd) {
  GradState s{init_params<double>(cfg, seed), HeadParams<float>::init(cfg.hidden_dim, outputs, seed + 1).cast<double>()};
  Rng rng(derive_seed(seed, 77));
  s.encoder.for_each([&](std::string_view, Matrix<double>& m) { jitter(m, rng, sd); });
  jitter(s.head.weight, rng, sd);
  jitter(s.head.bias, rng, sd);
  return s;
}

inline GradProblem make_grad_problem(const EncoderConfig& cfg, int outputs, std::size_t batch,
                                     std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  GradProblem pb;
  pb.batch = random_batch(rng, batch, length, length, cfg.vocab_size);
  for (std::size_t b = 0; b < batch; ++b)
    pb.class_targets.push_back(static_cast<std::int32_t>(rng.below(outputs)));
  for (std::size_t b = 0; b < batch; ++b) {
    const auto& e = pb.batch[b];
    for (std::size_t i = 1; i + 1 < e.num_real; ++i) {
      if (rng.bernoulli(0.5)) {
        pb.mlm_rows.push_back(b * length + i);
        pb.mlm_targets.push_back(e.ids[i]);
      }
    }
  }
  if (pb.mlm_rows.empty()) {
    pb.mlm_rows.push_back(1);
    pb.mlm_targets.push_back(pb.batch[0].ids[1]);
  }
  return pb;
}

}  // namespace dialectid::testing
