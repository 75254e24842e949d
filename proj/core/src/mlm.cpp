#include "dialectid/mlm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dialectid/error.hpp"
#include "dialectid/loss.hpp"
#include "dialectid/optim.hpp"

namespace dialectid {

void MlmConfig::validate() const {
  if (!(mask_rate >= 0.0 && mask_rate <= 1.0)) throw ConfigError("mlm.mask_rate must be in [0,1]");
  for (double f : {replace_mask, replace_random, keep_original}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("mlm replacement fractions must be in [0,1]");
  }
  if (std::abs(replace_mask + replace_random + keep_original - 1.0) > 1e-9)
    throw ConfigError("mlm replacement fractions must sum to 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("mlm.learning_rate must be non-negative");
  if (epochs < 1 || batch_size < 1) throw ConfigError("mlm epochs and batch_size must be positive");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0))
    throw ConfigError("mlm.warmup_fraction must be in [0,1]");
}

MaskedBatch apply_masking(std::span<const Encoding> batch, const MlmConfig& cfg,
                          std::size_t vocab_size, Rng& rng) {
  cfg.validate();
  MaskedBatch out;
  out.inputs.assign(batch.begin(), batch.end());
  const std::size_t num_regular =
      vocab_size > static_cast<std::size_t>(kNumSpecial) ? vocab_size - kNumSpecial : 0;
  for (std::size_t b = 0; b < out.inputs.size(); ++b) {
    auto& enc = out.inputs[b];
    for (std::size_t t = 0; t < enc.ids.size(); ++t) {
      if (!enc.mask[t] || is_special_id(enc.ids[t])) continue;
      if (!rng.bernoulli(cfg.mask_rate)) continue;
      out.positions.push_back({b, t});
      out.targets.push_back(enc.ids[t]);
      const double u = rng.uniform();
      if (u < cfg.replace_mask) {
        enc.ids[t] = kMaskId;
      } else if (u < cfg.replace_mask + cfg.replace_random && num_regular > 0) {
        enc.ids[t] = kNumSpecial + static_cast<std::int32_t>(rng.below(num_regular));
      }
    }
  }
  return out;
}

template <typename Real>
Real mlm_loss(const Matrix<Real>& logits, std::span<const std::int32_t> targets) {
  if (targets.empty()) throw ConfigError("mlm_loss: no selected positions");
  return softmax_cross_entropy<Real>(logits, targets);
}

std::string format_step(const StepRecord& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.6g", r.step, r.loss, r.lr);
  return buf;
}

void append_training_log(const std::filesystem::path& path, std::span<const StepRecord> records) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot open training log: " + path.string());
  for (const auto& r : records) out << format_step(r) << '\n';
  if (!out) throw DataError("error writing training log: " + path.string());
}

template <typename Real>
EncoderParams<Real> pretrain(const EncoderParams<Real>& params, std::span<const std::string> corpus,
                             const Vocab& v, const MlmConfig& cfg, const StepCallback& on_step) {
  cfg.validate();
  if (corpus.empty()) throw ConfigError("pretrain: empty corpus");
  if (static_cast<std::size_t>(params.config.vocab_size) != v.size())
    throw ConfigError("pretrain: encoder vocab_size does not match vocabulary");

  const EncodingConfig enc_cfg{static_cast<std::size_t>(params.config.max_len), true};
  std::vector<Encoding> encoded;
  encoded.reserve(corpus.size());
  for (const auto& line : corpus) encoded.push_back(encode(line, v, enc_cfg));

  EncoderParams<Real> p = params;
  Adam<Real> adam;
  const std::size_t steps_per_epoch = (encoded.size() + cfg.batch_size - 1) / cfg.batch_size;
  const auto schedule =
      LinearSchedule::make(cfg.learning_rate, steps_per_epoch * cfg.epochs, cfg.warmup_fraction);
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(encoded.size());
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++step) {
      std::vector<Encoding> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i)
        batch.push_back(encoded[order[i]]);
      batch = trim_padding(batch);
      MaskedBatch mb = apply_masking(batch, cfg, v.size(), rng);
      const double lr = schedule.at(step);
      if (mb.positions.empty()) {
        // No eligible position in the batch: nothing to learn from.
        if (on_step) on_step({step, std::numeric_limits<double>::quiet_NaN(), lr});
        continue;
      }

      auto fwd = forward(p, mb.inputs, true);
      const auto n = static_cast<Eigen::Index>(mb.positions.size());
      const Eigen::Index d = p.config.hidden_dim;
      Matrix<Real> selected(n, d);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& pos = mb.positions[static_cast<std::size_t>(i)];
        selected.row(i) = fwd.hidden.row(static_cast<Eigen::Index>(pos.example * fwd.seq_len + pos.offset));
      }
      const Matrix<Real> logits = selected * p.token_embeddings.transpose();
      Matrix<Real> d_logits;
      const Real loss = softmax_cross_entropy<Real>(logits, mb.targets, &d_logits);
      if (!std::isfinite(static_cast<double>(loss)))
        throw NumericError("pretrain: non-finite loss at step " + std::to_string(step));

      Matrix<Real> grad_hidden = Matrix<Real>::Zero(fwd.hidden.rows(), d);
      const Matrix<Real> d_selected = d_logits * p.token_embeddings;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& pos = mb.positions[static_cast<std::size_t>(i)];
        grad_hidden.row(static_cast<Eigen::Index>(pos.example * fwd.seq_len + pos.offset)) +=
            d_selected.row(i);
      }
      EncoderParams<Real> grads = backward(p, *fwd.trace, grad_hidden);
      grads.token_embeddings.noalias() += d_logits.transpose() * selected;

      adam.step(tensors_of(p), tensors_of(static_cast<const EncoderParams<Real>&>(grads)), lr);
      if (on_step) on_step({step, static_cast<double>(loss), lr});
    }
  }
  return p;
}

template float mlm_loss<float>(const Matrix<float>&, std::span<const std::int32_t>);
template double mlm_loss<double>(const Matrix<double>&, std::span<const std::int32_t>);
template EncoderParams<float> pretrain<float>(const EncoderParams<float>&,
                                              std::span<const std::string>, const Vocab&,
                                              const MlmConfig&, const StepCallback&);
template EncoderParams<double> pretrain<double>(const EncoderParams<double>&,
                                                std::span<const std::string>, const Vocab&,
                                                const MlmConfig&, const StepCallback&);

}  // namespace dialectid
