#pragma once

#include <cstdint>
#include <functional>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dialectid/encoder.hpp"
#include "dialectid/rng.hpp"
#include "dialectid/tokenizer.hpp"

namespace dialectid {

struct MlmConfig {
  double mask_rate = 0.15;
  double replace_mask = 0.8;
  double replace_random = 0.1;
  double keep_original = 0.1;
  double learning_rate = 2e-5;
  std::size_t epochs = 1;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double warmup_fraction = 0.1;

  void validate() const;
};

struct MaskedPosition {
  std::size_t example = 0;
  std::size_t offset = 0;
  friend bool operator==(const MaskedPosition&, const MaskedPosition&) = default;
};

struct MaskedBatch {
  std::vector<Encoding> inputs;
  std::vector<std::int32_t> targets;
  std::vector<MaskedPosition> positions;
};

// Selects each real, non-special position with probability mask_rate and
// replaces it by [MASK], a random non-special id, or leaves it unchanged.
MaskedBatch apply_masking(std::span<const Encoding> batch, const MlmConfig& cfg,
                          std::size_t vocab_size, Rng& rng);

// Mean cross-entropy over the selected positions.
template <typename Real>
Real mlm_loss(const Matrix<Real>& logits, std::span<const std::int32_t> targets);

struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

using StepCallback = std::function<void(const StepRecord&)>;

// Appends `step<TAB>loss<TAB>lr` lines.
void append_training_log(const std::filesystem::path& path, std::span<const StepRecord> records);
std::string format_step(const StepRecord& r);

// Masked-LM pretraining with output projection tied to the token
// embeddings, Adam and a warmup/decay schedule. Batches are shuffled per
// epoch and each runs for ceil(|corpus|/batch_size) steps.
template <typename Real>
EncoderParams<Real> pretrain(const EncoderParams<Real>& params, std::span<const std::string> corpus,
                             const Vocab& v, const MlmConfig& cfg,
                             const StepCallback& on_step = {});

}  // namespace dialectid
