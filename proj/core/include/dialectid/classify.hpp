#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dialectid/corpus.hpp"
#include "dialectid/encoder.hpp"
#include "dialectid/mlm.hpp"
#include "dialectid/naive_bayes.hpp"
#include "dialectid/normalize.hpp"
#include "dialectid/tokenizer.hpp"

namespace dialectid {

template <typename Real>
struct HeadParams {
  Matrix<Real> weight;  // hidden_dim × num_outputs
  Matrix<Real> bias;    // 1 × num_outputs

  static HeadParams init(int hidden_dim, int num_outputs, std::uint64_t seed);
  int num_outputs() const { return static_cast<int>(weight.cols()); }
  int hidden_dim() const { return static_cast<int>(weight.rows()); }
  template <typename Other>
  HeadParams<Other> cast() const {
    return {weight.template cast<Other>(), bias.template cast<Other>()};
  }
};

// pooled · W + b, one row per example.
template <typename Real>
Matrix<Real> head_forward(const Matrix<Real>& pooled, const HeadParams<Real>& head);

// 15 majority labels handled by the encoder head directly; the 6 minority
// labels share one super-class at index 15 and are resolved by Naive Bayes.
struct GroupingScheme {
  std::vector<DialectLabel> majority;
  std::vector<DialectLabel> minority;
  std::size_t super_class_index = 15;

  static GroupingScheme standard();
  // Throws ConfigError unless majority/minority partition all 21 labels.
  void validate() const;

  std::size_t num_outputs() const { return majority.size() + 1; }
  bool is_minority(DialectLabel label) const;
  // Target index in the grouped label space.
  std::int32_t grouped_index(DialectLabel label) const;

  std::string serialize() const;
  static GroupingScheme deserialize(const std::string& content);
};

enum class LabelSpace { flat21, grouped16 };

struct FinetuneConfig {
  double learning_rate = 2e-5;
  std::size_t epochs = 3;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double warmup_fraction = 0.1;

  void validate() const;
};

// Target ids for each example under the chosen label space.
std::vector<std::int32_t> class_targets(const Dataset& ds, LabelSpace space,
                                        const GroupingScheme& grouping);

// End-to-end softmax cross-entropy training of encoder and head.
// Dataset texts are used as given (already normalised or deliberately raw).
template <typename Real>
std::pair<EncoderParams<Real>, HeadParams<Real>> finetune(
    const EncoderParams<Real>& encoder, const HeadParams<Real>& head, const Dataset& ds,
    const Vocab& v, const FinetuneConfig& cfg, LabelSpace space,
    const GroupingScheme& grouping = GroupingScheme::standard(), const StepCallback& on_step = {});

// How raw text becomes model input.
struct TextPipeline {
  NormalizeConfig normalize = NormalizeConfig{};
  AffixLexicon lexicon = AffixLexicon::defaults();
  EncodingConfig encoding = EncodingConfig{};

  std::string prepare(std::string_view raw) const;
};

// Head logits for already-prepared texts, batched internally.
template <typename Real>
Matrix<Real> predict_logits(const EncoderParams<Real>& encoder, const HeadParams<Real>& head,
                            const Vocab& v, const EncodingConfig& enc,
                            std::span<const std::string> prepared, std::size_t batch_size = 64);

struct FlatPrediction {
  DialectLabel label{};
  std::array<double, kNumLabels> probabilities{};
};

FlatPrediction flat_from_logits(std::span<const double> logits);

template <typename Real>
FlatPrediction predict_flat(const EncoderParams<Real>& encoder, const HeadParams<Real>& head,
                            const Vocab& v, const TextPipeline& pipeline, std::string_view raw);

template <typename Real>
struct HybridModel {
  EncoderParams<Real> encoder;
  HeadParams<Real> head;  // grouping.num_outputs() outputs
  GroupingScheme grouping = GroupingScheme::standard();
  NbModel nb;

  void validate() const;
};

enum class Route { direct, nb };

std::string_view route_name(Route r);

struct HybridPrediction {
  DialectLabel label{};
  Route route = Route::direct;
};

// Routing step on a grouped argmax: majority index → label; super-class →
// Naive Bayes over the normalised text.
HybridPrediction route_hybrid(std::size_t grouped_argmax, const GroupingScheme& grouping,
                              const NbModel& nb, std::string_view prepared);

template <typename Real>
HybridPrediction predict_hybrid(const HybridModel<Real>& hm, const Vocab& v,
                                const TextPipeline& pipeline, std::string_view raw);

// "DLHD", version byte, int32 rows, int32 cols, weight then bias as float32.
void save_head(const std::filesystem::path& path, const HeadParams<float>& head);
HeadParams<float> load_head(const std::filesystem::path& path);

// Manifest `DLHYBRID1` with `encoder`, `head`, `grouping` and `nb` entries
// naming sibling files in `dir`.
void save_hybrid(const std::filesystem::path& dir, const HybridModel<float>& hm);
HybridModel<float> load_hybrid(const std::filesystem::path& dir);

}  // namespace dialectid
