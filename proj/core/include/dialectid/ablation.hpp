#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dialectid/config.hpp"
#include "dialectid/corpus.hpp"
#include "dialectid/eval.hpp"

namespace dialectid {

struct AblationRow {
  std::string name;
  MetricsReport report;
};

// Row order: baseline, +cleaning, +upsampling, +MLM pretraining, hybrid.
struct AblationResult {
  std::vector<AblationRow> rows;

  // `row<TAB>macro_f1<TAB>accuracy`, four decimals, one line per row.
  std::string summary_tsv() const;
  std::string summary_text() const;
};

const std::vector<std::string>& ablation_row_names();

using ProgressFn = std::function<void(const std::string&)>;

// Trains and scores every configuration on `dev`. Raw inputs; cleaning is
// applied per row. The unlabeled corpus feeds the MLM row only.
AblationResult run_ablation(const Dataset& train, const Dataset& dev,
                            std::span<const std::string> unlabeled, const PipelineConfig& cfg,
                            const ProgressFn& progress = {});

// Predicted labels of a flat 21-way model on prepared texts.
std::vector<DialectLabel> predict_flat_batch(const EncoderParams<float>& encoder,
                                             const HeadParams<float>& head, const Vocab& v,
                                             const EncodingConfig& enc,
                                             std::span<const std::string> prepared);

std::vector<HybridPrediction> predict_hybrid_batch(const HybridModel<float>& hm, const Vocab& v,
                                                   const EncodingConfig& enc,
                                                   std::span<const std::string> prepared);

}  // namespace dialectid
