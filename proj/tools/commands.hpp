#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dialectid/config.hpp"

namespace dialectid::cli {

// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  // defaults < config file < --seed < --set.
  PipelineConfig resolve() const;
};

struct NormalizeArgs {
  std::string input, output;
};
struct BuildVocabArgs {
  std::vector<std::string> inputs;
  std::string output;
  std::optional<std::size_t> vocab_size;
};
struct PretrainArgs {
  std::string corpus, vocab, output, init, log;
};
struct FinetuneArgs {
  std::string train, vocab, output, encoder, mode = "flat", log;
  bool upsample = false;
};
struct TrainNbArgs {
  std::string train, output;
  std::vector<std::string> classes;
  bool upsample = false;
};
struct PredictArgs {
  std::string model, input, output;
};
struct EvaluateArgs {
  std::string gold, predictions, output, format = "text";
  // "all" scores over the 21 labels; "observed" over labels seen in gold or predictions.
  std::string labels = "all";
};
struct SynthArgs {
  std::string train_out, dev_out, unlabeled_out;
};
struct UpsampleArgs {
  std::string input, output;
  std::optional<std::size_t> target;
};
struct AblateArgs {
  std::string train, dev, unlabeled, report_dir;
  bool synthetic = false;
};

int cmd_normalize(const Common&, const NormalizeArgs&);
int cmd_build_vocab(const Common&, const BuildVocabArgs&);
int cmd_pretrain(const Common&, const PretrainArgs&);
int cmd_finetune(const Common&, const FinetuneArgs&);
int cmd_train_nb(const Common&, const TrainNbArgs&);
int cmd_predict(const Common&, const PredictArgs&);
int cmd_evaluate(const Common&, const EvaluateArgs&);
int cmd_synth(const Common&, const SynthArgs&);
int cmd_upsample(const Common&, const UpsampleArgs&);
int cmd_ablate(const Common&, const AblateArgs&);

}  // namespace dialectid::cli
