// dialectid: command-line front end for the dialect identification pipeline.

#include <cstdio>
#include <functional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "dialectid/error.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kNumeric = 4 };

void add_common(CLI::App* sub, dialectid::cli::Common& c) {
  sub->add_option("-c,--config", c.config_path, "Pipeline config file");
  sub->add_option("--set", c.overrides, "Override a config key (key=value), repeatable");
  sub->add_option("--seed", c.seed, "Master seed for every stochastic component");
  sub->add_flag("-q,--quiet", c.quiet, "Suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace dialectid::cli;

  CLI::App app{"Arabic dialect identification toolkit"};
  app.require_subcommand(1);
  Common common;
  std::function<int()> run;

  NormalizeArgs norm;
  auto* s = app.add_subcommand("normalize", "Clean a TSV or plain-text corpus");
  add_common(s, common);
  s->add_option("-i,--input", norm.input, "Input .tsv or text file")->required();
  s->add_option("-o,--output", norm.output, "Output file")->required();
  s->callback([&] { run = [&] { return cmd_normalize(common, norm); }; });

  BuildVocabArgs bv;
  s = app.add_subcommand("build-vocab", "Train a BPE vocabulary");
  add_common(s, common);
  s->add_option("-i,--input", bv.inputs, "Corpus files (.tsv or text), repeatable")->required();
  s->add_option("-o,--output", bv.output, "Vocabulary file")->required();
  s->add_option("--vocab-size", bv.vocab_size, "Target vocabulary size");
  s->callback([&] { run = [&] { return cmd_build_vocab(common, bv); }; });

  PretrainArgs pt;
  s = app.add_subcommand("pretrain", "Masked-LM pretraining on unlabeled text");
  add_common(s, common);
  s->add_option("--corpus", pt.corpus, "Unlabeled text, one example per line");
  s->add_option("--vocab", pt.vocab, "Vocabulary file")->required();
  s->add_option("--init", pt.init, "Start from this encoder instead of a fresh one");
  s->add_option("-o,--output", pt.output, "Output encoder file")->required();
  s->add_option("--log", pt.log, "Append step<TAB>loss<TAB>lr lines here");
  s->callback([&] { run = [&] { return cmd_pretrain(common, pt); }; });

  FinetuneArgs ft;
  s = app.add_subcommand("finetune", "Train a flat or hybrid classifier");
  add_common(s, common);
  s->add_option("--train", ft.train, "Labeled training TSV");
  s->add_option("--vocab", ft.vocab, "Vocabulary file")->required();
  s->add_option("--encoder", ft.encoder, "Pretrained encoder to start from");
  s->add_option("--mode", ft.mode, "flat or hybrid")->check(CLI::IsMember({"flat", "hybrid"}));
  s->add_flag("--upsample", ft.upsample, "Upsample minority classes before training");
  s->add_option("-o,--output", ft.output, "Model directory")->required();
  s->add_option("--log", ft.log, "Append step<TAB>loss<TAB>lr lines here");
  s->callback([&] { run = [&] { return cmd_finetune(common, ft); }; });

  TrainNbArgs nb;
  s = app.add_subcommand("train-nb", "Train a multinomial Naive Bayes model");
  add_common(s, common);
  s->add_option("--train", nb.train, "Labeled training TSV");
  s->add_option("--classes", nb.classes, "Labels to model (default: the six minority labels)");
  s->add_flag("--upsample", nb.upsample, "Upsample before training");
  s->add_option("-o,--output", nb.output, "Model file")->required();
  s->callback([&] { run = [&] { return cmd_train_nb(common, nb); }; });

  PredictArgs pr;
  s = app.add_subcommand("predict", "Label each input line; prints label<TAB>route");
  add_common(s, common);
  s->add_option("-m,--model", pr.model, "Model directory")->required();
  s->add_option("-i,--input", pr.input, "Text file, one example per line")->required();
  s->add_option("-o,--output", pr.output, "Output file (default stdout)");
  s->callback([&] { run = [&] { return cmd_predict(common, pr); }; });

  EvaluateArgs ev;
  s = app.add_subcommand("evaluate", "Score predictions against a gold TSV");
  add_common(s, common);
  s->add_option("--gold", ev.gold, "Gold TSV")->required();
  s->add_option("--predictions", ev.predictions, "Predictions, first field the label")->required();
  s->add_option("--format", ev.format, "text or tsv")->check(CLI::IsMember({"text", "tsv"}));
  s->add_option("--labels", ev.labels, "all (21 labels) or observed")
      ->check(CLI::IsMember({"all", "observed"}));
  s->add_option("-o,--output", ev.output, "Report file (default stdout)");
  s->callback([&] { run = [&] { return cmd_evaluate(common, ev); }; });

  SynthArgs sy;
  s = app.add_subcommand("synth", "Generate synthetic train/dev/unlabeled corpora");
  add_common(s, common);
  s->add_option("--train-out", sy.train_out, "Training TSV");
  s->add_option("--dev-out", sy.dev_out, "Dev TSV");
  s->add_option("--unlabeled-out", sy.unlabeled_out, "Unlabeled text");
  s->callback([&] { run = [&] { return cmd_synth(common, sy); }; });

  UpsampleArgs up;
  s = app.add_subcommand("upsample", "Pad small classes to a target count");
  add_common(s, common);
  s->add_option("-i,--input", up.input, "Input TSV")->required();
  s->add_option("-o,--output", up.output, "Output TSV")->required();
  s->add_option("--target", up.target, "Target count per class");
  s->callback([&] { run = [&] { return cmd_upsample(common, up); }; });

  AblateArgs ab;
  s = app.add_subcommand("ablate", "Train and score the five ablation configurations");
  add_common(s, common);
  s->add_option("--train", ab.train, "Training TSV");
  s->add_option("--dev", ab.dev, "Dev TSV");
  s->add_option("--unlabeled", ab.unlabeled, "Unlabeled text for MLM pretraining");
  s->add_flag("--synthetic", ab.synthetic, "Generate all three corpora from the synth.* keys");
  s->add_option("--report-dir", ab.report_dir, "Where reports are written");
  s->callback([&] { run = [&] { return cmd_ablate(common, ab); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    return run();
  } catch (const dialectid::ConfigError& e) {
    std::fprintf(stderr, "dialectid: %s\n", e.what());
    return kUsage;
  } catch (const dialectid::DataError& e) {
    std::fprintf(stderr, "dialectid: %s\n", e.what());
    return kData;
  } catch (const dialectid::NumericError& e) {
    std::fprintf(stderr, "dialectid: %s\n", e.what());
    return kNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dialectid: %s\n", e.what());
    return kFailure;
  }
}
