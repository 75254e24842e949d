#include "commands.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "dialectid/ablation.hpp"
#include "dialectid/classify.hpp"
#include "dialectid/error.hpp"
#include "dialectid/eval.hpp"
#include "dialectid/io.hpp"
#include "dialectid/naive_bayes.hpp"

namespace fs = std::filesystem;

namespace dialectid::cli {

namespace {

constexpr const char* kModelManifest = "model.manifest";

bool is_tsv(const std::string& path) { return fs::path(path).extension() == ".tsv"; }

// Every line of a text file, keeping blank lines so outputs stay aligned;
// only a final empty line produced by a trailing newline is dropped.
std::vector<std::string> read_text_lines(const std::string& path) {
  auto lines = io::read_lines(path);
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_atomic(path, [&](std::ostream& os) { os << content; });
}

std::string require(const std::string& flag, const std::string& given, const PipelineConfig& cfg,
                    const std::string& path_key) {
  if (!given.empty()) return given;
  auto it = cfg.paths.find(path_key);
  if (it != cfg.paths.end() && !it->second.empty()) return it->second;
  throw ConfigError("missing " + flag + " (or paths." + path_key + " in the config)");
}

Dataset prepare_dataset(const TextPipeline& pipe, const Dataset& raw) {
  Dataset out;
  out.provenance = raw.provenance;
  out.examples.reserve(raw.size());
  for (const auto& ex : raw.examples) out.examples.push_back({pipe.prepare(ex.text), ex.label});
  return out;
}

StepCallback progress_printer(const Common& common, std::vector<StepRecord>& log,
                              const char* what) {
  return [&common, &log, what](const StepRecord& r) {
    log.push_back(r);
    if (!common.quiet && r.step % 50 == 0)
      std::fprintf(stderr, "%s step %zu loss %.4f lr %.3g\n", what, r.step, r.loss, r.lr);
  };
}

struct LoadedModel {
  std::string mode;
  PipelineConfig config;
  TextPipeline pipeline;
  Vocab vocab;
  EncoderParams<float> encoder;
  HeadParams<float> head;
  std::optional<HybridModel<float>> hybrid;
};

void save_model_common(const fs::path& dir, const std::string& mode, const PipelineConfig& cfg,
                       const Vocab& vocab) {
  fs::create_directories(dir);
  vocab.save(dir / "vocab.txt");
  write_text(dir / "pipeline.conf", cfg.serialize());
  write_text(dir / "lexicon.txt", cfg.lexicon().format());
  write_text(dir / kModelManifest, "DLMODEL1\nmode = " + mode + "\n");
}

LoadedModel load_model(const fs::path& dir) {
  LoadedModel m;
  const auto manifest = io::read_lines(dir / kModelManifest);
  if (manifest.empty() || manifest[0] != "DLMODEL1")
    throw DataError("not a model directory: " + dir.string());
  for (std::size_t i = 1; i < manifest.size(); ++i) {
    const auto& line = manifest[i];
    if (line.rfind("mode = ", 0) == 0) m.mode = line.substr(7);
  }
  if (m.mode != "flat" && m.mode != "hybrid")
    throw DataError("model manifest has no valid mode: " + dir.string());
  m.config = PipelineConfig::parse(io::read_file(dir / "pipeline.conf"));
  m.pipeline = m.config.text_pipeline();
  m.pipeline.lexicon = AffixLexicon::parse(io::read_file(dir / "lexicon.txt"));
  m.pipeline.lexicon.min_stem_len = m.config.min_stem_len;
  m.vocab = Vocab::load(dir / "vocab.txt");
  if (m.mode == "hybrid") {
    m.hybrid = load_hybrid(dir);
  } else {
    m.encoder = load_encoder(dir / "encoder.bin");
    m.head = load_head(dir / "head.bin");
    if (m.head.num_outputs() != static_cast<int>(kNumLabels))
      throw DataError("flat model head must have 21 outputs");
  }
  const int enc_vocab = m.hybrid ? m.hybrid->encoder.config.vocab_size : m.encoder.config.vocab_size;
  if (enc_vocab != static_cast<int>(m.vocab.size()))
    throw DataError("encoder vocabulary size does not match vocab.txt");
  return m;
}

}  // namespace

PipelineConfig Common::resolve() const {
  PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : PipelineConfig::load(config_path);
  if (seed) cfg.apply_seed(*seed);
  for (const auto& o : overrides) cfg.apply_override(o);
  return cfg;
}

int cmd_normalize(const Common& common, const NormalizeArgs& a) {
  const PipelineConfig cfg = common.resolve();
  cfg.validate();
  const TextPipeline pipe = cfg.text_pipeline();
  if (!pipe.normalize.any_enabled())
    throw ConfigError("normalize: every normalization stage is disabled");
  if (is_tsv(a.input)) {
    const Dataset ds = prepare_dataset(pipe, load_tsv(a.input));
    Dataset kept;
    std::size_t dropped = 0;
    for (const auto& ex : ds.examples) {
      if (ex.text.empty()) {
        ++dropped;
        continue;
      }
      kept.examples.push_back(ex);
    }
    if (dropped && !common.quiet)
      std::fprintf(stderr, "normalize: dropped %zu rows left empty by cleaning\n", dropped);
    write_text(a.output, format_tsv(kept));
  } else {
    std::string out;
    for (const auto& line : read_text_lines(a.input)) {
      out += pipe.prepare(line);
      out += '\n';
    }
    write_text(a.output, out);
  }
  return 0;
}

int cmd_build_vocab(const Common& common, const BuildVocabArgs& a) {
  PipelineConfig cfg = common.resolve();
  if (a.vocab_size) cfg.tokenizer.vocab_size = *a.vocab_size;
  cfg.validate();
  const TextPipeline pipe = cfg.text_pipeline();
  std::vector<std::string> corpus;
  for (const auto& in : a.inputs) {
    if (is_tsv(in)) {
      for (const auto& ex : load_tsv(in).examples) corpus.push_back(pipe.prepare(ex.text));
    } else {
      for (const auto& line : load_lines(in)) corpus.push_back(pipe.prepare(line));
    }
  }
  const Vocab v = train_bpe(corpus, cfg.tokenizer.vocab_size, cfg.tokenizer.min_freq);
  if (fs::path(a.output).has_parent_path()) fs::create_directories(fs::path(a.output).parent_path());
  v.save(a.output);
  if (!common.quiet) std::fprintf(stderr, "vocabulary: %zu tokens\n", v.size());
  return 0;
}

int cmd_pretrain(const Common& common, const PretrainArgs& a) {
  const PipelineConfig cfg = common.resolve();
  cfg.validate();
  const TextPipeline pipe = cfg.text_pipeline();
  const std::string corpus_path = require("--corpus", a.corpus, cfg, "unlabeled");
  std::vector<std::string> corpus;
  for (const auto& line : load_lines(corpus_path)) corpus.push_back(pipe.prepare(line));
  const Vocab v = Vocab::load(a.vocab);
  EncoderParams<float> init;
  if (!a.init.empty()) {
    init = load_encoder(a.init);
    if (init.config.vocab_size != static_cast<int>(v.size()))
      throw ConfigError("pretrain: --init encoder vocabulary does not match --vocab");
  } else {
    init = init_params<float>(cfg.encoder.resolve(static_cast<int>(v.size()), cfg.encoding.max_len),
                              cfg.encoder.seed);
  }
  std::vector<StepRecord> log;
  const auto trained = pretrain(init, std::span<const std::string>(corpus), v, cfg.mlm,
                                progress_printer(common, log, "mlm"));
  if (fs::path(a.output).has_parent_path()) fs::create_directories(fs::path(a.output).parent_path());
  save_encoder(a.output, trained);
  if (!a.log.empty()) append_training_log(a.log, log);
  return 0;
}

int cmd_finetune(const Common& common, const FinetuneArgs& a) {
  const PipelineConfig cfg = common.resolve();
  cfg.validate();
  if (a.mode != "flat" && a.mode != "hybrid") throw ConfigError("--mode must be flat or hybrid");
  const TextPipeline pipe = cfg.text_pipeline();
  Dataset train = prepare_dataset(pipe, load_tsv(require("--train", a.train, cfg, "train")));
  if (a.upsample) train = upsample(train, cfg.upsample);
  const Vocab v = Vocab::load(a.vocab);

  EncoderParams<float> init;
  if (!a.encoder.empty()) {
    init = load_encoder(a.encoder);
    if (init.config.vocab_size != static_cast<int>(v.size()))
      throw ConfigError("finetune: --encoder vocabulary does not match --vocab");
  } else {
    init = init_params<float>(cfg.encoder.resolve(static_cast<int>(v.size()), cfg.encoding.max_len),
                              cfg.encoder.seed);
  }
  const GroupingScheme grouping = GroupingScheme::standard();
  const bool hybrid = a.mode == "hybrid";
  const int outputs = hybrid ? static_cast<int>(grouping.num_outputs()) : static_cast<int>(kNumLabels);
  const auto head = HeadParams<float>::init(init.config.hidden_dim, outputs, derive_seed(cfg.encoder.seed, 1));

  std::vector<StepRecord> log;
  auto [enc, trained_head] =
      finetune(init, head, train, v, cfg.finetune, hybrid ? LabelSpace::grouped16 : LabelSpace::flat21,
               grouping, progress_printer(common, log, "finetune"));

  const fs::path dir = a.output;
  save_model_common(dir, a.mode, cfg, v);
  if (hybrid) {
    HybridModel<float> hm{std::move(enc), std::move(trained_head), grouping,
                          train_nb(train, grouping.minority, cfg.nb_alpha)};
    save_hybrid(dir, hm);
  } else {
    save_encoder(dir / "encoder.bin", enc);
    save_head(dir / "head.bin", trained_head);
  }
  if (!a.log.empty()) append_training_log(a.log, log);
  return 0;
}

int cmd_train_nb(const Common& common, const TrainNbArgs& a) {
  const PipelineConfig cfg = common.resolve();
  cfg.validate();
  const TextPipeline pipe = cfg.text_pipeline();
  Dataset train = prepare_dataset(pipe, load_tsv(require("--train", a.train, cfg, "train")));
  if (a.upsample) train = upsample(train, cfg.upsample);
  std::vector<DialectLabel> classes;
  if (a.classes.empty()) {
    classes = GroupingScheme::standard().minority;
  } else {
    for (const auto& c : a.classes) classes.push_back(parse_label(c));
  }
  const NbModel nb = train_nb(train, classes, cfg.nb_alpha);
  if (fs::path(a.output).has_parent_path()) fs::create_directories(fs::path(a.output).parent_path());
  nb.save(a.output);
  return 0;
}

int cmd_predict(const Common& common, const PredictArgs& a) {
  const LoadedModel m = load_model(a.model);
  std::vector<std::string> prepared;
  for (const auto& line : read_text_lines(a.input)) prepared.push_back(m.pipeline.prepare(line));
  std::string out;
  if (m.hybrid) {
    for (const auto& p : predict_hybrid_batch(*m.hybrid, m.vocab, m.pipeline.encoding, prepared)) {
      out.append(label_name(p.label));
      out += '\t';
      out.append(route_name(p.route));
      out += '\n';
    }
  } else {
    for (auto label : predict_flat_batch(m.encoder, m.head, m.vocab, m.pipeline.encoding, prepared)) {
      out.append(label_name(label));
      out += '\t';
      out.append(route_name(Route::direct));
      out += '\n';
    }
  }
  (void)common;
  if (a.output.empty() || a.output == "-") {
    std::cout << out;
  } else {
    write_text(a.output, out);
  }
  return 0;
}

int cmd_evaluate(const Common& common, const EvaluateArgs& a) {
  (void)common;
  if (a.format != "text" && a.format != "tsv") throw ConfigError("--format must be text or tsv");
  const Dataset gold = load_tsv(a.gold);
  std::vector<DialectLabel> preds;
  const auto lines = read_text_lines(a.predictions);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto field = lines[i].substr(0, lines[i].find('\t'));
    DialectLabel label{};
    if (!try_parse_label(field, label))
      throw DataError("unknown label at line " + std::to_string(i + 1) + " of predictions");
    preds.push_back(label);
  }
  if (preds.size() != gold.size())
    throw DataError("predictions have " + std::to_string(preds.size()) + " lines but gold has " +
                    std::to_string(gold.size()) + " examples");
  const auto golds = gold.labels();
  std::vector<DialectLabel> order = all_label_order();
  if (a.labels == "observed") {
    std::array<bool, kNumLabels> seen{};
    for (auto l : golds) seen[index_of(l)] = true;
    for (auto l : preds) seen[index_of(l)] = true;
    std::erase_if(order, [&](DialectLabel l) { return !seen[index_of(l)]; });
  } else if (a.labels != "all") {
    throw ConfigError("--labels must be all or observed");
  }
  const MetricsReport r = metrics(confusion(preds, golds, order));
  const std::string text = a.format == "tsv" ? format_report_tsv(r) : format_report_text(r);
  if (a.output.empty() || a.output == "-") {
    std::cout << text;
  } else {
    write_text(a.output, text);
  }
  return 0;
}

int cmd_synth(const Common& common, const SynthArgs& a) {
  const PipelineConfig cfg = common.resolve();
  cfg.synth.train.validate();
  if (a.train_out.empty() && a.dev_out.empty() && a.unlabeled_out.empty())
    throw ConfigError("synth: give at least one of --train-out, --dev-out, --unlabeled-out");
  if (!a.train_out.empty()) write_text(a.train_out, format_tsv(cfg.synth.make_train()));
  if (!a.dev_out.empty()) write_text(a.dev_out, format_tsv(cfg.synth.make_dev()));
  if (!a.unlabeled_out.empty()) {
    if (cfg.synth.unlabeled_count == 0) throw ConfigError("synth: synth.unlabeled_count is 0");
    std::string out;
    for (const auto& line : cfg.synth.make_unlabeled()) out += line + "\n";
    write_text(a.unlabeled_out, out);
  }
  return 0;
}

int cmd_upsample(const Common& common, const UpsampleArgs& a) {
  PipelineConfig cfg = common.resolve();
  if (a.target) cfg.upsample.target_count = *a.target;
  cfg.upsample.validate();
  write_text(a.output, format_tsv(upsample(load_tsv(a.input), cfg.upsample)));
  return 0;
}

int cmd_ablate(const Common& common, const AblateArgs& a) {
  const PipelineConfig cfg = common.resolve();
  cfg.validate();
  Dataset train, dev;
  std::vector<std::string> unlabeled;
  if (a.synthetic) {
    train = cfg.synth.make_train();
    dev = cfg.synth.make_dev();
    unlabeled = cfg.synth.make_unlabeled();
  } else {
    train = load_tsv(require("--train", a.train, cfg, "train"));
    dev = load_tsv(require("--dev", a.dev, cfg, "dev"));
    unlabeled = load_lines(require("--unlabeled", a.unlabeled, cfg, "unlabeled"));
  }
  const fs::path dir = require("--report-dir", a.report_dir, cfg, "report_dir");
  ProgressFn progress;
  if (!common.quiet) progress = [](const std::string& msg) { std::fprintf(stderr, "ablate: %s\n", msg.c_str()); };
  const AblationResult result = run_ablation(train, dev, unlabeled, cfg, progress);
  fs::create_directories(dir);
  for (const auto& row : result.rows) write_text(dir / (row.name + ".tsv"), format_report_tsv(row.report));
  write_text(dir / "summary.tsv", result.summary_tsv());
  write_text(dir / "summary.txt", result.summary_text());
  std::cout << result.summary_text();
  return 0;
}

}  // namespace dialectid::cli
