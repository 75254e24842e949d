#include "dialectid/ablation.hpp"

#include <cstdio>

#include "dialectid/error.hpp"

namespace dialectid {

namespace {

std::vector<std::string> prepare_all(const TextPipeline& pipe, std::span<const std::string> texts) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(pipe.prepare(t));
  return out;
}

Dataset prepare_dataset(const TextPipeline& pipe, const Dataset& ds) {
  Dataset out;
  out.provenance = ds.provenance;
  out.examples.reserve(ds.size());
  for (const auto& ex : ds.examples) out.examples.push_back({pipe.prepare(ex.text), ex.label});
  return out;
}

Vocab build_vocab(const std::vector<std::string>& train_texts,
                  const std::vector<std::string>& unlabeled, const TokenizerSettings& tok) {
  std::vector<std::string> corpus = train_texts;
  corpus.insert(corpus.end(), unlabeled.begin(), unlabeled.end());
  return train_bpe(corpus, tok.vocab_size, tok.min_freq);
}

MetricsReport score(std::span<const DialectLabel> preds, const Dataset& dev) {
  const auto golds = dev.labels();
  const auto order = all_label_order();
  return metrics(confusion(preds, golds, order));
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& ablation_row_names() {
  static const std::vector<std::string> kNames = {
      "baseline",
      "cleaning",
      "cleaning+upsampling",
      "cleaning+upsampling+mlm",
      "hybrid_nb+cleaning+upsampling",
  };
  return kNames;
}

std::string AblationResult::summary_tsv() const {
  std::string out;
  for (const auto& r : rows)
    out += r.name + "\t" + fixed4(r.report.macro_f1) + "\t" + fixed4(r.report.accuracy) + "\n";
  return out;
}

std::string AblationResult::summary_text() const {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-32s %9s %9s\n", "model", "macro_f1", "accuracy");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-32s %9.4f %9.4f\n", r.name.c_str(), r.report.macro_f1,
                  r.report.accuracy);
    out += buf;
  }
  return out;
}

std::vector<DialectLabel> predict_flat_batch(const EncoderParams<float>& encoder,
                                             const HeadParams<float>& head, const Vocab& v,
                                             const EncodingConfig& enc,
                                             std::span<const std::string> prepared) {
  const Matrix<float> logits = predict_logits(encoder, head, v, enc, prepared);
  std::vector<DialectLabel> out;
  out.reserve(prepared.size());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = c;
    }
    out.push_back(label_at(static_cast<std::size_t>(best)));
  }
  return out;
}

std::vector<HybridPrediction> predict_hybrid_batch(const HybridModel<float>& hm, const Vocab& v,
                                                   const EncodingConfig& enc,
                                                   std::span<const std::string> prepared) {
  const Matrix<float> logits = predict_logits(hm.encoder, hm.head, v, enc, prepared);
  std::vector<HybridPrediction> out;
  out.reserve(prepared.size());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = c;
    }
    out.push_back(route_hybrid(static_cast<std::size_t>(best), hm.grouping, hm.nb,
                               prepared[static_cast<std::size_t>(r)]));
  }
  return out;
}

AblationResult run_ablation(const Dataset& train, const Dataset& dev,
                            std::span<const std::string> unlabeled, const PipelineConfig& cfg,
                            const ProgressFn& progress) {
  cfg.validate();
  if (train.empty() || dev.empty()) throw ConfigError("ablation: train and dev must be non-empty");
  auto note = [&](const std::string& msg) {
    if (progress) progress(msg);
  };

  TextPipeline raw_pipe = cfg.text_pipeline();
  raw_pipe.normalize = NormalizeConfig::disabled();
  const TextPipeline clean_pipe = cfg.text_pipeline();
  if (!clean_pipe.normalize.any_enabled())
    throw ConfigError("ablation: cleaning rows need at least one normalization stage");

  const Dataset train_raw = prepare_dataset(raw_pipe, train);
  const Dataset train_clean = prepare_dataset(clean_pipe, train);
  const auto dev_raw = prepare_all(raw_pipe, dev.texts());
  const auto dev_clean = prepare_all(clean_pipe, dev.texts());
  const auto unlabeled_raw = prepare_all(raw_pipe, unlabeled);
  const auto unlabeled_clean = prepare_all(clean_pipe, unlabeled);
  const Dataset train_up = upsample(train_clean, cfg.upsample);

  note("building vocabularies");
  const Vocab vocab_raw = build_vocab(train_raw.texts(), unlabeled_raw, cfg.tokenizer);
  const Vocab vocab_clean = build_vocab(train_clean.texts(), unlabeled_clean, cfg.tokenizer);

  const std::size_t max_len = cfg.encoding.max_len;
  const auto enc_raw = cfg.encoder.resolve(static_cast<int>(vocab_raw.size()), max_len);
  const auto enc_clean = cfg.encoder.resolve(static_cast<int>(vocab_clean.size()), max_len);
  const auto init_raw = init_params<float>(enc_raw, cfg.encoder.seed);
  const auto init_clean = init_params<float>(enc_clean, cfg.encoder.seed);
  const auto seed_head = derive_seed(cfg.encoder.seed, 1);
  const auto head21 = HeadParams<float>::init(enc_clean.hidden_dim, kNumLabels, seed_head);
  const GroupingScheme grouping = GroupingScheme::standard();
  const auto head16 =
      HeadParams<float>::init(enc_clean.hidden_dim, static_cast<int>(grouping.num_outputs()), seed_head);
  const EncodingConfig enc_cfg = cfg.encoding;

  AblationResult result;
  const auto& names = ablation_row_names();

  note("training " + names[0]);
  {
    auto [e, h] = finetune(init_raw, head21, train_raw, vocab_raw, cfg.finetune, LabelSpace::flat21);
    result.rows.push_back({names[0], score(predict_flat_batch(e, h, vocab_raw, enc_cfg, dev_raw), dev)});
  }
  note("training " + names[1]);
  {
    auto [e, h] = finetune(init_clean, head21, train_clean, vocab_clean, cfg.finetune, LabelSpace::flat21);
    result.rows.push_back({names[1], score(predict_flat_batch(e, h, vocab_clean, enc_cfg, dev_clean), dev)});
  }
  note("training " + names[2]);
  {
    auto [e, h] = finetune(init_clean, head21, train_up, vocab_clean, cfg.finetune, LabelSpace::flat21);
    result.rows.push_back({names[2], score(predict_flat_batch(e, h, vocab_clean, enc_cfg, dev_clean), dev)});
  }
  note("pretraining for " + names[3]);
  {
    if (unlabeled_clean.empty()) throw ConfigError("ablation: MLM row needs an unlabeled corpus");
    const auto adapted = pretrain(init_clean, std::span<const std::string>(unlabeled_clean),
                                  vocab_clean, cfg.mlm);
    note("training " + names[3]);
    auto [e, h] = finetune(adapted, head21, train_up, vocab_clean, cfg.finetune, LabelSpace::flat21);
    result.rows.push_back({names[3], score(predict_flat_batch(e, h, vocab_clean, enc_cfg, dev_clean), dev)});
  }
  note("training " + names[4]);
  {
    auto [e, h] = finetune(init_clean, head16, train_up, vocab_clean, cfg.finetune,
                           LabelSpace::grouped16, grouping);
    HybridModel<float> hm{std::move(e), std::move(h), grouping,
                          train_nb(train_up, grouping.minority, cfg.nb_alpha)};
    const auto routed = predict_hybrid_batch(hm, vocab_clean, enc_cfg, dev_clean);
    std::vector<DialectLabel> preds;
    preds.reserve(routed.size());
    for (const auto& r : routed) preds.push_back(r.label);
    result.rows.push_back({names[4], score(preds, dev)});
  }
  return result;
}

}  // namespace dialectid
