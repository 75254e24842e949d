#include "dialectid/classify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "binary.hpp"
#include "dialectid/error.hpp"
#include "dialectid/io.hpp"
#include "dialectid/loss.hpp"
#include "dialectid/optim.hpp"
#include "dialectid/rng.hpp"

namespace dialectid {

namespace {

constexpr std::uint8_t kHeadFormatVersion = 1;

}  // namespace

template <typename Real>
HeadParams<Real> HeadParams<Real>::init(int hidden_dim, int num_outputs, std::uint64_t seed) {
  if (hidden_dim < 1 || num_outputs < 1) throw ConfigError("head dimensions must be positive");
  HeadParams h;
  h.weight.resize(hidden_dim, num_outputs);
  h.bias = Matrix<Real>::Zero(1, num_outputs);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < h.weight.size(); ++i) {
    double z;
    do {
      z = rng.normal();
    } while (std::abs(z) > 2.0);
    h.weight.data()[i] = static_cast<Real>(0.02 * z);
  }
  return h;
}

template <typename Real>
Matrix<Real> head_forward(const Matrix<Real>& pooled, const HeadParams<Real>& head) {
  if (pooled.cols() != head.weight.rows() || head.bias.cols() != head.weight.cols())
    throw ConfigError("head_forward: dimension mismatch");
  Matrix<Real> logits = pooled * head.weight;
  logits.rowwise() += head.bias.row(0);
  return logits;
}

GroupingScheme GroupingScheme::standard() {
  using L = DialectLabel;
  GroupingScheme g;
  g.majority = {L::Egypt,   L::Iraq,    L::Saudi_Arabia, L::Algeria, L::Oman,
                L::Emirates, L::Libya,  L::Syria,        L::Morocco, L::Yemen,
                L::Tunisia, L::Lebanon, L::Jordan,       L::Kuwait,  L::Palestine};
  g.minority = {L::Qatar, L::Bahrain, L::Djibouti, L::Mauritania, L::Somalia, L::Sudan};
  g.super_class_index = 15;
  g.validate();
  return g;
}

void GroupingScheme::validate() const {
  std::array<int, kNumLabels> seen{};
  for (auto l : majority) ++seen[index_of(l)];
  for (auto l : minority) ++seen[index_of(l)];
  for (int s : seen) {
    if (s != 1) throw ConfigError("grouping must partition the 21 labels exactly");
  }
  if (minority.empty() || majority.empty()) throw ConfigError("grouping needs both groups");
  if (super_class_index != majority.size())
    throw ConfigError("super-class index must follow the majority labels");
}

bool GroupingScheme::is_minority(DialectLabel label) const {
  return std::find(minority.begin(), minority.end(), label) != minority.end();
}

std::int32_t GroupingScheme::grouped_index(DialectLabel label) const {
  auto it = std::find(majority.begin(), majority.end(), label);
  if (it != majority.end()) return static_cast<std::int32_t>(it - majority.begin());
  if (is_minority(label)) return static_cast<std::int32_t>(super_class_index);
  throw ConfigError("label outside grouping: " + std::string(label_name(label)));
}

std::string GroupingScheme::serialize() const {
  std::string out = "GROUPING1\nmajority";
  for (auto l : majority) out += "\t" + std::string(label_name(l));
  out += "\nminority";
  for (auto l : minority) out += "\t" + std::string(label_name(l));
  out += "\n";
  return out;
}

GroupingScheme GroupingScheme::deserialize(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || line != "GROUPING1") throw DataError("grouping: bad header");
  GroupingScheme g;
  for (int section = 0; section < 2; ++section) {
    if (!std::getline(in, line)) throw DataError("grouping: truncated file");
    std::istringstream ls(line);
    std::string name, label;
    std::getline(ls, name, '\t');
    auto& target = name == "majority" ? g.majority : g.minority;
    if (name != "majority" && name != "minority") throw DataError("grouping: unknown section " + name);
    while (std::getline(ls, label, '\t')) {
      DialectLabel l{};
      if (!try_parse_label(label, l)) throw DataError("grouping: unknown label " + label);
      target.push_back(l);
    }
  }
  g.super_class_index = g.majority.size();
  try {
    g.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("grouping: ") + e.what());
  }
  return g;
}

void FinetuneConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("finetune.learning_rate must be non-negative");
  if (epochs < 1 || batch_size < 1) throw ConfigError("finetune epochs and batch_size must be positive");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0))
    throw ConfigError("finetune.warmup_fraction must be in [0,1]");
}

std::vector<std::int32_t> class_targets(const Dataset& ds, LabelSpace space,
                                        const GroupingScheme& grouping) {
  std::vector<std::int32_t> out;
  out.reserve(ds.size());
  for (const auto& ex : ds.examples) {
    out.push_back(space == LabelSpace::flat21 ? static_cast<std::int32_t>(index_of(ex.label))
                                              : grouping.grouped_index(ex.label));
  }
  return out;
}

template <typename Real>
std::pair<EncoderParams<Real>, HeadParams<Real>> finetune(
    const EncoderParams<Real>& encoder, const HeadParams<Real>& head, const Dataset& ds,
    const Vocab& v, const FinetuneConfig& cfg, LabelSpace space, const GroupingScheme& grouping,
    const StepCallback& on_step) {
  cfg.validate();
  if (ds.empty()) throw ConfigError("finetune: empty dataset");
  const int expected_outputs =
      space == LabelSpace::flat21 ? static_cast<int>(kNumLabels) : static_cast<int>(grouping.num_outputs());
  if (head.num_outputs() != expected_outputs)
    throw ConfigError("finetune: head output count does not match label space");
  if (head.hidden_dim() != encoder.config.hidden_dim)
    throw ConfigError("finetune: head input size does not match encoder");
  if (static_cast<std::size_t>(encoder.config.vocab_size) != v.size())
    throw ConfigError("finetune: encoder vocab_size does not match vocabulary");

  const std::vector<std::int32_t> targets = class_targets(ds, space, grouping);
  const EncodingConfig enc_cfg{static_cast<std::size_t>(encoder.config.max_len), true};
  std::vector<Encoding> encoded;
  encoded.reserve(ds.size());
  for (const auto& ex : ds.examples) encoded.push_back(encode(ex.text, v, enc_cfg));

  EncoderParams<Real> enc = encoder;
  HeadParams<Real> hd = head;
  auto params = tensors_of(enc);
  params.push_back(&hd.weight);
  params.push_back(&hd.bias);

  Adam<Real> adam;
  const std::size_t steps_per_epoch = (ds.size() + cfg.batch_size - 1) / cfg.batch_size;
  const auto schedule =
      LinearSchedule::make(cfg.learning_rate, steps_per_epoch * cfg.epochs, cfg.warmup_fraction);
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(ds.size());
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++step) {
      std::vector<Encoding> batch;
      std::vector<std::int32_t> batch_targets;
      for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i) {
        batch.push_back(encoded[order[i]]);
        batch_targets.push_back(targets[order[i]]);
      }
      batch = trim_padding(batch);
      auto fwd = forward(enc, batch, true);
      const Matrix<Real> logits = head_forward(fwd.pooled, hd);
      Matrix<Real> d_logits;
      const Real loss = softmax_cross_entropy<Real>(logits, batch_targets, &d_logits);
      if (!std::isfinite(static_cast<double>(loss)))
        throw NumericError("finetune: non-finite loss at step " + std::to_string(step));

      const Matrix<Real> grad_w = fwd.pooled.transpose() * d_logits;
      const Matrix<Real> grad_b = d_logits.colwise().sum();
      const Matrix<Real> d_pooled = d_logits * hd.weight.transpose();
      const EncoderParams<Real> grads =
          backward(enc, *fwd.trace, pooled_to_hidden_grad(d_pooled, fwd.seq_len));
      auto grad_list = tensors_of(grads);
      grad_list.push_back(&grad_w);
      grad_list.push_back(&grad_b);

      const double lr = schedule.at(step);
      adam.step(params, grad_list, lr);
      if (on_step) on_step({step, static_cast<double>(loss), lr});
    }
  }
  return {std::move(enc), std::move(hd)};
}

std::string TextPipeline::prepare(std::string_view raw) const {
  return dialectid::normalize(raw, normalize, lexicon);
}

template <typename Real>
Matrix<Real> predict_logits(const EncoderParams<Real>& encoder, const HeadParams<Real>& head,
                            const Vocab& v, const EncodingConfig& enc,
                            std::span<const std::string> prepared, std::size_t batch_size) {
  if (batch_size < 1) throw ConfigError("predict: batch_size must be positive");
  Matrix<Real> out(static_cast<Eigen::Index>(prepared.size()), head.num_outputs());
  for (std::size_t start = 0; start < prepared.size(); start += batch_size) {
    std::vector<Encoding> batch;
    const std::size_t end = std::min(prepared.size(), start + batch_size);
    for (std::size_t i = start; i < end; ++i) batch.push_back(encode(prepared[i], v, enc));
    batch = trim_padding(batch);
    const auto fwd = forward(encoder, batch, false);
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(end - start)) =
        head_forward(fwd.pooled, head);
  }
  return out;
}

FlatPrediction flat_from_logits(std::span<const double> logits) {
  if (logits.size() != kNumLabels) throw ConfigError("flat prediction needs 21 logits");
  FlatPrediction p;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    p.probabilities[i] = std::exp(logits[i] - mx);
    z += p.probabilities[i];
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    p.probabilities[i] /= z;
    if (logits[i] > logits[best]) best = i;
  }
  p.label = label_at(best);
  return p;
}

template <typename Real>
FlatPrediction predict_flat(const EncoderParams<Real>& encoder, const HeadParams<Real>& head,
                            const Vocab& v, const TextPipeline& pipeline, std::string_view raw) {
  if (head.num_outputs() != static_cast<int>(kNumLabels))
    throw ConfigError("predict_flat: head must have 21 outputs");
  const std::string prepared = pipeline.prepare(raw);
  const Matrix<Real> logits =
      predict_logits(encoder, head, v, pipeline.encoding, std::span<const std::string>(&prepared, 1));
  std::vector<double> row(kNumLabels);
  for (std::size_t i = 0; i < kNumLabels; ++i) row[i] = static_cast<double>(logits(0, static_cast<Eigen::Index>(i)));
  return flat_from_logits(row);
}

template <typename Real>
void HybridModel<Real>::validate() const {
  grouping.validate();
  if (head.num_outputs() != static_cast<int>(grouping.num_outputs()))
    throw ConfigError("hybrid head must have |majority|+1 outputs");
  if (head.hidden_dim() != encoder.config.hidden_dim)
    throw ConfigError("hybrid head input size does not match encoder");
  if (nb.classes != grouping.minority)
    throw ConfigError("hybrid naive Bayes classes must equal the minority group");
}

std::string_view route_name(Route r) { return r == Route::direct ? "direct" : "nb"; }

HybridPrediction route_hybrid(std::size_t grouped_argmax, const GroupingScheme& grouping,
                              const NbModel& nb, std::string_view prepared) {
  if (grouped_argmax < grouping.majority.size())
    return {grouping.majority[grouped_argmax], Route::direct};
  if (grouped_argmax == grouping.super_class_index) return {nb_predict(nb, prepared).label, Route::nb};
  throw ConfigError("grouped index out of range: " + std::to_string(grouped_argmax));
}

template <typename Real>
HybridPrediction predict_hybrid(const HybridModel<Real>& hm, const Vocab& v,
                                const TextPipeline& pipeline, std::string_view raw) {
  const std::string prepared = pipeline.prepare(raw);
  const Matrix<Real> logits = predict_logits(hm.encoder, hm.head, v, pipeline.encoding,
                                             std::span<const std::string>(&prepared, 1));
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < logits.cols(); ++i) {
    if (logits(0, i) > logits(0, best)) best = i;
  }
  return route_hybrid(static_cast<std::size_t>(best), hm.grouping, hm.nb, prepared);
}

void save_head(const std::filesystem::path& path, const HeadParams<float>& head) {
  std::string out = "DLHD";
  out.push_back(static_cast<char>(kHeadFormatVersion));
  binary::put_i32(out, static_cast<std::int32_t>(head.weight.rows()));
  binary::put_i32(out, static_cast<std::int32_t>(head.weight.cols()));
  for (Eigen::Index i = 0; i < head.weight.size(); ++i) binary::put_f32(out, head.weight.data()[i]);
  for (Eigen::Index i = 0; i < head.bias.size(); ++i) binary::put_f32(out, head.bias.data()[i]);
  io::write_atomic(path, [&](std::ostream& os) { os.write(out.data(), static_cast<long>(out.size())); }, true);
}

HeadParams<float> load_head(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  binary::Reader in(bytes, "head file");
  in.expect("DLHD");
  if (in.u8() != kHeadFormatVersion) throw DataError("head file: unsupported version");
  const std::int32_t rows = in.i32(), cols = in.i32();
  if (rows < 1 || cols < 1) throw DataError("head file: bad dimensions");
  HeadParams<float> h;
  h.weight.resize(rows, cols);
  h.bias.resize(1, cols);
  for (Eigen::Index i = 0; i < h.weight.size(); ++i) h.weight.data()[i] = in.f32();
  for (Eigen::Index i = 0; i < h.bias.size(); ++i) h.bias.data()[i] = in.f32();
  if (!in.done()) throw DataError("head file: trailing bytes");
  return h;
}

void save_hybrid(const std::filesystem::path& dir, const HybridModel<float>& hm) {
  hm.validate();
  std::filesystem::create_directories(dir);
  save_encoder(dir / "encoder.bin", hm.encoder);
  save_head(dir / "head.bin", hm.head);
  const std::string grouping = hm.grouping.serialize();
  io::write_atomic(dir / "grouping.txt", [&](std::ostream& os) { os << grouping; });
  hm.nb.save(dir / "nb.txt");
  io::write_atomic(dir / "hybrid.manifest", [](std::ostream& os) {
    os << "DLHYBRID1\nencoder = encoder.bin\nhead = head.bin\ngrouping = grouping.txt\nnb = nb.txt\n";
  });
}

HybridModel<float> load_hybrid(const std::filesystem::path& dir) {
  const auto lines = io::read_lines(dir / "hybrid.manifest");
  if (lines.empty() || lines[0] != "DLHYBRID1") throw DataError("hybrid manifest: bad header");
  std::filesystem::path encoder, head, grouping, nb;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto eq = lines[i].find(" = ");
    if (eq == std::string::npos) throw DataError("hybrid manifest: malformed line " + std::to_string(i + 1));
    const std::string key = lines[i].substr(0, eq), value = lines[i].substr(eq + 3);
    if (key == "encoder") encoder = dir / value;
    else if (key == "head") head = dir / value;
    else if (key == "grouping") grouping = dir / value;
    else if (key == "nb") nb = dir / value;
    else throw DataError("hybrid manifest: unknown key " + key);
  }
  if (encoder.empty() || head.empty() || grouping.empty() || nb.empty())
    throw DataError("hybrid manifest: missing entries");
  HybridModel<float> hm{load_encoder(encoder), load_head(head),
                        GroupingScheme::deserialize(io::read_file(grouping)), NbModel::load(nb)};
  try {
    hm.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("hybrid model: ") + e.what());
  }
  return hm;
}

#define DIALECTID_INSTANTIATE(Real)                                                             \
  template struct HeadParams<Real>;                                                             \
  template struct HybridModel<Real>;                                                            \
  template Matrix<Real> head_forward<Real>(const Matrix<Real>&, const HeadParams<Real>&);       \
  template std::pair<EncoderParams<Real>, HeadParams<Real>> finetune<Real>(                     \
      const EncoderParams<Real>&, const HeadParams<Real>&, const Dataset&, const Vocab&,        \
      const FinetuneConfig&, LabelSpace, const GroupingScheme&, const StepCallback&);           \
  template Matrix<Real> predict_logits<Real>(const EncoderParams<Real>&, const HeadParams<Real>&, \
                                             const Vocab&, const EncodingConfig&,               \
                                             std::span<const std::string>, std::size_t);        \
  template FlatPrediction predict_flat<Real>(const EncoderParams<Real>&, const HeadParams<Real>&, \
                                             const Vocab&, const TextPipeline&, std::string_view); \
  template HybridPrediction predict_hybrid<Real>(const HybridModel<Real>&, const Vocab&,        \
                                                 const TextPipeline&, std::string_view);

DIALECTID_INSTANTIATE(float)
DIALECTID_INSTANTIATE(double)

#undef DIALECTID_INSTANTIATE

}  // namespace dialectid
