#include "dialectid/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>

#include "dialectid/error.hpp"
#include "dialectid/io.hpp"
#include "dialectid/utf8.hpp"

namespace dialectid {

namespace {

struct Binding {
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ConfigError("invalid value for " + key + ": '" + value + "'");
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  bad_value(key, value);
}

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Binding flag(std::string key, bool& ref) {
  return {key, [&ref, key](const std::string& v) { ref = parse_bool(key, v); },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

template <typename Int>
Binding integer(std::string key, Int& ref) {
  return {key, [&ref, key](const std::string& v) { ref = parse_int<Int>(key, v); },
          [&ref] { return std::to_string(ref); }};
}

Binding real(std::string key, double& ref) {
  return {key, [&ref, key](const std::string& v) { ref = parse_real(key, v); },
          [&ref] { return fmt_real(ref); }};
}

Binding text(std::string key, std::string& ref) {
  return {key, [&ref](const std::string& v) { ref = v; }, [&ref] { return ref; }};
}

const std::vector<std::string> kPathKeys = {"lexicon", "train", "dev", "unlabeled", "report_dir"};

std::vector<Binding> bindings(PipelineConfig& c) {
  std::vector<Binding> b = {
      flag("normalize.noise_strip", c.normalize.enable_noise_strip),
      flag("normalize.tashkil_strip", c.normalize.enable_tashkil_strip),
      flag("normalize.elongation_collapse", c.normalize.enable_elongation_collapse),
      flag("normalize.segmentation", c.normalize.enable_segmentation),
      integer("normalize.elongation_min_run", c.normalize.elongation_min_run),
      integer("normalize.min_stem_len", c.min_stem_len),
      integer("encoding.max_len", c.encoding.max_len),
      flag("encoding.add_cls_sep", c.encoding.add_cls_sep),
      integer("tokenizer.vocab_size", c.tokenizer.vocab_size),
      integer("tokenizer.min_freq", c.tokenizer.min_freq),
      text("encoder.preset", c.encoder.preset),
      integer("encoder.num_layers", c.encoder.num_layers),
      integer("encoder.hidden_dim", c.encoder.hidden_dim),
      integer("encoder.num_heads", c.encoder.num_heads),
      integer("encoder.ffn_dim", c.encoder.ffn_dim),
      integer("encoder.seed", c.encoder.seed),
      real("mlm.mask_rate", c.mlm.mask_rate),
      real("mlm.replace_mask", c.mlm.replace_mask),
      real("mlm.replace_random", c.mlm.replace_random),
      real("mlm.keep_original", c.mlm.keep_original),
      real("mlm.learning_rate", c.mlm.learning_rate),
      integer("mlm.epochs", c.mlm.epochs),
      integer("mlm.batch_size", c.mlm.batch_size),
      integer("mlm.seed", c.mlm.seed),
      real("mlm.warmup_fraction", c.mlm.warmup_fraction),
      real("finetune.learning_rate", c.finetune.learning_rate),
      integer("finetune.epochs", c.finetune.epochs),
      integer("finetune.batch_size", c.finetune.batch_size),
      integer("finetune.seed", c.finetune.seed),
      real("finetune.warmup_fraction", c.finetune.warmup_fraction),
      integer("upsample.target_count", c.upsample.target_count),
      integer("upsample.seed", c.upsample.seed),
      real("nb.alpha", c.nb_alpha),
      integer("synth.num_classes", c.synth.train.num_classes),
      integer("synth.default_count", c.synth.train.default_count),
      integer("synth.vocab_per_class", c.synth.train.vocab_per_class),
      integer("synth.shared_vocab", c.synth.train.shared_vocab),
      real("synth.noise_rate", c.synth.train.noise_rate),
      real("synth.surface_noise", c.synth.train.surface_noise),
      integer("synth.min_tokens", c.synth.train.min_tokens),
      integer("synth.max_tokens", c.synth.train.max_tokens),
      integer("synth.seed", c.synth.train.seed),
      integer("synth.dev_count", c.synth.dev_count),
      integer("synth.unlabeled_count", c.synth.unlabeled_count),
  };
  for (const auto& k : kPathKeys) {
    const std::string key = "paths." + k;
    b.push_back({key, [&c, k](const std::string& v) { c.paths[k] = v; },
                 [&c, k] {
                   auto it = c.paths.find(k);
                   return it == c.paths.end() ? std::string() : it->second;
                 }});
  }
  return b;
}

constexpr std::string_view kCountPrefix = "synth.count.";

}  // namespace

EncoderConfig EncoderSettings::resolve(int vocab_size, std::size_t max_len) const {
  EncoderConfig c = EncoderConfig::preset(preset, vocab_size);
  c.vocab_size = vocab_size;
  c.max_len = static_cast<int>(max_len);
  if (num_layers) c.num_layers = num_layers;
  if (hidden_dim) c.hidden_dim = hidden_dim;
  if (num_heads) c.num_heads = num_heads;
  if (ffn_dim) c.ffn_dim = ffn_dim;
  c.validate();
  return c;
}

Dataset SyntheticSettings::make_train() const {
  Dataset ds = generate_synthetic(train);
  ds.provenance = "synthetic-train";
  return ds;
}

Dataset SyntheticSettings::make_dev() const {
  SyntheticSpec spec = train;
  spec.examples_per_class.clear();
  spec.default_count = dev_count;
  spec.sample_stream = 1;
  Dataset ds = generate_synthetic(spec);
  ds.provenance = "synthetic-dev";
  return ds;
}

std::vector<std::string> SyntheticSettings::make_unlabeled() const {
  if (unlabeled_count == 0) return {};
  SyntheticSpec spec = train;
  spec.examples_per_class.clear();
  spec.default_count = (unlabeled_count + spec.num_classes - 1) / spec.num_classes;
  spec.sample_stream = 2;
  Dataset ds = generate_synthetic(spec);
  std::vector<std::string> out;
  out.reserve(unlabeled_count);
  // Interleave classes so a prefix is not dominated by one label.
  const std::size_t per = spec.default_count;
  for (std::size_t i = 0; i < per && out.size() < unlabeled_count; ++i) {
    for (std::size_t c = 0; c < spec.num_classes && out.size() < unlabeled_count; ++c)
      out.push_back(ds.examples[c * per + i].text);
  }
  return out;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key.rfind(kCountPrefix, 0) == 0) {
    DialectLabel label{};
    if (!try_parse_label(key.substr(kCountPrefix.size()), label))
      throw ConfigError("unknown configuration key: " + key);
    synth.train.examples_per_class[label] = parse_int<std::size_t>(key, value);
    return;
  }
  for (auto& b : bindings(*this)) {
    if (b.key == key) {
      b.set(value);
      return;
    }
  }
  throw ConfigError("unknown configuration key: " + key);
}

void PipelineConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be key=value: " + assignment);
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

PipelineConfig PipelineConfig::parse(const std::string& content) {
  PipelineConfig c;
  std::size_t line_no = 0, start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  PipelineConfig c = parse(io::read_file(path));
  // Relative paths inside a config file resolve against its directory.
  for (auto& [k, v] : c.paths) {
    if (!v.empty() && std::filesystem::path(v).is_relative())
      v = (path.parent_path() / v).lexically_normal().string();
  }
  return c;
}

void PipelineConfig::apply_seed(std::uint64_t seed) {
  encoder.seed = derive_seed(seed, 10);
  mlm.seed = derive_seed(seed, 11);
  finetune.seed = derive_seed(seed, 12);
  upsample.seed = derive_seed(seed, 13);
  synth.train.seed = derive_seed(seed, 14);
}

std::vector<std::string> PipelineConfig::keys() const {
  auto copy = *this;
  std::vector<std::string> out;
  for (const auto& b : bindings(copy)) out.push_back(b.key);
  return out;
}

std::string PipelineConfig::serialize() const {
  auto copy = *this;
  std::string out;
  for (const auto& b : bindings(copy)) {
    const std::string v = b.get();
    if (b.key.rfind("paths.", 0) == 0 && v.empty()) continue;
    out += b.key + " = " + v + "\n";
  }
  for (const auto& [label, n] : synth.train.examples_per_class)
    out += std::string(kCountPrefix) + std::string(label_name(label)) + " = " + std::to_string(n) + "\n";
  return out;
}

AffixLexicon PipelineConfig::lexicon() const {
  AffixLexicon lex;
  auto it = paths.find("lexicon");
  if (it != paths.end() && !it->second.empty())
    lex = AffixLexicon::load(it->second);
  else
    lex = AffixLexicon::defaults();
  lex.min_stem_len = min_stem_len;
  return lex;
}

TextPipeline PipelineConfig::text_pipeline() const {
  return TextPipeline{normalize, lexicon(), encoding};
}

void PipelineConfig::validate() const {
  normalize.validate();
  encoding.validate();
  mlm.validate();
  finetune.validate();
  upsample.validate();
  if (!(nb_alpha > 0.0)) throw ConfigError("nb.alpha must be > 0");
  if (tokenizer.min_freq < 1) throw ConfigError("tokenizer.min_freq must be >= 1");
  (void)EncoderConfig::preset(encoder.preset, 1);
}

}  // namespace dialectid
