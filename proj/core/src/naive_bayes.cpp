#include "dialectid/naive_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "dialectid/error.hpp"
#include "dialectid/io.hpp"
#include "dialectid/utf8.hpp"

namespace dialectid {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("nb model: bad number at line " + std::to_string(line_no));
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

void NbModel::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < vocabulary.size(); ++i) index_.emplace(vocabulary[i], i);
}

long NbModel::token_index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

std::size_t NbModel::class_position(DialectLabel label) const {
  auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end())
    throw ConfigError("label not modelled by naive Bayes: " + std::string(label_name(label)));
  return static_cast<std::size_t>(it - classes.begin());
}

NbModel train_nb(const Dataset& ds, std::span<const DialectLabel> classes, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("train_nb: alpha must be > 0");
  if (classes.empty()) throw ConfigError("train_nb: no classes");
  NbModel m;
  m.alpha = alpha;
  m.classes.assign(classes.begin(), classes.end());
  const std::size_t C = m.classes.size();

  std::vector<std::size_t> doc_counts(C, 0), token_totals(C, 0);
  std::vector<std::map<std::string, std::size_t>> counts(C);
  std::set<std::string> vocab;
  std::size_t n_docs = 0;
  for (const auto& ex : ds.examples) {
    auto it = std::find(m.classes.begin(), m.classes.end(), ex.label);
    if (it == m.classes.end()) continue;
    const auto c = static_cast<std::size_t>(it - m.classes.begin());
    ++doc_counts[c];
    ++n_docs;
    for (auto& tok : utf8::split_whitespace(ex.text)) {
      ++token_totals[c];
      ++counts[c][tok];
      vocab.insert(std::move(tok));
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    if (doc_counts[c] == 0)
      throw ConfigError("train_nb: class has no examples: " +
                        std::string(label_name(m.classes[c])));
  }

  m.vocabulary.assign(vocab.begin(), vocab.end());
  const double V = static_cast<double>(m.vocabulary.size());
  m.class_log_priors.resize(C);
  m.token_log_likelihoods.assign(C, std::vector<double>(m.vocabulary.size()));
  for (std::size_t c = 0; c < C; ++c) {
    m.class_log_priors[c] = std::log(static_cast<double>(doc_counts[c]) / static_cast<double>(n_docs));
    const double denom = static_cast<double>(token_totals[c]) + alpha * V;
    for (std::size_t t = 0; t < m.vocabulary.size(); ++t) {
      auto it = counts[c].find(m.vocabulary[t]);
      const double n = it == counts[c].end() ? 0.0 : static_cast<double>(it->second);
      m.token_log_likelihoods[c][t] = std::log((n + alpha) / denom);
    }
  }
  m.rebuild_index();
  return m;
}

NbPrediction nb_predict(const NbModel& m, std::string_view text) {
  const std::size_t C = m.classes.size();
  std::vector<double> score = m.class_log_priors;
  for (const auto& tok : utf8::split_whitespace(text)) {
    const long t = m.token_index(tok);
    if (t < 0) continue;
    for (std::size_t c = 0; c < C; ++c) score[c] += m.token_log_likelihoods[c][static_cast<std::size_t>(t)];
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < C; ++c) {
    if (score[c] > score[best]) best = c;
  }
  const double mx = score[best];
  double z = 0.0;
  for (double s : score) z += std::exp(s - mx);
  const double log_z = mx + std::log(z);
  NbPrediction out;
  out.label = m.classes[best];
  out.log_posteriors.reserve(C);
  for (double s : score) out.log_posteriors.push_back(s - log_z);
  return out;
}

std::string NbModel::serialize() const {
  std::string out = "NB1 " + fmt_double(alpha) + " " + std::to_string(classes.size()) + "\n";
  for (std::size_t c = 0; c < classes.size(); ++c)
    out += "prior\t" + std::string(label_name(classes[c])) + "\t" + fmt_double(class_log_priors[c]) + "\n";
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (std::size_t t = 0; t < vocabulary.size(); ++t) {
      out += "ll\t" + std::string(label_name(classes[c])) + "\t" + vocabulary[t] + "\t" +
             fmt_double(token_log_likelihoods[c][t]) + "\n";
    }
  }
  return out;
}

NbModel NbModel::deserialize(const std::string& content) {
  std::istringstream in(content);
  std::string header;
  if (!std::getline(in, header)) throw DataError("nb model: empty file");
  std::istringstream hs(header);
  std::string magic, alpha_s;
  std::size_t num_classes = 0;
  if (!(hs >> magic >> alpha_s >> num_classes) || magic != "NB1")
    throw DataError("nb model: bad header");
  NbModel m;
  m.alpha = parse_double(alpha_s, 1);

  std::map<std::string, std::size_t> token_ids;
  std::vector<std::tuple<std::size_t, std::string, double>> entries;
  std::size_t line_no = 1;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    DialectLabel label{};
    if (f.size() < 3 || !try_parse_label(f[1], label))
      throw DataError("nb model: malformed line " + std::to_string(line_no));
    if (f[0] == "prior" && f.size() == 3) {
      m.classes.push_back(label);
      m.class_log_priors.push_back(parse_double(f[2], line_no));
    } else if (f[0] == "ll" && f.size() == 4) {
      auto it = std::find(m.classes.begin(), m.classes.end(), label);
      if (it == m.classes.end())
        throw DataError("nb model: likelihood for undeclared class at line " + std::to_string(line_no));
      token_ids.emplace(f[2], 0);
      entries.emplace_back(static_cast<std::size_t>(it - m.classes.begin()), f[2],
                           parse_double(f[3], line_no));
    } else {
      throw DataError("nb model: malformed line " + std::to_string(line_no));
    }
  }
  if (m.classes.size() != num_classes) throw DataError("nb model: class count mismatch");
  for (auto& [tok, id] : token_ids) {
    id = m.vocabulary.size();
    m.vocabulary.push_back(tok);
  }
  m.token_log_likelihoods.assign(num_classes, std::vector<double>(m.vocabulary.size(), 0.0));
  std::vector<std::vector<bool>> seen(num_classes, std::vector<bool>(m.vocabulary.size(), false));
  for (const auto& [c, tok, v] : entries) {
    const std::size_t t = token_ids[tok];
    m.token_log_likelihoods[c][t] = v;
    seen[c][t] = true;
  }
  for (const auto& row : seen) {
    if (std::find(row.begin(), row.end(), false) != row.end())
      throw DataError("nb model: missing likelihood entries");
  }
  m.rebuild_index();
  return m;
}

void NbModel::save(const std::filesystem::path& path) const {
  const std::string content = serialize();
  io::write_atomic(path, [&](std::ostream& os) { os << content; });
}

NbModel NbModel::load(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

}  // namespace dialectid
