#include "dialectid/eval.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "dialectid/error.hpp"

namespace dialectid {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::vector<DialectLabel> all_label_order() {
  return {all_labels().begin(), all_labels().end()};
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts)
    for (std::size_t c : row) n += c;
  return n;
}

ConfusionMatrix ConfusionMatrix::zeros(std::vector<DialectLabel> order) {
  ConfusionMatrix cm;
  const std::size_t n = order.size();
  cm.label_order = std::move(order);
  cm.counts.assign(n, std::vector<std::size_t>(n, 0));
  return cm;
}

ConfusionMatrix confusion(std::span<const DialectLabel> preds, std::span<const DialectLabel> golds,
                          std::span<const DialectLabel> labels) {
  if (preds.size() != golds.size())
    throw ConfigError("confusion: predictions and gold labels differ in length");
  std::array<long, kNumLabels> position;
  position.fill(-1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (position[index_of(labels[i])] >= 0) throw ConfigError("confusion: duplicate label in order");
    position[index_of(labels[i])] = static_cast<long>(i);
  }
  ConfusionMatrix cm = ConfusionMatrix::zeros({labels.begin(), labels.end()});
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const long g = position[index_of(golds[i])];
    const long p = position[index_of(preds[i])];
    if (g < 0 || p < 0)
      throw ConfigError("confusion: label outside the label order at index " + std::to_string(i));
    ++cm.counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  const std::size_t n = cm.label_order.size();
  MetricsReport r;
  r.label_order = cm.label_order;
  r.per_class.resize(n);
  std::size_t trace = 0, total = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t tp = cm.counts[c][c], gold = 0, pred = 0;
    for (std::size_t k = 0; k < n; ++k) {
      gold += cm.counts[c][k];
      pred += cm.counts[k][c];
    }
    trace += tp;
    total += gold;
    auto& s = r.per_class[c];
    s.precision = ratio(tp, pred);
    s.recall = ratio(tp, gold);
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  }
  double sum = 0.0;
  for (const auto& s : r.per_class) sum += s.f1;
  r.macro_f1 = n == 0 ? 0.0 : sum / static_cast<double>(n);
  r.accuracy = ratio(trace, total);
  return r;
}

std::string format_report_text(const MetricsReport& r) {
  std::size_t width = 8;
  for (auto l : r.label_order) width = std::max(width, label_name(l).size());
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s %9s %9s %9s\n", static_cast<int>(width), "label", "precision",
                "recall", "f1");
  out += buf;
  for (std::size_t i = 0; i < r.label_order.size(); ++i) {
    const auto& s = r.per_class[i];
    std::snprintf(buf, sizeof buf, "%-*s %9.4f %9.4f %9.4f\n", static_cast<int>(width),
                  std::string(label_name(r.label_order[i])).c_str(), s.precision, s.recall, s.f1);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-*s %29.4f\n%-*s %29.4f\n", static_cast<int>(width), "macro_f1",
                r.macro_f1, static_cast<int>(width), "accuracy", r.accuracy);
  out += buf;
  return out;
}

std::string format_report_tsv(const MetricsReport& r) {
  std::string out;
  for (std::size_t i = 0; i < r.label_order.size(); ++i) {
    const auto& s = r.per_class[i];
    out += std::string(label_name(r.label_order[i])) + "\t" + fixed4(s.precision) + "\t" +
           fixed4(s.recall) + "\t" + fixed4(s.f1) + "\n";
  }
  out += "macro_f1\t" + fixed4(r.macro_f1) + "\n";
  out += "accuracy\t" + fixed4(r.accuracy) + "\n";
  return out;
}

}  // namespace dialectid
