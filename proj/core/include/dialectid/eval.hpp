#pragma once

#include <span>
#include <string>
#include <vector>

#include "dialectid/labels.hpp"

namespace dialectid {

// Rows are gold labels, columns predictions, both in label_order.
struct ConfusionMatrix {
  std::vector<DialectLabel> label_order;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  static ConfusionMatrix zeros(std::vector<DialectLabel> order);
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::vector<DialectLabel> label_order;
  std::vector<ClassScores> per_class;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
};

ConfusionMatrix confusion(std::span<const DialectLabel> preds, std::span<const DialectLabel> golds,
                          std::span<const DialectLabel> labels);

// Undefined quotients (0/0) are 0; the macro average covers every label in
// the order, including labels with no gold or predicted examples.
MetricsReport metrics(const ConfusionMatrix& cm);

// Aligned human-readable table.
std::string format_report_text(const MetricsReport& r);

// `label<TAB>P<TAB>R<TAB>F1` lines, then `macro_f1` and `accuracy`, four
// decimal places.
std::string format_report_tsv(const MetricsReport& r);

std::vector<DialectLabel> all_label_order();

}  // namespace dialectid
