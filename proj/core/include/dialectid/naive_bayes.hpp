#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dialectid/corpus.hpp"
#include "dialectid/labels.hpp"

namespace dialectid {

// Multinomial Naive Bayes over whitespace tokens.
struct NbModel {
  double alpha = 1.0;
  std::vector<DialectLabel> classes;             // tie-break order
  std::vector<double> class_log_priors;          // per class
  std::vector<std::string> vocabulary;           // sorted
  std::vector<std::vector<double>> token_log_likelihoods;  // [class][token index]

  // -1 when the token is outside the vocabulary.
  long token_index(std::string_view token) const;
  std::size_t class_position(DialectLabel label) const;

  std::string serialize() const;
  static NbModel deserialize(const std::string& content);
  void save(const std::filesystem::path& path) const;
  static NbModel load(const std::filesystem::path& path);

  void rebuild_index();

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

// Trains on the examples whose label is in `classes` (others are ignored).
// prior(c) = count(c)/N; P(t|c) = (count(t,c)+α)/(tokens(c)+α|V|).
NbModel train_nb(const Dataset& ds, std::span<const DialectLabel> classes, double alpha = 1.0);

struct NbPrediction {
  DialectLabel label{};
  std::vector<double> log_posteriors;  // normalised, aligned with NbModel::classes
};

// Out-of-vocabulary tokens are skipped; ties go to the earlier class.
NbPrediction nb_predict(const NbModel& m, std::string_view text);

}  // namespace dialectid
