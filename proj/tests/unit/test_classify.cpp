#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>
#include <set>

#include "dialectid/classify.hpp"
#include "dialectid/error.hpp"

using namespace dialectid;

namespace {

Dataset toy_minority() {
  Dataset ds;
  const auto g = GroupingScheme::standard();
  const std::vector<std::string> words = {"قطر", "بحرين", "جيبوتي", "موريتان", "صومال", "سودان"};
  for (std::size_t i = 0; i < g.minority.size(); ++i)
    ds.examples.push_back({words[i] + " " + words[i], g.minority[i]});
  return ds;
}

}  // namespace

TEST(Grouping, StandardPartition) {
  const auto g = GroupingScheme::standard();
  EXPECT_NO_THROW(g.validate());
  ASSERT_EQ(g.majority.size(), 15u);
  ASSERT_EQ(g.minority.size(), 6u);
  EXPECT_EQ(g.super_class_index, 15u);
  EXPECT_EQ(g.num_outputs(), 16u);
  const std::vector<DialectLabel> minority = {DialectLabel::Qatar,      DialectLabel::Bahrain,
                                              DialectLabel::Djibouti,   DialectLabel::Mauritania,
                                              DialectLabel::Somalia,    DialectLabel::Sudan};
  EXPECT_EQ(g.minority, minority);
  std::set<DialectLabel> all(g.majority.begin(), g.majority.end());
  all.insert(g.minority.begin(), g.minority.end());
  EXPECT_EQ(all.size(), kNumLabels);
  EXPECT_EQ(g.grouped_index(DialectLabel::Egypt), 0);
  EXPECT_EQ(g.grouped_index(DialectLabel::Sudan), 15);
  EXPECT_EQ(GroupingScheme::deserialize(g.serialize()).minority, g.minority);

  auto broken = g;
  broken.minority.pop_back();
  EXPECT_THROW(broken.validate(), ConfigError);
}

TEST(ClassTargets, FlatAndGrouped) {
  Dataset ds;
  ds.examples = {{"a", DialectLabel::Iraq}, {"b", DialectLabel::Bahrain}};
  const auto g = GroupingScheme::standard();
  EXPECT_EQ(class_targets(ds, LabelSpace::flat21, g), (std::vector<std::int32_t>{1, 16}));
  EXPECT_EQ(class_targets(ds, LabelSpace::grouped16, g), (std::vector<std::int32_t>{1, 15}));
}

TEST(Routing, EveryGroupedIndex) {
  const auto g = GroupingScheme::standard();
  const NbModel nb = train_nb(toy_minority(), g.minority, 1.0);
  for (std::size_t i = 0; i < 15; ++i) {
    const auto r = route_hybrid(i, g, nb, "سودان سودان");
    EXPECT_EQ(r.label, g.majority[i]);
    EXPECT_EQ(r.route, Route::direct);
  }
  const auto r = route_hybrid(15, g, nb, "سودان سودان");
  EXPECT_EQ(r.label, DialectLabel::Sudan);
  EXPECT_EQ(r.route, Route::nb);
  EXPECT_THROW(route_hybrid(16, g, nb, ""), ConfigError);
  EXPECT_EQ(route_name(Route::nb), "nb");
  EXPECT_EQ(route_name(Route::direct), "direct");
}

TEST(FlatPrediction, ProbabilitiesAndShiftInvariance) {
  std::vector<double> logits(21);
  std::iota(logits.begin(), logits.end(), -5.0);
  logits[7] = 40.0;
  const auto a = flat_from_logits(logits);
  EXPECT_EQ(a.label, label_at(7));
  EXPECT_NEAR(std::accumulate(a.probabilities.begin(), a.probabilities.end(), 0.0), 1.0, 1e-6);
  for (auto& z : logits) z += 123.0;
  EXPECT_EQ(flat_from_logits(logits).label, a.label);
}

TEST(Head, PersistenceRoundTrip) {
  const auto h = HeadParams<float>::init(8, 16, 3);
  EXPECT_EQ(h.num_outputs(), 16);
  const auto path = std::filesystem::temp_directory_path() / "dialectid_head_test.bin";
  save_head(path, h);
  const auto back = load_head(path);
  EXPECT_EQ(back.weight, h.weight);
  EXPECT_EQ(back.bias, h.bias);
  std::filesystem::remove(path);
}

TEST(Finetune, LearnsSeparableToyTaskDeterministically) {
  Dataset ds;
  for (int i = 0; i < 30; ++i) {
    ds.examples.push_back({"بب تت ثث", DialectLabel::Egypt});
    ds.examples.push_back({"سس شش صص", DialectLabel::Iraq});
  }
  const Vocab v = train_bpe(ds.texts(), 40);
  const EncoderConfig ec{1, 16, 2, 32, static_cast<int>(v.size()), 8};
  const auto enc = init_params<float>(ec, 1);
  const auto head = HeadParams<float>::init(16, 21, 2);
  FinetuneConfig cfg;
  cfg.learning_rate = 5e-3;
  cfg.epochs = 20;
  cfg.batch_size = 8;
  cfg.seed = 4;
  const auto [e1, h1] = finetune(enc, head, ds, v, cfg, LabelSpace::flat21);
  const auto [e2, h2] = finetune(enc, head, ds, v, cfg, LabelSpace::flat21);
  EXPECT_EQ(serialize_encoder(e1), serialize_encoder(e2));
  EXPECT_EQ(h1.weight, h2.weight);
  TextPipeline pipe;
  pipe.encoding.max_len = 8;
  EXPECT_EQ(predict_flat(e1, h1, v, pipe, "بب تت").label, DialectLabel::Egypt);
  EXPECT_EQ(predict_flat(e1, h1, v, pipe, "شش صص").label, DialectLabel::Iraq);
  EXPECT_THROW(finetune(enc, head, ds, v, cfg, LabelSpace::grouped16), ConfigError);
}

TEST(Hybrid, SaveLoadAndPredict) {
  const Dataset ds = toy_minority();
  const Vocab v = train_bpe(ds.texts(), 60);
  const EncoderConfig ec{1, 8, 2, 16, static_cast<int>(v.size()), 8};
  const auto g = GroupingScheme::standard();
  HybridModel<float> hm{init_params<float>(ec, 5), HeadParams<float>::init(8, 16, 6), g,
                        train_nb(ds, g.minority, 1.0)};
  // Push every input to the super-class.
  hm.head.bias(0, 15) = 100.0f;
  EXPECT_NO_THROW(hm.validate());
  const auto dir = std::filesystem::temp_directory_path() / "dialectid_hybrid_test";
  std::filesystem::create_directories(dir);
  save_hybrid(dir, hm);
  const auto back = load_hybrid(dir);
  TextPipeline pipe;
  pipe.encoding.max_len = 8;
  const auto p = predict_hybrid(back, v, pipe, "صومال");
  EXPECT_EQ(p.route, Route::nb);
  EXPECT_EQ(p.label, DialectLabel::Somalia);
  std::filesystem::remove_all(dir);
}
