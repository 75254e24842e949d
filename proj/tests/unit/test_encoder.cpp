#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "../support/model_testing.hpp"
#include "dialectid/encoder.hpp"
#include "dialectid/error.hpp"

using namespace dialectid;
using dialectid::testing::make_encoding;
using dialectid::testing::random_batch;

namespace {

EncoderConfig tiny(int layers = 1) { return {layers, 8, 2, 12, 30, 16}; }

}  // namespace

TEST(EncoderConfig, Presets) {
  const auto base = EncoderConfig::base();
  EXPECT_EQ(base.num_layers, 12);
  EXPECT_EQ(base.hidden_dim, 768);
  EXPECT_EQ(base.num_heads, 12);
  EXPECT_EQ(base.ffn_dim, 3072);
  EXPECT_EQ(base.vocab_size, 64000);
  const auto desk = EncoderConfig::desk(500);
  EXPECT_EQ(desk, (EncoderConfig{2, 64, 4, 128, 500, 64}));
  EXPECT_THROW(EncoderConfig::preset("huge", 10), ConfigError);
  EXPECT_THROW((EncoderConfig{1, 10, 3, 4, 5, 6}).validate(), ConfigError);
}

TEST(Init, DeterministicGainsAndStatistics) {
  const auto cfg = EncoderConfig::desk(2000);
  const auto a = init_params<float>(cfg, 42);
  const auto b = init_params<float>(cfg, 42);
  EXPECT_EQ(serialize_encoder(a), serialize_encoder(b));
  EXPECT_TRUE((a.layers[0].attn_ln_gain.array() == 1.0f).all());
  EXPECT_TRUE((a.final_ln_gain.array() == 1.0f).all());
  EXPECT_TRUE((a.layers[1].q_bias.array() == 0.0f).all());
  const auto& e = a.token_embeddings;
  ASSERT_GE(e.size(), 100000);
  const double mean = e.cast<double>().mean();
  EXPECT_NEAR(mean, 0.0, 0.001);
  EXPECT_LE(e.cwiseAbs().maxCoeff(), 0.04f + 1e-6f);
  const double sd = std::sqrt((e.cast<double>().array() - mean).square().mean());
  // Normal truncated at ±2σ has sd ≈ 0.8796σ.
  EXPECT_NEAR(sd, 0.02 * 0.8796, 0.0005);
}

TEST(Forward, ShapesAndErrors) {
  const auto cfg = EncoderConfig::desk(50);
  const auto p = init_params<float>(cfg, 1);
  Rng rng(2);
  const auto batch = random_batch(rng, 2, 64, 10, 50);
  const auto out = forward(p, batch, false);
  EXPECT_EQ(out.hidden.rows(), 2 * 64);
  EXPECT_EQ(out.hidden.cols(), 64);
  EXPECT_EQ(out.pooled.rows(), 2);
  EXPECT_FALSE(out.trace.has_value());
  EXPECT_TRUE(forward(p, batch, true).trace.has_value());
  auto bad = batch;
  bad[0].ids[1] = 50;
  EXPECT_THROW(forward(p, bad, false), DataError);
}

TEST(Forward, BatchPermutationEquivariance) {
  const auto p = init_params<double>(tiny(2), 3);
  Rng rng(4);
  const auto batch = random_batch(rng, 3, 10, 10, 30);
  const std::vector<Encoding> swapped = {batch[2], batch[0], batch[1]};
  const auto a = forward(p, batch, false);
  const auto b = forward(p, swapped, false);
  EXPECT_EQ(a.pooled.row(0), b.pooled.row(1));
  EXPECT_EQ(a.pooled.row(2), b.pooled.row(0));
}

TEST(Forward, AttentionMaskAndNormalisation) {
  const auto p = init_params<double>(tiny(2), 5);
  Rng rng(6);
  const auto batch = random_batch(rng, 3, 12, 8, 30);
  const auto out = forward(p, batch, true);
  for (const auto& layer : out.trace->layers) {
    for (std::size_t b = 0; b < batch.size(); ++b) {
      for (int h = 0; h < 2; ++h) {
        const auto& att = layer.attention[b * 2 + h];
        for (Eigen::Index q = 0; q < att.rows(); ++q) {
          EXPECT_NEAR(att.row(q).sum(), 1.0, 1e-6);
          for (Eigen::Index k = 0; k < att.cols(); ++k)
            if (!batch[b].mask[k]) EXPECT_EQ(att(q, k), 0.0);
        }
      }
    }
  }
}

TEST(Forward, PaddingInvariance) {
  const auto p = init_params<double>(tiny(2), 7);
  const auto short_enc = make_encoding({kClsId, 9, 12, 20, kSepId}, 5);
  const auto long_enc = make_encoding({kClsId, 9, 12, 20, kSepId}, 16);
  const auto a = forward(p, std::vector{short_enc}, false);
  const auto b = forward(p, std::vector{long_enc}, false);
  EXPECT_LT((a.pooled - b.pooled).cwiseAbs().maxCoeff(), 1e-12);
  const auto trimmed = trim_padding(std::vector{long_enc, make_encoding({kClsId, 7, kSepId}, 16)});
  EXPECT_EQ(trimmed[0].length(), 5u);
  EXPECT_EQ(trimmed[1].length(), 5u);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  const auto p = init_params<double>(tiny(), 8);
  Rng rng(9);
  const auto batch = random_batch(rng, 2, 6, 6, 30);
  const auto out = forward(p, batch, true);
  const Matrix<double> zero = Matrix<double>::Zero(out.hidden.rows(), out.hidden.cols());
  const auto g = backward(p, *out.trace, zero);
  g.for_each([](std::string_view name, const Matrix<double>& m) {
    EXPECT_EQ(m.cwiseAbs().maxCoeff(), 0.0) << name;
  });
  const Matrix<double> wrong = Matrix<double>::Zero(1, 1);
  EXPECT_THROW(backward(p, *out.trace, wrong), ConfigError);
}

TEST(Backward, UnusedTokenRowsHaveZeroGradient) {
  const auto p = init_params<double>(tiny(), 10);
  const std::vector batch = {make_encoding({kClsId, 7, 8, kSepId}, 6)};
  const auto out = forward(p, batch, true);
  const Matrix<double> up = Matrix<double>::Ones(out.hidden.rows(), out.hidden.cols());
  const auto g = backward(p, *out.trace, up);
  for (int id = 0; id < 30; ++id) {
    const bool used = id == kClsId || id == 7 || id == 8 || id == kSepId || id == kPadId;
    if (!used) EXPECT_EQ(g.token_embeddings.row(id).cwiseAbs().maxCoeff(), 0.0) << id;
  }
  EXPECT_GT(g.token_embeddings.row(7).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, FiniteDifferencesSingleLayer) {
  const auto cfg = tiny(1);
  auto state = dialectid::testing::make_grad_state(cfg, 3, 11, 0.3);
  const auto pb = dialectid::testing::make_grad_problem(cfg, 3, 2, 7, 12);
  const auto res = dialectid::testing::gradient_check(state, pb, 6, 1e-4, 1e-4, 13);
  EXPECT_EQ(res.failed, 0u) << "worst " << res.worst_relative << " in " << res.worst_name;
  EXPECT_GE(res.checked, 100u);
}

TEST(Persistence, RoundTripAndCorruption) {
  const auto p = init_params<float>(tiny(2), 14);
  const std::string bytes = serialize_encoder(p);
  EXPECT_EQ(bytes.substr(0, 4), "DLID");
  const auto q = deserialize_encoder(bytes);
  EXPECT_EQ(q.config, p.config);
  EXPECT_EQ(serialize_encoder(q), bytes);
  EXPECT_THROW(deserialize_encoder(bytes.substr(0, bytes.size() - 3)), DataError);
  EXPECT_THROW(deserialize_encoder("XXXX" + bytes.substr(4)), DataError);
  const auto path = std::filesystem::temp_directory_path() / "dialectid_enc_test.bin";
  save_encoder(path, p);
  EXPECT_EQ(serialize_encoder(load_encoder(path)), bytes);
  std::filesystem::remove(path);
}

TEST(Gelu, MatchesErfFormAndDerivative) {
  for (double x : {-3.0, -0.5, 0.0, 0.7, 2.5}) {
    EXPECT_NEAR(gelu(x), 0.5 * x * (1 + std::erf(x / std::sqrt(2.0))), 1e-15);
    const double h = 1e-6;
    EXPECT_NEAR(gelu_grad(x), (gelu(x + h) - gelu(x - h)) / (2 * h), 1e-8);
  }
}
