#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dialectid/tokenizer.hpp"

namespace dialectid {

template <typename Real>
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Real>
using Column = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

struct EncoderConfig {
  int num_layers = 2;
  int hidden_dim = 64;
  int num_heads = 4;
  int ffn_dim = 128;
  int vocab_size = 0;
  int max_len = 64;

  // 12 layers, 768 hidden, 12 heads, 3072 FFN, 64k vocabulary.
  static EncoderConfig base();
  static EncoderConfig desk(int vocab_size);
  // "base" or "desk".
  static EncoderConfig preset(std::string_view name, int vocab_size);

  int head_dim() const { return hidden_dim / num_heads; }
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

template <typename Real>
struct LayerParams {
  Matrix<Real> q_weight, q_bias;
  Matrix<Real> k_weight, k_bias;
  Matrix<Real> v_weight, v_bias;
  Matrix<Real> o_weight, o_bias;
  Matrix<Real> attn_ln_gain, attn_ln_bias;
  Matrix<Real> ffn_in_weight, ffn_in_bias;
  Matrix<Real> ffn_out_weight, ffn_out_bias;
  Matrix<Real> ffn_ln_gain, ffn_ln_bias;
};

// All encoder weights. Biases and layer-norm vectors are 1×n matrices so
// every tensor can be visited uniformly.
template <typename Real>
struct EncoderParams {
  EncoderConfig config;
  Matrix<Real> token_embeddings;     // vocab_size × hidden_dim
  Matrix<Real> position_embeddings;  // max_len × hidden_dim
  std::vector<LayerParams<Real>> layers;
  Matrix<Real> final_ln_gain, final_ln_bias;

  static EncoderParams zeros(const EncoderConfig& cfg);

  // Visits (name, tensor) in the fixed persistence order.
  template <typename F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  std::size_t num_parameters() const;
  bool all_finite() const;

  template <typename Other>
  EncoderParams<Other> cast() const;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    f(std::string_view("token_embeddings"), self.token_embeddings);
    f(std::string_view("position_embeddings"), self.position_embeddings);
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      auto& L = self.layers[l];
      const std::string p = "layer" + std::to_string(l) + ".";
      f(std::string_view(p + "q_weight"), L.q_weight);
      f(std::string_view(p + "q_bias"), L.q_bias);
      f(std::string_view(p + "k_weight"), L.k_weight);
      f(std::string_view(p + "k_bias"), L.k_bias);
      f(std::string_view(p + "v_weight"), L.v_weight);
      f(std::string_view(p + "v_bias"), L.v_bias);
      f(std::string_view(p + "o_weight"), L.o_weight);
      f(std::string_view(p + "o_bias"), L.o_bias);
      f(std::string_view(p + "attn_ln_gain"), L.attn_ln_gain);
      f(std::string_view(p + "attn_ln_bias"), L.attn_ln_bias);
      f(std::string_view(p + "ffn_in_weight"), L.ffn_in_weight);
      f(std::string_view(p + "ffn_in_bias"), L.ffn_in_bias);
      f(std::string_view(p + "ffn_out_weight"), L.ffn_out_weight);
      f(std::string_view(p + "ffn_out_bias"), L.ffn_out_bias);
      f(std::string_view(p + "ffn_ln_gain"), L.ffn_ln_gain);
      f(std::string_view(p + "ffn_ln_bias"), L.ffn_ln_bias);
    }
    f(std::string_view("final_ln_gain"), self.final_ln_gain);
    f(std::string_view("final_ln_bias"), self.final_ln_bias);
  }
};

// Weights ~ N(0, 0.02²) truncated at ±2σ, biases 0, gains 1.
template <typename Real>
EncoderParams<Real> init_params(const EncoderConfig& cfg, std::uint64_t seed);

template <typename Real>
struct LayerNormCache {
  Matrix<Real> normalized;  // pre-gain/bias values
  Column<Real> inv_std;
};

template <typename Real>
struct LayerTrace {
  Matrix<Real> input;
  Matrix<Real> q, k, v;
  std::vector<Matrix<Real>> attention;  // [example * heads + head], seq×seq
  Matrix<Real> context;
  LayerNormCache<Real> attn_ln;
  Matrix<Real> attn_out;
  Matrix<Real> ffn_pre;
  Matrix<Real> ffn_act;
  LayerNormCache<Real> ffn_ln;
};

template <typename Real>
struct ForwardTrace {
  std::size_t batch = 0;
  std::size_t seq_len = 0;
  std::vector<std::int32_t> ids;    // batch*seq_len, row-major
  std::vector<std::uint8_t> mask;   // batch*seq_len
  std::vector<LayerTrace<Real>> layers;
  LayerNormCache<Real> final_ln;
};

template <typename Real>
struct ForwardResult {
  std::size_t batch = 0;
  std::size_t seq_len = 0;
  Matrix<Real> hidden;  // (batch*seq_len) × hidden_dim; row = example*seq_len + position
  Matrix<Real> pooled;  // batch × hidden_dim (position 0)
  std::optional<ForwardTrace<Real>> trace;
};

// Every encoding in the batch must have the same length (≤ max_len).
// Attention never reads key positions whose mask is 0.
template <typename Real>
ForwardResult<Real> forward(const EncoderParams<Real>& p, std::span<const Encoding> batch,
                            bool training);

// Exact gradients given dLoss/dHidden for every row of the forward output.
template <typename Real>
EncoderParams<Real> backward(const EncoderParams<Real>& p, const ForwardTrace<Real>& trace,
                             const Matrix<Real>& grad_hidden);

// Lifts a batch×hidden pooled gradient into a hidden-shaped gradient.
template <typename Real>
Matrix<Real> pooled_to_hidden_grad(const Matrix<Real>& grad_pooled, std::size_t seq_len);

// Drops trailing columns that are padding in every example of the batch.
// Real positions produce identical outputs either way.
std::vector<Encoding> trim_padding(std::span<const Encoding> batch);

template <typename Real>
Real gelu(Real x);
template <typename Real>
Real gelu_grad(Real x);

// Binary persistence: "DLID", version byte, six little-endian int32 config
// fields, then every tensor in for_each order as little-endian float32.
void save_encoder(const std::filesystem::path& path, const EncoderParams<float>& p);
EncoderParams<float> load_encoder(const std::filesystem::path& path);
std::string serialize_encoder(const EncoderParams<float>& p);
EncoderParams<float> deserialize_encoder(const std::string& bytes);

}  // namespace dialectid
