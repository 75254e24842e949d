#include "dialectid/encoder.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "binary.hpp"
#include "dialectid/error.hpp"
#include "dialectid/io.hpp"
#include "dialectid/rng.hpp"

namespace dialectid {

namespace {

constexpr double kLayerNormEps = 1e-12;
constexpr std::uint8_t kEncoderFormatVersion = 1;

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

template <typename Real>
LayerNormCache<Real> layer_norm(const Matrix<Real>& x, const Matrix<Real>& gain,
                                const Matrix<Real>& bias, Matrix<Real>& out) {
  const Eigen::Index n = x.cols();
  LayerNormCache<Real> cache;
  cache.normalized.resize(x.rows(), n);
  cache.inv_std.resize(x.rows());
  out.resize(x.rows(), n);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Real mean = x.row(r).mean();
    const auto centered = (x.row(r).array() - mean).matrix();
    const Real var = centered.squaredNorm() / static_cast<Real>(n);
    const Real inv = Real(1) / std::sqrt(var + static_cast<Real>(kLayerNormEps));
    cache.inv_std(r) = inv;
    cache.normalized.row(r) = centered * inv;
  }
  out = (cache.normalized.array().rowwise() * gain.row(0).array()).rowwise() + bias.row(0).array();
  return cache;
}

template <typename Real>
Matrix<Real> layer_norm_backward(const Matrix<Real>& grad_out, const LayerNormCache<Real>& cache,
                                 const Matrix<Real>& gain, Matrix<Real>& grad_gain,
                                 Matrix<Real>& grad_bias) {
  grad_gain.row(0) += (grad_out.array() * cache.normalized.array()).colwise().sum().matrix();
  grad_bias.row(0) += grad_out.colwise().sum();
  const Matrix<Real> g = (grad_out.array().rowwise() * gain.row(0).array()).matrix();
  Matrix<Real> grad_in(g.rows(), g.cols());
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    const Real mean_g = g.row(r).mean();
    const Real mean_gx = g.row(r).dot(cache.normalized.row(r)) / static_cast<Real>(g.cols());
    grad_in.row(r) = cache.inv_std(r) *
                     (g.row(r).array() - mean_g - cache.normalized.row(r).array() * mean_gx).matrix();
  }
  return grad_in;
}

template <typename Real>
Real truncated_normal(Rng& rng, Real stddev) {
  for (;;) {
    const double z = rng.normal();
    if (std::abs(z) <= 2.0) return static_cast<Real>(z) * stddev;
  }
}

template <typename Real>
void affine(const Matrix<Real>& x, const Matrix<Real>& w, const Matrix<Real>& b, Matrix<Real>& out) {
  out.noalias() = x * w;
  out.rowwise() += b.row(0);
}

template <typename Real>
void affine_backward(const Matrix<Real>& x, const Matrix<Real>& w, const Matrix<Real>& grad_out,
                     Matrix<Real>& grad_w, Matrix<Real>& grad_b, Matrix<Real>& grad_x,
                     bool accumulate_x) {
  grad_w.noalias() += x.transpose() * grad_out;
  grad_b.row(0) += grad_out.colwise().sum();
  if (accumulate_x)
    grad_x.noalias() += grad_out * w.transpose();
  else
    grad_x.noalias() = grad_out * w.transpose();
}

}  // namespace

EncoderConfig EncoderConfig::base() { return {12, 768, 12, 3072, 64000, 64}; }

EncoderConfig EncoderConfig::desk(int vocab_size) { return {2, 64, 4, 128, vocab_size, 64}; }

EncoderConfig EncoderConfig::preset(std::string_view name, int vocab_size) {
  if (name == "base") {
    EncoderConfig c = base();
    if (vocab_size > 0) c.vocab_size = vocab_size;
    return c;
  }
  if (name == "desk") return desk(vocab_size);
  throw ConfigError("unknown encoder preset: " + std::string(name));
}

void EncoderConfig::validate() const {
  if (num_layers < 1 || hidden_dim < 1 || num_heads < 1 || ffn_dim < 1 || vocab_size < 1 ||
      max_len < 1)
    throw ConfigError("encoder dimensions must be positive");
  if (hidden_dim % num_heads != 0) throw ConfigError("hidden_dim must be divisible by num_heads");
}

template <typename Real>
EncoderParams<Real> EncoderParams<Real>::zeros(const EncoderConfig& cfg) {
  cfg.validate();
  const Eigen::Index d = cfg.hidden_dim, f = cfg.ffn_dim;
  EncoderParams p;
  p.config = cfg;
  p.token_embeddings = Matrix<Real>::Zero(cfg.vocab_size, d);
  p.position_embeddings = Matrix<Real>::Zero(cfg.max_len, d);
  p.layers.resize(static_cast<std::size_t>(cfg.num_layers));
  for (auto& L : p.layers) {
    for (auto* w : {&L.q_weight, &L.k_weight, &L.v_weight, &L.o_weight}) *w = Matrix<Real>::Zero(d, d);
    for (auto* b : {&L.q_bias, &L.k_bias, &L.v_bias, &L.o_bias, &L.attn_ln_gain, &L.attn_ln_bias,
                    &L.ffn_out_bias, &L.ffn_ln_gain, &L.ffn_ln_bias})
      *b = Matrix<Real>::Zero(1, d);
    L.ffn_in_weight = Matrix<Real>::Zero(d, f);
    L.ffn_in_bias = Matrix<Real>::Zero(1, f);
    L.ffn_out_weight = Matrix<Real>::Zero(f, d);
  }
  p.final_ln_gain = Matrix<Real>::Zero(1, d);
  p.final_ln_bias = Matrix<Real>::Zero(1, d);
  return p;
}

template <typename Real>
std::size_t EncoderParams<Real>::num_parameters() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const Matrix<Real>& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

template <typename Real>
bool EncoderParams<Real>::all_finite() const {
  bool ok = true;
  for_each([&](std::string_view, const Matrix<Real>& m) { ok = ok && m.allFinite(); });
  return ok;
}

template <typename Real>
template <typename Other>
EncoderParams<Other> EncoderParams<Real>::cast() const {
  EncoderParams<Other> out = EncoderParams<Other>::zeros(config);
  std::vector<const Matrix<Real>*> src;
  for_each([&](std::string_view, const Matrix<Real>& m) { src.push_back(&m); });
  std::size_t i = 0;
  out.for_each([&](std::string_view, Matrix<Other>& m) { m = src[i++]->template cast<Other>(); });
  return out;
}

template <typename Real>
EncoderParams<Real> init_params(const EncoderConfig& cfg, std::uint64_t seed) {
  EncoderParams<Real> p = EncoderParams<Real>::zeros(cfg);
  Rng rng(seed);
  const Real stddev = static_cast<Real>(0.02);
  p.for_each([&](std::string_view name, Matrix<Real>& m) {
    if (ends_with(name, "_gain")) {
      m.setOnes();
    } else if (ends_with(name, "_bias")) {
      m.setZero();
    } else {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = truncated_normal(rng, stddev);
    }
  });
  return p;
}

template <typename Real>
Real gelu(Real x) {
  return Real(0.5) * x * (Real(1) + std::erf(x / std::numbers::sqrt2_v<Real>));
}

template <typename Real>
Real gelu_grad(Real x) {
  const Real cdf = Real(0.5) * (Real(1) + std::erf(x / std::numbers::sqrt2_v<Real>));
  const Real pdf = std::exp(Real(-0.5) * x * x) * std::numbers::inv_sqrtpi_v<Real> /
                   std::numbers::sqrt2_v<Real>;
  return cdf + x * pdf;
}

std::vector<Encoding> trim_padding(std::span<const Encoding> batch) {
  std::size_t keep = 1;
  for (const auto& e : batch) {
    for (std::size_t i = e.mask.size(); i > 0; --i) {
      if (e.mask[i - 1]) {
        keep = std::max(keep, i);
        break;
      }
    }
  }
  std::vector<Encoding> out;
  out.reserve(batch.size());
  for (const auto& e : batch) {
    Encoding t;
    const std::size_t n = std::min(keep, e.ids.size());
    t.ids.assign(e.ids.begin(), e.ids.begin() + static_cast<long>(n));
    t.mask.assign(e.mask.begin(), e.mask.begin() + static_cast<long>(n));
    t.num_real = e.num_real;
    out.push_back(std::move(t));
  }
  return out;
}

template <typename Real>
ForwardResult<Real> forward(const EncoderParams<Real>& p, std::span<const Encoding> batch,
                            bool training) {
  const EncoderConfig& cfg = p.config;
  if (batch.empty()) throw ConfigError("forward: empty batch");
  const std::size_t B = batch.size();
  const std::size_t L = batch.front().ids.size();
  if (L < 1 || L > static_cast<std::size_t>(cfg.max_len))
    throw ConfigError("forward: sequence length outside [1, max_len]");
  const Eigen::Index d = cfg.hidden_dim;
  const int H = cfg.num_heads;
  const Eigen::Index dh = cfg.head_dim();
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));

  std::vector<std::int32_t> ids(B * L);
  std::vector<std::uint8_t> mask(B * L);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& e = batch[b];
    if (e.ids.size() != L || e.mask.size() != L)
      throw ConfigError("forward: encodings in a batch must share one length");
    for (std::size_t t = 0; t < L; ++t) {
      const std::int32_t id = e.ids[t];
      if (id < 0 || id >= cfg.vocab_size)
        throw DataError("forward: token id out of range: " + std::to_string(id));
      ids[b * L + t] = id;
      mask[b * L + t] = e.mask[t];
    }
  }

  const auto BL = static_cast<Eigen::Index>(B * L);
  Matrix<Real> x(BL, d);
  for (std::size_t r = 0; r < B * L; ++r)
    x.row(static_cast<Eigen::Index>(r)) =
        p.token_embeddings.row(ids[r]) + p.position_embeddings.row(static_cast<Eigen::Index>(r % L));

  ForwardTrace<Real> trace;
  if (training) {
    trace.batch = B;
    trace.seq_len = L;
    trace.ids = ids;
    trace.mask = mask;
    trace.layers.resize(p.layers.size());
  }

  const auto Li = static_cast<Eigen::Index>(L);
  Matrix<Real> q, k, v, context(BL, d), attn_proj, x1, ffn_pre, ffn_act, ffn_out, x2;
  Matrix<Real> scores(Li, Li);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& P = p.layers[l];
    affine(x, P.q_weight, P.q_bias, q);
    affine(x, P.k_weight, P.k_bias, k);
    affine(x, P.v_weight, P.v_bias, v);

    std::vector<Matrix<Real>> probs;
    if (training) probs.reserve(B * static_cast<std::size_t>(H));
    for (std::size_t b = 0; b < B; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b * L);
      for (int h = 0; h < H; ++h) {
        const Eigen::Index c0 = h * dh;
        scores.noalias() = (q.block(r0, c0, Li, dh) * k.block(r0, c0, Li, dh).transpose()) * scale;
        for (Eigen::Index i = 0; i < Li; ++i) {
          Real row_max = -std::numeric_limits<Real>::infinity();
          for (Eigen::Index j = 0; j < Li; ++j) {
            if (mask[b * L + static_cast<std::size_t>(j)]) row_max = std::max(row_max, scores(i, j));
          }
          Real denom = 0;
          for (Eigen::Index j = 0; j < Li; ++j) {
            if (mask[b * L + static_cast<std::size_t>(j)]) {
              scores(i, j) = std::exp(scores(i, j) - row_max);
              denom += scores(i, j);
            } else {
              scores(i, j) = 0;
            }
          }
          if (denom > 0) scores.row(i) /= denom;
        }
        context.block(r0, c0, Li, dh).noalias() = scores * v.block(r0, c0, Li, dh);
        if (training) probs.push_back(scores);
      }
    }

    affine(context, P.o_weight, P.o_bias, attn_proj);
    attn_proj += x;
    auto attn_cache = layer_norm(attn_proj, P.attn_ln_gain, P.attn_ln_bias, x1);

    affine(x1, P.ffn_in_weight, P.ffn_in_bias, ffn_pre);
    ffn_act = ffn_pre.unaryExpr([](Real z) { return gelu(z); });
    affine(ffn_act, P.ffn_out_weight, P.ffn_out_bias, ffn_out);
    ffn_out += x1;
    auto ffn_cache = layer_norm(ffn_out, P.ffn_ln_gain, P.ffn_ln_bias, x2);

    if (training) {
      auto& T = trace.layers[l];
      T.input = x;
      T.q = q;
      T.k = k;
      T.v = v;
      T.attention = std::move(probs);
      T.context = context;
      T.attn_ln = std::move(attn_cache);
      T.attn_out = x1;
      T.ffn_pre = ffn_pre;
      T.ffn_act = ffn_act;
      T.ffn_ln = std::move(ffn_cache);
    }
    x = std::move(x2);
  }

  ForwardResult<Real> out;
  out.batch = B;
  out.seq_len = L;
  auto final_cache = layer_norm(x, p.final_ln_gain, p.final_ln_bias, out.hidden);
  out.pooled.resize(static_cast<Eigen::Index>(B), d);
  for (std::size_t b = 0; b < B; ++b)
    out.pooled.row(static_cast<Eigen::Index>(b)) = out.hidden.row(static_cast<Eigen::Index>(b * L));
  if (training) {
    trace.final_ln = std::move(final_cache);
    out.trace = std::move(trace);
  }
  return out;
}

template <typename Real>
Matrix<Real> pooled_to_hidden_grad(const Matrix<Real>& grad_pooled, std::size_t seq_len) {
  Matrix<Real> g = Matrix<Real>::Zero(grad_pooled.rows() * static_cast<Eigen::Index>(seq_len),
                                      grad_pooled.cols());
  for (Eigen::Index b = 0; b < grad_pooled.rows(); ++b)
    g.row(b * static_cast<Eigen::Index>(seq_len)) = grad_pooled.row(b);
  return g;
}

template <typename Real>
EncoderParams<Real> backward(const EncoderParams<Real>& p, const ForwardTrace<Real>& trace,
                             const Matrix<Real>& grad_hidden) {
  const EncoderConfig& cfg = p.config;
  const std::size_t B = trace.batch, L = trace.seq_len;
  const auto BL = static_cast<Eigen::Index>(B * L);
  const Eigen::Index d = cfg.hidden_dim;
  if (grad_hidden.rows() != BL || grad_hidden.cols() != d)
    throw ConfigError("backward: gradient shape does not match forward output");
  if (trace.layers.size() != p.layers.size()) throw ConfigError("backward: trace/params mismatch");
  const int H = cfg.num_heads;
  const Eigen::Index dh = cfg.head_dim();
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));
  const auto Li = static_cast<Eigen::Index>(L);

  EncoderParams<Real> g = EncoderParams<Real>::zeros(cfg);
  Matrix<Real> dx = layer_norm_backward(grad_hidden, trace.final_ln, p.final_ln_gain,
                                        g.final_ln_gain, g.final_ln_bias);

  Matrix<Real> d_act, d_pre, d_x1, d_ctx, dq(BL, d), dk(BL, d), dv(BL, d), d_scores(Li, Li);
  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const auto& P = p.layers[li];
    auto& G = g.layers[li];
    const auto& T = trace.layers[li];

    const Matrix<Real> d_ffn_sum =
        layer_norm_backward(dx, T.ffn_ln, P.ffn_ln_gain, G.ffn_ln_gain, G.ffn_ln_bias);
    affine_backward(T.ffn_act, P.ffn_out_weight, d_ffn_sum, G.ffn_out_weight, G.ffn_out_bias, d_act,
                    false);
    d_pre = d_act.binaryExpr(T.ffn_pre, [](Real da, Real z) { return da * gelu_grad(z); });
    d_x1 = d_ffn_sum;
    affine_backward(T.attn_out, P.ffn_in_weight, d_pre, G.ffn_in_weight, G.ffn_in_bias, d_x1, true);

    const Matrix<Real> d_attn_sum =
        layer_norm_backward(d_x1, T.attn_ln, P.attn_ln_gain, G.attn_ln_gain, G.attn_ln_bias);
    affine_backward(T.context, P.o_weight, d_attn_sum, G.o_weight, G.o_bias, d_ctx, false);

    for (std::size_t b = 0; b < B; ++b) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(b * L);
      for (int h = 0; h < H; ++h) {
        const Eigen::Index c0 = h * dh;
        const Matrix<Real>& A = T.attention[b * static_cast<std::size_t>(H) + static_cast<std::size_t>(h)];
        const auto dC = d_ctx.block(r0, c0, Li, dh);
        const Matrix<Real> dA = dC * T.v.block(r0, c0, Li, dh).transpose();
        dv.block(r0, c0, Li, dh).noalias() = A.transpose() * dC;
        for (Eigen::Index i = 0; i < Li; ++i) {
          const Real dot = A.row(i).dot(dA.row(i));
          d_scores.row(i) = (A.row(i).array() * (dA.row(i).array() - dot)).matrix();
        }
        dq.block(r0, c0, Li, dh).noalias() = (d_scores * T.k.block(r0, c0, Li, dh)) * scale;
        dk.block(r0, c0, Li, dh).noalias() = (d_scores.transpose() * T.q.block(r0, c0, Li, dh)) * scale;
      }
    }

    Matrix<Real> d_in = d_attn_sum;
    affine_backward(T.input, P.q_weight, dq, G.q_weight, G.q_bias, d_in, true);
    affine_backward(T.input, P.k_weight, dk, G.k_weight, G.k_bias, d_in, true);
    affine_backward(T.input, P.v_weight, dv, G.v_weight, G.v_bias, d_in, true);
    dx = std::move(d_in);
  }

  for (std::size_t r = 0; r < B * L; ++r) {
    g.token_embeddings.row(trace.ids[r]) += dx.row(static_cast<Eigen::Index>(r));
    g.position_embeddings.row(static_cast<Eigen::Index>(r % L)) += dx.row(static_cast<Eigen::Index>(r));
  }
  return g;
}

std::string serialize_encoder(const EncoderParams<float>& p) {
  std::string out = "DLID";
  out.push_back(static_cast<char>(kEncoderFormatVersion));
  const auto& c = p.config;
  for (int v : {c.num_layers, c.hidden_dim, c.num_heads, c.ffn_dim, c.vocab_size, c.max_len})
    binary::put_i32(out, v);
  out.reserve(out.size() + 4 * p.num_parameters());
  p.for_each([&](std::string_view, const Matrix<float>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) binary::put_f32(out, m.data()[i]);
  });
  return out;
}

EncoderParams<float> deserialize_encoder(const std::string& bytes) {
  binary::Reader in(bytes, "encoder file");
  in.expect("DLID");
  if (in.u8() != kEncoderFormatVersion) throw DataError("encoder file: unsupported version");
  EncoderConfig c;
  c.num_layers = in.i32();
  c.hidden_dim = in.i32();
  c.num_heads = in.i32();
  c.ffn_dim = in.i32();
  c.vocab_size = in.i32();
  c.max_len = in.i32();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("encoder file: ") + e.what());
  }
  auto p = EncoderParams<float>::zeros(c);
  p.for_each([&](std::string_view, Matrix<float>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = in.f32();
  });
  if (!in.done()) throw DataError("encoder file: trailing bytes");
  return p;
}

void save_encoder(const std::filesystem::path& path, const EncoderParams<float>& p) {
  const std::string bytes = serialize_encoder(p);
  io::write_atomic(path, [&](std::ostream& os) { os.write(bytes.data(), static_cast<long>(bytes.size())); }, true);
}

EncoderParams<float> load_encoder(const std::filesystem::path& path) {
  return deserialize_encoder(io::read_file(path));
}

#define DIALECTID_INSTANTIATE(Real)                                                              \
  template struct EncoderParams<Real>;                                                           \
  template EncoderParams<Real> init_params<Real>(const EncoderConfig&, std::uint64_t);           \
  template ForwardResult<Real> forward<Real>(const EncoderParams<Real>&, std::span<const Encoding>, \
                                             bool);                                              \
  template EncoderParams<Real> backward<Real>(const EncoderParams<Real>&,                        \
                                              const ForwardTrace<Real>&, const Matrix<Real>&);   \
  template Matrix<Real> pooled_to_hidden_grad<Real>(const Matrix<Real>&, std::size_t);           \
  template Real gelu<Real>(Real);                                                                \
  template Real gelu_grad<Real>(Real);

DIALECTID_INSTANTIATE(float)
DIALECTID_INSTANTIATE(double)

#undef DIALECTID_INSTANTIATE

template EncoderParams<double> EncoderParams<float>::cast<double>() const;
template EncoderParams<float> EncoderParams<double>::cast<float>() const;
template EncoderParams<float> EncoderParams<float>::cast<float>() const;
template EncoderParams<double> EncoderParams<double>::cast<double>() const;

}  // namespace dialectid
