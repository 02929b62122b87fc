#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "emim/config.hpp"
#include "emim/error.hpp"
#include "emim/ops.hpp"
#include "emim/tensor.hpp"
#include "emim/window.hpp"

// The windowed cross-frame attention mechanism: per-query affinity rows over
// a (2P+1)^2 neighborhood in the source frame, reused both for contextual
// aggregation (appearance) and, through a two-layer MLP, for motion features.
// This is the optimized implementation; emim::reference holds the naive loop
// oracle it is differentially tested against.

namespace emim {

// Learnable per-head additive term indexed by window offset (dx+P, dy+P).
struct RelPosBias {
  Tensor table;  // heads x side x side
  Tensor grad;

  double at(int head, int slot, const EmimConfig& cfg) const {
    return table[static_cast<std::size_t>(head) * cfg.window_area() + slot];
  }
};

inline RelPosBias make_bias(int heads, const EmimConfig& cfg, double fill = 0.0) {
  RelPosBias b;
  const auto side = static_cast<std::size_t>(cfg.window_side());
  b.table = Tensor({static_cast<std::size_t>(heads), side, side}, fill);
  b.grad = Tensor({static_cast<std::size_t>(heads), side, side}, 0.0);
  return b;
}

// Per-query flattened window of similarity scores;
// shape heads x T x H x W x (2P+1)^2.
struct AffinityField {
  Tensor values;
  bool normalized = false;

  int heads() const { return static_cast<int>(values.extent(0)); }
  int frames() const { return static_cast<int>(values.extent(1)); }
  int height() const { return static_cast<int>(values.extent(2)); }
  int width() const { return static_cast<int>(values.extent(3)); }
  int window_area() const { return static_cast<int>(values.extent(4)); }

  double* row(int h, int t, int x, int y) {
    return values.data() + values.flat_index(h, t, x, y, 0);
  }
  const double* row(int h, int t, int x, int y) const {
    return values.data() + values.flat_index(h, t, x, y, 0);
  }
};

// Two-layer feature transformation applied to raw affinity rows, shared
// across heads: (2P+1)^2 -> 4*(2P+1)^2 -> d_head.
struct MotionMlpParams {
  LinearParams fc1;
  LinearParams fc2;
};

inline MotionMlpParams make_motion_mlp(const EmimConfig& cfg, int d_head, Rng& rng) {
  const auto area = static_cast<std::size_t>(cfg.window_area());
  MotionMlpParams m;
  m.fc1 = make_linear(area, 4 * area, rng);
  m.fc2 = make_linear(4 * area, static_cast<std::size_t>(d_head), rng);
  return m;
}

struct EmimParams {
  LinearParams q, k, v, out;
  RelPosBias bias;
  MotionMlpParams motion;
};

inline EmimParams make_emim_params(int channels, const EmimConfig& cfg, Rng& rng) {
  cfg.validate(cfg.window_side(), cfg.window_side(), channels);  // heads-divisibility check
  const auto d = static_cast<std::size_t>(channels);
  EmimParams p;
  p.q = make_linear(d, d, rng);
  p.k = make_linear(d, d, rng);
  p.v = make_linear(d, d, rng);
  p.out = make_linear(d, d, rng);
  p.bias = make_bias(cfg.heads, cfg);
  p.motion = make_motion_mlp(cfg, channels / cfg.heads, rng);
  return p;
}

inline void check_motion_dims(const MotionMlpParams& m, const EmimConfig& cfg, int d_head) {
  const auto area = static_cast<std::size_t>(cfg.window_area());
  if (m.fc1.in_dim() != area || m.fc1.out_dim() != 4 * area ||
      m.fc2.in_dim() != 4 * area || m.fc2.out_dim() != static_cast<std::size_t>(d_head)) {
    throw ConfigError("motion MLP extents " + shape_str(m.fc1.weight.shape()) + "," +
                      shape_str(m.fc2.weight.shape()) + " inconsistent with window area " +
                      std::to_string(area) + " and head dim " + std::to_string(d_head));
  }
}

// ---------------------------------------------------------------------------
// build_affinity: A[h,t,x,y,w] = <q_h(t,x,y), k_h(src)> / sqrt(d_head) + B_h(w)
// The bias is added at padded slots too; padded key tokens hold pad_value in
// every channel.

inline AffinityField build_affinity(const TokenVolume& q, const TokenVolume& k,
                                    const RelPosBias* bias, const EmimConfig& cfg) {
  if (!q.values().same_shape(k.values())) {
    throw DimensionError("build_affinity: query shape " + shape_str(q.values().shape()) +
                         " vs key shape " + shape_str(k.values().shape()));
  }
  cfg.validate(q.height(), q.width(), q.channels());
  const int heads = cfg.heads;
  const int dh = q.channels() / heads;
  const int area = cfg.window_area();
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const int T = q.frames(), H = q.height(), W = q.width();

  AffinityField field;
  field.values = Tensor({static_cast<std::size_t>(heads), static_cast<std::size_t>(T),
                         static_cast<std::size_t>(H), static_cast<std::size_t>(W),
                         static_cast<std::size_t>(area)});
  field.normalized = false;

  std::vector<double> pad(static_cast<std::size_t>(dh), cfg.pad_value);
  for (int h = 0; h < heads; ++h) {
    const int coff = h * dh;
    for (int t = 0; t < T; ++t)
      for (int x = 0; x < H; ++x)
        for (int y = 0; y < W; ++y) {
          const double* qv = q.token(t, x, y) + coff;
          double* arow = field.row(h, t, x, y);
          for (int w = 0; w < area; ++w) {
            const SlotSource src = slot_source(cfg, T, H, W, t, x, y, w);
            const double* kv = src.padded ? pad.data() : k.token(src.t, src.x, src.y) + coff;
            double acc = 0.0;
            for (int c = 0; c < dh; ++c) acc += qv[c] * kv[c];
            double a = acc * inv_scale;
            if (cfg.bias_enabled && bias) a += bias->at(h, w, cfg);
            arow[w] = a;
          }
        }
  }
  return field;
}

inline AffinityField normalize_affinity(const AffinityField& a) {
  if (a.normalized) throw ConfigError("normalize_affinity: field is already normalized");
  AffinityField out;
  out.values = softmax_rows(a.values);
  out.normalized = true;
  return out;
}

// ---------------------------------------------------------------------------
// aggregate_context: F_h(t,x,y) = sum_w A~[h,t,x,y,w] * v_h(src_w), heads
// re-concatenated. Value windows follow the identical sampling rules.

inline void check_field_matches(const AffinityField& a, const TokenVolume& v,
                                const EmimConfig& cfg) {
  if (a.heads() != cfg.heads || a.window_area() != cfg.window_area()) {
    throw ConfigError("affinity field (heads=" + std::to_string(a.heads()) + ", window=" +
                      std::to_string(a.window_area()) + ") does not match config (heads=" +
                      std::to_string(cfg.heads) + ", window=" + std::to_string(cfg.window_area()) +
                      ")");
  }
  if (a.frames() != v.frames() || a.height() != v.height() || a.width() != v.width()) {
    throw DimensionError("affinity field extents " + shape_str(a.values.shape()) +
                         " do not match volume " + shape_str(v.values().shape()));
  }
}

inline TokenVolume aggregate_context(const AffinityField& a_norm, const TokenVolume& v,
                                     const EmimConfig& cfg) {
  if (!a_norm.normalized) throw ConfigError("aggregate_context: affinity field is not normalized");
  check_field_matches(a_norm, v, cfg);
  cfg.validate(v.height(), v.width(), v.channels());
  const int heads = cfg.heads;
  const int dh = v.channels() / heads;
  const int area = cfg.window_area();
  const int T = v.frames(), H = v.height(), W = v.width();

  TokenVolume out = TokenVolume::zeros(T, H, W, v.channels());
  std::vector<double> pad(static_cast<std::size_t>(dh), cfg.pad_value);
  for (int h = 0; h < heads; ++h) {
    const int coff = h * dh;
    for (int t = 0; t < T; ++t)
      for (int x = 0; x < H; ++x)
        for (int y = 0; y < W; ++y) {
          const double* arow = a_norm.row(h, t, x, y);
          double* f = out.token(t, x, y) + coff;
          for (int w = 0; w < area; ++w) {
            const SlotSource src = slot_source(cfg, T, H, W, t, x, y, w);
            const double* vv = src.padded ? pad.data() : v.token(src.t, src.x, src.y) + coff;
            const double aw = arow[w];
            for (int c = 0; c < dh; ++c) f[c] += aw * vv[c];
          }
        }
  }
  return out;
}

// ---------------------------------------------------------------------------
// motion_transform: per query and head, fc2(gelu(fc1(raw affinity row))),
// heads concatenated. Operates on the raw (pre-softmax, bias-included) field.

struct MotionSaved {
  Tensor pre;  // heads x T x H x W x 4*area, pre-gelu
  Tensor act;  // same shape, post-gelu
};

inline TokenVolume motion_transform(const AffinityField& a_raw, const MotionMlpParams& p,
                                    const EmimConfig& cfg, MotionSaved* saved = nullptr) {
  if (a_raw.normalized) {
    throw ConfigError("motion_transform expects the raw affinity field, got a normalized one");
  }
  const int dh = static_cast<int>(p.fc2.out_dim());
  check_motion_dims(p, cfg, dh);
  if (a_raw.heads() != cfg.heads || a_raw.window_area() != cfg.window_area()) {
    throw ConfigError("motion_transform: field does not match config");
  }
  const int heads = a_raw.heads();
  const int T = a_raw.frames(), H = a_raw.height(), W = a_raw.width();

  Tensor pre = linear_forward(a_raw.values, p.fc1);  // heads x T x H x W x 4*area
  Tensor act = gelu_forward(pre);
  Tensor mfield = linear_forward(act, p.fc2);  // heads x T x H x W x dh
  if (saved) {
    saved->pre = std::move(pre);
    saved->act = std::move(act);
  }

  TokenVolume out = TokenVolume::zeros(T, H, W, heads * dh);
  for (int h = 0; h < heads; ++h)
    for (int t = 0; t < T; ++t)
      for (int x = 0; x < H; ++x)
        for (int y = 0; y < W; ++y) {
          const double* src = mfield.data() + mfield.flat_index(h, t, x, y, 0);
          double* dst = out.token(t, x, y) + h * dh;
          for (int c = 0; c < dh; ++c) dst[c] = src[c];
        }
  return out;
}

inline TokenVolume combine_features(const TokenVolume& f, const TokenVolume& m) {
  f.values().require_same_shape(m.values(), "combine_features");
  TokenVolume out = f;
  out.values() += m.values();
  return out;
}

// ---------------------------------------------------------------------------
// Full module forward/backward.

struct EmimSaved {
  bool valid = false;
  EmimConfig cfg;
  bool motion_enabled = true;
  TokenVolume x, q, k, v;
  AffinityField raw, norm;
  MotionSaved motion;
  TokenVolume combined;  // F + M, before the output projection
};

inline void check_emim_params(const EmimParams& p, int channels, const EmimConfig& cfg) {
  const auto d = static_cast<std::size_t>(channels);
  for (const LinearParams* lp : {&p.q, &p.k, &p.v, &p.out}) {
    if (lp->in_dim() != d || lp->out_dim() != d) {
      throw ConfigError("projection weight " + shape_str(lp->weight.shape()) +
                        " does not match channels " + std::to_string(channels));
    }
  }
  if (static_cast<int>(p.bias.table.extent(0)) != cfg.heads ||
      static_cast<int>(p.bias.table.extent(1)) != cfg.window_side()) {
    throw ConfigError("bias table " + shape_str(p.bias.table.shape()) +
                      " does not match heads=" + std::to_string(cfg.heads) + " window side=" +
                      std::to_string(cfg.window_side()));
  }
  check_motion_dims(p.motion, cfg, channels / cfg.heads);
}

inline TokenVolume emim_forward(const TokenVolume& x, EmimParams& p, const EmimConfig& cfg,
                                bool motion_enabled = true, EmimSaved* saved = nullptr) {
  cfg.validate(x.height(), x.width(), x.channels());
  check_emim_params(p, x.channels(), cfg);

  TokenVolume q(linear_forward(x.values(), p.q));
  TokenVolume k(linear_forward(x.values(), p.k));
  TokenVolume v(linear_forward(x.values(), p.v));

  AffinityField raw = build_affinity(q, k, &p.bias, cfg);
  AffinityField norm = normalize_affinity(raw);
  TokenVolume combined = aggregate_context(norm, v, cfg);
  if (motion_enabled) {
    TokenVolume m = motion_transform(raw, p.motion, cfg, saved ? &saved->motion : nullptr);
    combined = combine_features(combined, m);
  }
  TokenVolume out(linear_forward(combined.values(), p.out));

  if (saved) {
    saved->valid = true;
    saved->cfg = cfg;
    saved->motion_enabled = motion_enabled;
    saved->x = x;
    saved->q = std::move(q);
    saved->k = std::move(k);
    saved->v = std::move(v);
    saved->raw = std::move(raw);
    saved->norm = std::move(norm);
    saved->combined = std::move(combined);
  }
  return out;
}

// Accumulates parameter gradients into p; returns the input gradient.
inline TokenVolume emim_backward(const TokenVolume& dout, const EmimSaved& saved, EmimParams& p) {
  if (!saved.valid) throw StateError("emim_backward: no saved activations from a forward pass");
  dout.values().require_same_shape(saved.x.values(), "emim_backward");
  const EmimConfig& cfg = saved.cfg;
  const int heads = cfg.heads;
  const int d = saved.x.channels();
  const int dh = d / heads;
  const int area = cfg.window_area();
  const int T = saved.x.frames(), H = saved.x.height(), W = saved.x.width();
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // Output projection.
  Tensor dcombined = linear_backward(saved.combined.values(), p.out, dout.values());

  // Motion path: gather per-head slices of dcombined into field layout, then
  // run the MLP backward on whole fields at once.
  Tensor da_motion;
  if (saved.motion_enabled) {
    Tensor dm({static_cast<std::size_t>(heads), static_cast<std::size_t>(T),
               static_cast<std::size_t>(H), static_cast<std::size_t>(W),
               static_cast<std::size_t>(dh)});
    for (int h = 0; h < heads; ++h)
      for (int t = 0; t < T; ++t)
        for (int x = 0; x < H; ++x)
          for (int y = 0; y < W; ++y) {
            const double* src = dcombined.data() + dcombined.flat_index(t, x, y, h * dh);
            double* dst = dm.data() + dm.flat_index(h, t, x, y, 0);
            for (int c = 0; c < dh; ++c) dst[c] = src[c];
          }
    Tensor dact = linear_backward(saved.motion.act, p.motion.fc2, dm);
    Tensor dpre = gelu_backward(saved.motion.pre, dact);
    da_motion = linear_backward(saved.raw.values, p.motion.fc1, dpre);
  }

  // Appearance path: dA~ from the value windows, then softmax backward.
  Tensor da(saved.raw.values.shape());
  TokenVolume dv = TokenVolume::zeros(T, H, W, d);
  std::vector<double> drow(static_cast<std::size_t>(area));
  for (int h = 0; h < heads; ++h) {
    const int coff = h * dh;
    for (int t = 0; t < T; ++t)
      for (int x = 0; x < H; ++x)
        for (int y = 0; y < W; ++y) {
          const double* df = dcombined.data() + dcombined.flat_index(t, x, y, coff);
          const double* anorm = saved.norm.row(h, t, x, y);
          for (int w = 0; w < area; ++w) {
            const SlotSource src = slot_source(cfg, T, H, W, t, x, y, w);
            if (src.padded) {
              // Padded value tokens are constants; their dot with df is still
              // part of dA~ (every channel equals pad_value).
              double acc = 0.0;
              for (int c = 0; c < dh; ++c) acc += df[c];
              drow[w] = acc * cfg.pad_value;
            } else {
              const double* vv = saved.v.token(src.t, src.x, src.y) + coff;
              double acc = 0.0;
              for (int c = 0; c < dh; ++c) acc += df[c] * vv[c];
              drow[w] = acc;
              double* dvv = dv.token(src.t, src.x, src.y) + coff;
              const double aw = anorm[w];
              for (int c = 0; c < dh; ++c) dvv[c] += aw * df[c];
            }
          }
          softmax_backward_row(anorm, drow.data(), da.data() + saved.raw.values.flat_index(h, t, x, y, 0),
                               static_cast<std::size_t>(area));
        }
  }
  if (saved.motion_enabled) da += da_motion;

  // Bias table gradient: sum of dA over queries, per head and slot.
  if (cfg.bias_enabled) {
    for (int h = 0; h < heads; ++h)
      for (int t = 0; t < T; ++t)
        for (int x = 0; x < H; ++x)
          for (int y = 0; y < W; ++y) {
            const double* darow = da.data() + da.flat_index(h, t, x, y, 0);
            double* brow = p.bias.grad.data() + static_cast<std::size_t>(h) * area;
            for (int w = 0; w < area; ++w) brow[w] += darow[w];
          }
  }

  // Raw-affinity gradient into Q and K.
  TokenVolume dq = TokenVolume::zeros(T, H, W, d);
  TokenVolume dk = TokenVolume::zeros(T, H, W, d);
  for (int h = 0; h < heads; ++h) {
    const int coff = h * dh;
    for (int t = 0; t < T; ++t)
      for (int x = 0; x < H; ++x)
        for (int y = 0; y < W; ++y) {
          const double* darow = da.data() + da.flat_index(h, t, x, y, 0);
          const double* qv = saved.q.token(t, x, y) + coff;
          double* dqv = dq.token(t, x, y) + coff;
          for (int w = 0; w < area; ++w) {
            const double g = darow[w] * inv_scale;
            const SlotSource src = slot_source(cfg, T, H, W, t, x, y, w);
            if (src.padded) {
              // d<q, pad>/dq = pad_value in every channel; the pad itself has
              // no gradient.
              for (int c = 0; c < dh; ++c) dqv[c] += g * cfg.pad_value;
            } else {
              const double* kv = saved.k.token(src.t, src.x, src.y) + coff;
              double* dkv = dk.token(src.t, src.x, src.y) + coff;
              for (int c = 0; c < dh; ++c) {
                dqv[c] += g * kv[c];
                dkv[c] += g * qv[c];
              }
            }
          }
        }
  }

  // Projections back to the input.
  Tensor dx = linear_backward(saved.x.values(), p.q, dq.values());
  dx += linear_backward(saved.x.values(), p.k, dk.values());
  dx += linear_backward(saved.x.values(), p.v, dv.values());
  return TokenVolume(std::move(dx));
}

// ---------------------------------------------------------------------------
// Global self-attention baseline: full N x N affinity over all tokens.

struct GlobalAttnParams {
  LinearParams q, k, v, out;
};

inline GlobalAttnParams make_global_params(int channels, Rng& rng) {
  const auto d = static_cast<std::size_t>(channels);
  GlobalAttnParams p;
  p.q = make_linear(d, d, rng);
  p.k = make_linear(d, d, rng);
  p.v = make_linear(d, d, rng);
  p.out = make_linear(d, d, rng);
  return p;
}

struct GlobalSaved {
  bool valid = false;
  int heads = 1;
  TokenVolume x, q, k, v;
  std::vector<Tensor> probs;  // per head, N x N
  TokenVolume combined;
};

namespace detail {

inline Tensor gather_head(const Tensor& rows, int n, int d, int head, int dh) {
  Tensor out({static_cast<std::size_t>(n), static_cast<std::size_t>(dh)});
  for (int i = 0; i < n; ++i) {
    const double* src = rows.data() + static_cast<std::size_t>(i) * d + head * dh;
    double* dst = out.data() + static_cast<std::size_t>(i) * dh;
    for (int c = 0; c < dh; ++c) dst[c] = src[c];
  }
  return out;
}

inline void scatter_head(const Tensor& head_rows, Tensor& rows, int n, int d, int head, int dh) {
  for (int i = 0; i < n; ++i) {
    const double* src = head_rows.data() + static_cast<std::size_t>(i) * dh;
    double* dst = rows.data() + static_cast<std::size_t>(i) * d + head * dh;
    for (int c = 0; c < dh; ++c) dst[c] = src[c];
  }
}

inline void scatter_head_add(const Tensor& head_rows, Tensor& rows, int n, int d, int head,
                             int dh) {
  for (int i = 0; i < n; ++i) {
    const double* src = head_rows.data() + static_cast<std::size_t>(i) * dh;
    double* dst = rows.data() + static_cast<std::size_t>(i) * d + head * dh;
    for (int c = 0; c < dh; ++c) dst[c] += src[c];
  }
}

}  // namespace detail

inline TokenVolume global_attention_forward(const TokenVolume& x, GlobalAttnParams& p, int heads,
                                            GlobalSaved* saved = nullptr) {
  const int d = x.channels();
  if (heads < 1 || d % heads != 0) {
    throw ConfigError("global attention: channels " + std::to_string(d) +
                      " not divisible by heads " + std::to_string(heads));
  }
  const int dh = d / heads;
  const int n = x.tokens();
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  TokenVolume q(linear_forward(x.values(), p.q));
  TokenVolume k(linear_forward(x.values(), p.k));
  TokenVolume v(linear_forward(x.values(), p.v));

  Tensor combined(x.values().shape());
  std::vector<Tensor> probs;
  probs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Tensor qh = detail::gather_head(q.values(), n, d, h, dh);
    Tensor kh = detail::gather_head(k.values(), n, d, h, dh);
    Tensor vh = detail::gather_head(v.values(), n, d, h, dh);
    Tensor scores = matmul(qh, transpose2d(kh));
    scores *= inv_scale;
    Tensor prob = softmax_rows(scores);
    Tensor oh = matmul(prob, vh);
    detail::scatter_head(oh, combined, n, d, h, dh);
    probs.push_back(std::move(prob));
  }
  TokenVolume combined_vol(std::move(combined));
  TokenVolume out(linear_forward(combined_vol.values(), p.out));

  if (saved) {
    saved->valid = true;
    saved->heads = heads;
    saved->x = x;
    saved->q = std::move(q);
    saved->k = std::move(k);
    saved->v = std::move(v);
    saved->probs = std::move(probs);
    saved->combined = std::move(combined_vol);
  }
  return out;
}

inline TokenVolume global_attention_backward(const TokenVolume& dout, const GlobalSaved& saved,
                                             GlobalAttnParams& p) {
  if (!saved.valid) throw StateError("global_attention_backward: no saved activations");
  const int d = saved.x.channels();
  const int heads = saved.heads;
  const int dh = d / heads;
  const int n = saved.x.tokens();
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Tensor dcombined = linear_backward(saved.combined.values(), p.out, dout.values());

  Tensor dq_rows(saved.x.values().shape());
  Tensor dk_rows(saved.x.values().shape());
  Tensor dv_rows(saved.x.values().shape());
  for (int h = 0; h < heads; ++h) {
    Tensor doh = detail::gather_head(dcombined, n, d, h, dh);
    Tensor kh = detail::gather_head(saved.k.values(), n, d, h, dh);
    Tensor qh = detail::gather_head(saved.q.values(), n, d, h, dh);
    Tensor vh = detail::gather_head(saved.v.values(), n, d, h, dh);
    const Tensor& prob = saved.probs[static_cast<std::size_t>(h)];

    Tensor dvh = matmul(transpose2d(prob), doh);
    Tensor dprob = matmul(doh, transpose2d(vh));
    Tensor dscores = softmax_backward_rows(prob, dprob);
    dscores *= inv_scale;
    Tensor dqh = matmul(dscores, kh);
    Tensor dkh = matmul(transpose2d(dscores), qh);

    detail::scatter_head_add(dqh, dq_rows, n, d, h, dh);
    detail::scatter_head_add(dkh, dk_rows, n, d, h, dh);
    detail::scatter_head_add(dvh, dv_rows, n, d, h, dh);
  }

  Tensor dx = linear_backward(saved.x.values(), p.q, dq_rows);
  dx += linear_backward(saved.x.values(), p.k, dk_rows);
  dx += linear_backward(saved.x.values(), p.v, dv_rows);
  return TokenVolume(std::move(dx));
}

// Same pipeline as emim_forward but with the shared center-anchored window.
inline TokenVolume nonsliding_forward(const TokenVolume& x, EmimParams& p, const EmimConfig& cfg,
                                      bool motion_enabled = true, EmimSaved* saved = nullptr) {
  if (cfg.sampling != Sampling::non_sliding) {
    throw ConfigError("nonsliding_forward requires sampling = non_sliding");
  }
  return emim_forward(x, p, cfg, motion_enabled, saved);
}

}  // namespace emim
