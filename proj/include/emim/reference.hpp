#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "emim/attention.hpp"
#include "emim/config.hpp"
#include "emim/ops.hpp"
#include "emim/tensor.hpp"
#include "emim/window.hpp"

// Naive loop reference for every attention mechanism. Everything here is
// written as the plainest possible per-query loops over materialized windows;
// the optimized implementations are differentially tested against these.
// The counters record one entry per multiply-accumulate, so the analytic
// compute model can be checked against instrumented runs by integer equality.

namespace emim::reference {

struct MacCounter {
  std::uint64_t affinity = 0;
  std::uint64_t aggregation = 0;
  std::uint64_t motion = 0;
  std::uint64_t projections = 0;

  std::uint64_t total() const { return affinity + aggregation + motion + projections; }
};

// Per-token projection by explicit loops.
inline TokenVolume naive_linear(const TokenVolume& x, const LinearParams& p,
                                MacCounter* mac = nullptr) {
  const int d_in = x.channels();
  const int d_out = static_cast<int>(p.out_dim());
  TokenVolume out = TokenVolume::zeros(x.frames(), x.height(), x.width(), d_out);
  for (int t = 0; t < x.frames(); ++t)
    for (int xx = 0; xx < x.height(); ++xx)
      for (int yy = 0; yy < x.width(); ++yy) {
        const double* in = x.token(t, xx, yy);
        double* o = out.token(t, xx, yy);
        for (int j = 0; j < d_out; ++j) {
          double acc = p.bias[static_cast<std::size_t>(j)];
          const double* wrow = p.weight.data() + static_cast<std::size_t>(j) * d_in;
          for (int c = 0; c < d_in; ++c) acc += wrow[c] * in[c];
          o[j] = acc;
        }
        if (mac) mac->projections += static_cast<std::uint64_t>(d_out) * d_in;
      }
  return out;
}

inline AffinityField naive_build_affinity(const TokenVolume& q, const TokenVolume& k,
                                          const RelPosBias* bias, const EmimConfig& cfg,
                                          MacCounter* mac = nullptr) {
  cfg.validate(q.height(), q.width(), q.channels());
  q.values().require_same_shape(k.values(), "naive_build_affinity");
  const int heads = cfg.heads;
  const int dh = q.channels() / heads;
  const int area = cfg.window_area();
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const int T = q.frames(), H = q.height(), W = q.width();

  AffinityField field;
  field.values = Tensor({static_cast<std::size_t>(heads), static_cast<std::size_t>(T),
                         static_cast<std::size_t>(H), static_cast<std::size_t>(W),
                         static_cast<std::size_t>(area)});
  for (int t = 0; t < T; ++t)
    for (int x = 0; x < H; ++x)
      for (int y = 0; y < W; ++y) {
        const Tensor window = sample_window(k, t, x, y, cfg);  // area x d
        for (int h = 0; h < heads; ++h) {
          const double* qv = q.token(t, x, y) + h * dh;
          for (int w = 0; w < area; ++w) {
            const double* kv = window.data() + static_cast<std::size_t>(w) * q.channels() + h * dh;
            double acc = 0.0;
            for (int c = 0; c < dh; ++c) acc += qv[c] * kv[c];
            if (mac) mac->affinity += static_cast<std::uint64_t>(dh);
            double a = acc * inv_scale;
            if (cfg.bias_enabled && bias) a += bias->at(h, w, cfg);
            field.values[field.values.flat_index(h, t, x, y, w)] = a;
          }
        }
      }
  return field;
}

inline AffinityField naive_normalize(const AffinityField& a) {
  AffinityField out;
  out.values = Tensor(a.values.shape());
  const int area = a.window_area();
  std::vector<double> row(static_cast<std::size_t>(area));
  for (std::size_t r = 0; r < a.values.size() / area; ++r) {
    for (int w = 0; w < area; ++w) row[static_cast<std::size_t>(w)] = a.values[r * area + w];
    const std::vector<double> sm = softmax_row(row);
    for (int w = 0; w < area; ++w) out.values[r * area + w] = sm[static_cast<std::size_t>(w)];
  }
  out.normalized = true;
  return out;
}

inline TokenVolume naive_aggregate(const AffinityField& a_norm, const TokenVolume& v,
                                   const EmimConfig& cfg, MacCounter* mac = nullptr) {
  const int heads = cfg.heads;
  const int dh = v.channels() / heads;
  const int area = cfg.window_area();
  TokenVolume out = TokenVolume::zeros(v.frames(), v.height(), v.width(), v.channels());
  for (int t = 0; t < v.frames(); ++t)
    for (int x = 0; x < v.height(); ++x)
      for (int y = 0; y < v.width(); ++y) {
        const Tensor window = sample_window(v, t, x, y, cfg);
        double* o = out.token(t, x, y);
        for (int h = 0; h < heads; ++h)
          for (int w = 0; w < area; ++w) {
            const double aw = a_norm.row(h, t, x, y)[w];
            const double* vv = window.data() + static_cast<std::size_t>(w) * v.channels() + h * dh;
            for (int c = 0; c < dh; ++c) o[h * dh + c] += aw * vv[c];
            if (mac) mac->aggregation += static_cast<std::uint64_t>(dh);
          }
      }
  return out;
}

inline TokenVolume naive_motion(const AffinityField& a_raw, const MotionMlpParams& p,
                                const EmimConfig& cfg, MacCounter* mac = nullptr) {
  const int heads = a_raw.heads();
  const int area = cfg.window_area();
  const int hidden = 4 * area;
  const int dh = static_cast<int>(p.fc2.out_dim());
  TokenVolume out =
      TokenVolume::zeros(a_raw.frames(), a_raw.height(), a_raw.width(), heads * dh);
  std::vector<double> u(static_cast<std::size_t>(hidden));
  for (int h = 0; h < heads; ++h)
    for (int t = 0; t < a_raw.frames(); ++t)
      for (int x = 0; x < a_raw.height(); ++x)
        for (int y = 0; y < a_raw.width(); ++y) {
          const double* row = a_raw.row(h, t, x, y);
          for (int j = 0; j < hidden; ++j) {
            double acc = p.fc1.bias[static_cast<std::size_t>(j)];
            const double* wrow = p.fc1.weight.data() + static_cast<std::size_t>(j) * area;
            for (int w = 0; w < area; ++w) acc += wrow[w] * row[w];
            u[static_cast<std::size_t>(j)] = gelu(acc);
          }
          if (mac) mac->motion += static_cast<std::uint64_t>(hidden) * area;
          double* o = out.token(t, x, y) + h * dh;
          for (int c = 0; c < dh; ++c) {
            double acc = p.fc2.bias[static_cast<std::size_t>(c)];
            const double* wrow = p.fc2.weight.data() + static_cast<std::size_t>(c) * hidden;
            for (int j = 0; j < hidden; ++j) acc += wrow[j] * u[static_cast<std::size_t>(j)];
            o[c] = acc;
          }
          if (mac) mac->motion += static_cast<std::uint64_t>(dh) * hidden;
        }
  return out;
}

inline TokenVolume naive_emim_forward(const TokenVolume& x, const EmimParams& p,
                                      const EmimConfig& cfg, bool motion_enabled = true,
                                      MacCounter* mac = nullptr) {
  const TokenVolume q = naive_linear(x, p.q, mac);
  const TokenVolume k = naive_linear(x, p.k, mac);
  const TokenVolume v = naive_linear(x, p.v, mac);
  const AffinityField raw = naive_build_affinity(q, k, &p.bias, cfg, mac);
  const AffinityField norm = naive_normalize(raw);
  TokenVolume combined = naive_aggregate(norm, v, cfg, mac);
  if (motion_enabled) {
    const TokenVolume m = naive_motion(raw, p.motion, cfg, mac);
    combined.values() += m.values();
  }
  return naive_linear(combined, p.out, mac);
}

inline TokenVolume naive_global_forward(const TokenVolume& x, const GlobalAttnParams& p,
                                        int heads, MacCounter* mac = nullptr) {
  const int d = x.channels();
  const int dh = d / heads;
  const int n = x.tokens();
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const TokenVolume q = naive_linear(x, p.q, mac);
  const TokenVolume k = naive_linear(x, p.k, mac);
  const TokenVolume v = naive_linear(x, p.v, mac);

  // Token index i maps to (t,x,y) in raster order; the volume rows already
  // are that flattening.
  const double* qrows = q.values().data();
  const double* krows = k.values().data();
  const double* vrows = v.values().data();
  TokenVolume combined = TokenVolume::zeros(x.frames(), x.height(), x.width(), d);
  std::vector<double> scores(static_cast<std::size_t>(n));
  for (int h = 0; h < heads; ++h) {
    const int coff = h * dh;
    for (int i = 0; i < n; ++i) {
      const double* qi = qrows + static_cast<std::size_t>(i) * d + coff;
      for (int j = 0; j < n; ++j) {
        const double* kj = krows + static_cast<std::size_t>(j) * d + coff;
        double acc = 0.0;
        for (int c = 0; c < dh; ++c) acc += qi[c] * kj[c];
        scores[static_cast<std::size_t>(j)] = acc * inv_scale;
      }
      if (mac) mac->affinity += static_cast<std::uint64_t>(n) * dh;
      const std::vector<double> prob = softmax_row(scores);
      double* o = combined.values().data() + static_cast<std::size_t>(i) * d + coff;
      for (int j = 0; j < n; ++j) {
        const double pj = prob[static_cast<std::size_t>(j)];
        const double* vj = vrows + static_cast<std::size_t>(j) * d + coff;
        for (int c = 0; c < dh; ++c) o[c] += pj * vj[c];
      }
      if (mac) mac->aggregation += static_cast<std::uint64_t>(n) * dh;
    }
  }
  return naive_linear(combined, p.out, mac);
}

inline TokenVolume naive_nonsliding_forward(const TokenVolume& x, const EmimParams& p,
                                            const EmimConfig& cfg, bool motion_enabled = true,
                                            MacCounter* mac = nullptr) {
  if (cfg.sampling != Sampling::non_sliding) {
    throw ConfigError("naive_nonsliding_forward requires sampling = non_sliding");
  }
  return naive_emim_forward(x, p, cfg, motion_enabled, mac);
}

}  // namespace emim::reference
