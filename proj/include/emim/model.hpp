#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "emim/attention.hpp"
#include "emim/config.hpp"
#include "emim/error.hpp"
#include "emim/ops.hpp"
#include "emim/tensor.hpp"
#include "emim/window.hpp"

// Patch embedding, the pre-norm residual transformer block, and stacks built
// from an O/E replacement pattern (O = global self-attention block, E = the
// windowed cross-frame block).

namespace emim {

struct BlockPattern {
  std::string pattern = "EO";

  void validate() const {
    if (pattern.empty()) throw ConfigError("block pattern must be nonempty");
    for (char c : pattern) {
      if (c != 'O' && c != 'E') {
        throw ConfigError("block pattern may contain only O and E, got '" + pattern + "'");
      }
    }
  }

  // Applied cyclically over the stack depth.
  char kind_at(int layer) const {
    return pattern[static_cast<std::size_t>(layer) % pattern.size()];
  }
};

enum class Mechanism { emim, non_sliding, global };

inline std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::emim: return "emim";
    case Mechanism::non_sliding: return "non_sliding";
    default: return "global";
  }
}

inline Mechanism mechanism_from_string(const std::string& s) {
  if (s == "emim") return Mechanism::emim;
  if (s == "non_sliding") return Mechanism::non_sliding;
  if (s == "global") return Mechanism::global;
  throw ConfigError("unknown mechanism '" + s + "' (expected global|emim|non_sliding)");
}

struct ModelConfig {
  int depth = 2;
  int channels = 32;
  int heads = 2;
  int ffn_expansion = 4;
  int num_classes = 8;
  int patch = 1;
  int in_channels = 1;
  EmimConfig emim;
  BlockPattern pattern;
  // Attention used in E slots; O slots always run global self-attention.
  // Mechanism::global turns E slots into O blocks (the O-O baseline).
  Mechanism mechanism = Mechanism::emim;
  // Zeroes and freezes the motion path (the "without motion feature" ablation).
  bool motion_enabled = true;

  void validate() const {
    if (depth < 1) throw ConfigError("depth must be >= 1");
    if (channels < 1 || channels % heads != 0) {
      throw ConfigError("channels " + std::to_string(channels) + " not divisible by heads " +
                        std::to_string(heads));
    }
    pattern.validate();
  }

  EmimConfig effective_emim() const {
    EmimConfig cfg = emim;
    cfg.heads = heads;
    if (mechanism == Mechanism::non_sliding) cfg.sampling = Sampling::non_sliding;
    return cfg;
  }
};

// ---------------------------------------------------------------------------
// patch_embed: non-overlapping patches, flattened and linearly projected.
// No temporal downsampling.

inline Tensor extract_patches(const Tensor& clip, int patch) {
  if (clip.rank() != 4) {
    throw DimensionError("patch_embed expects a T x H x W x ch clip, got " +
                         shape_str(clip.shape()));
  }
  const int T = static_cast<int>(clip.extent(0));
  const int hp = static_cast<int>(clip.extent(1));
  const int wp = static_cast<int>(clip.extent(2));
  const int ch = static_cast<int>(clip.extent(3));
  if (patch < 1 || hp % patch != 0 || wp % patch != 0) {
    throw ConfigError("pixel extents " + std::to_string(hp) + "x" + std::to_string(wp) +
                      " not divisible by patch size " + std::to_string(patch));
  }
  const int ht = hp / patch, wt = wp / patch;
  const int flat = patch * patch * ch;
  Tensor patches({static_cast<std::size_t>(T), static_cast<std::size_t>(ht),
                  static_cast<std::size_t>(wt), static_cast<std::size_t>(flat)});
  for (int t = 0; t < T; ++t)
    for (int x = 0; x < ht; ++x)
      for (int y = 0; y < wt; ++y) {
        double* dst = patches.data() + patches.flat_index(t, x, y, 0);
        for (int a = 0; a < patch; ++a)
          for (int b = 0; b < patch; ++b)
            for (int c = 0; c < ch; ++c)
              dst[(a * patch + b) * ch + c] = clip.at(t, x * patch + a, y * patch + b, c);
      }
  return patches;
}

inline TokenVolume patch_embed(const Tensor& clip, int patch, const LinearParams& proj) {
  const Tensor patches = extract_patches(clip, patch);
  if (proj.in_dim() != patches.extent(3)) {
    throw ConfigError("patch projection expects " + std::to_string(proj.in_dim()) +
                      " inputs, patches have " + std::to_string(patches.extent(3)));
  }
  return TokenVolume(linear_forward(patches, proj));
}

// ---------------------------------------------------------------------------
// Blocks.

struct FfnParams {
  LinearParams fc1;
  LinearParams fc2;
};

struct BlockParams {
  char kind = 'O';       // pattern letter this block realizes
  bool use_emim = false;  // resolved attention implementation
  LayerNormParams ln1, ln2;
  EmimParams emim;             // populated when use_emim
  GlobalAttnParams global_attn;  // populated otherwise
  FfnParams ffn;
};

struct BlockSaved {
  TokenVolume z_in;
  LayerNormSaved ln1, ln2;
  EmimSaved emim;
  GlobalSaved global_attn;
  TokenVolume y;    // z + attention output
  Tensor ln2_out;   // FFN input
  Tensor ffn_pre;   // hidden, pre-gelu
  Tensor ffn_act;   // hidden, post-gelu
};

inline TokenVolume block_forward(const TokenVolume& z, BlockParams& p, const ModelConfig& cfg,
                                 BlockSaved* saved) {
  if ((p.kind != 'O' && p.kind != 'E') || (p.use_emim && p.emim.q.weight.empty()) ||
      (!p.use_emim && p.global_attn.q.weight.empty())) {
    throw ConfigError("block kind/params mismatch (kind " + std::string(1, p.kind) + ")");
  }
  Tensor a_in = layernorm_rows(z.values(), p.ln1, saved ? &saved->ln1 : nullptr);
  TokenVolume attn_out;
  if (p.use_emim) {
    attn_out = emim_forward(TokenVolume(std::move(a_in)), p.emim, cfg.effective_emim(),
                            cfg.motion_enabled, saved ? &saved->emim : nullptr);
  } else {
    attn_out = global_attention_forward(TokenVolume(std::move(a_in)), p.global_attn, cfg.heads,
                                        saved ? &saved->global_attn : nullptr);
  }
  TokenVolume y(z.values());
  y.values() += attn_out.values();

  Tensor f_in = layernorm_rows(y.values(), p.ln2, saved ? &saved->ln2 : nullptr);
  Tensor pre = linear_forward(f_in, p.ffn.fc1);
  Tensor act = gelu_forward(pre);
  Tensor f = linear_forward(act, p.ffn.fc2);

  TokenVolume out(y.values());
  out.values() += f;
  if (saved) {
    saved->z_in = z;
    saved->y = std::move(y);
    saved->ln2_out = std::move(f_in);
    saved->ffn_pre = std::move(pre);
    saved->ffn_act = std::move(act);
  }
  return out;
}

inline TokenVolume block_backward(const TokenVolume& dout, BlockSaved& saved, BlockParams& p,
                                  const ModelConfig& cfg) {
  // FFN sub-layer.
  Tensor dact = linear_backward(saved.ffn_act, p.ffn.fc2, dout.values());
  Tensor dpre = gelu_backward(saved.ffn_pre, dact);
  Tensor dln2 = linear_backward(saved.ln2_out, p.ffn.fc1, dpre);
  Tensor dy = layernorm_backward_rows(dln2, saved.ln2, p.ln2);
  dy += dout.values();

  // Attention sub-layer.
  TokenVolume dy_vol(std::move(dy));
  TokenVolume dattn_in;
  if (p.use_emim) {
    dattn_in = emim_backward(dy_vol, saved.emim, p.emim);
  } else {
    dattn_in = global_attention_backward(dy_vol, saved.global_attn, p.global_attn);
  }
  (void)cfg;
  Tensor dz = layernorm_backward_rows(dattn_in.values(), saved.ln1, p.ln1);
  dz += dy_vol.values();
  return TokenVolume(std::move(dz));
}

// ---------------------------------------------------------------------------
// Stack.

struct Model {
  ModelConfig cfg;
  LinearParams embed;  // patch^2 * in_channels -> channels
  std::vector<BlockParams> blocks;
  LinearParams head;   // channels -> num_classes
};

inline Model build_stack(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Model m;
  m.cfg = cfg;
  Rng rng(seed);
  const auto d = static_cast<std::size_t>(cfg.channels);
  m.embed = make_linear(static_cast<std::size_t>(cfg.patch) * cfg.patch * cfg.in_channels, d, rng);
  const EmimConfig ecfg = cfg.effective_emim();
  for (int i = 0; i < cfg.depth; ++i) {
    BlockParams b;
    b.kind = cfg.pattern.kind_at(i);
    b.use_emim = (b.kind == 'E') && cfg.mechanism != Mechanism::global;
    b.ln1 = make_layernorm(d);
    b.ln2 = make_layernorm(d);
    if (b.use_emim) {
      b.emim = make_emim_params(cfg.channels, ecfg, rng);
    } else {
      b.global_attn = make_global_params(cfg.channels, rng);
    }
    b.ffn.fc1 = make_linear(d, d * static_cast<std::size_t>(cfg.ffn_expansion), rng);
    b.ffn.fc2 = make_linear(d * static_cast<std::size_t>(cfg.ffn_expansion), d, rng);
    m.blocks.push_back(std::move(b));
  }
  m.head = make_linear(d, static_cast<std::size_t>(cfg.num_classes), rng);
  if (!cfg.motion_enabled) {
    // Frozen-zero motion path for the ablation.
    for (BlockParams& b : m.blocks) {
      if (b.use_emim) {
        b.emim.motion.fc1.weight.fill(0.0);
        b.emim.motion.fc1.bias.fill(0.0);
        b.emim.motion.fc2.weight.fill(0.0);
        b.emim.motion.fc2.bias.fill(0.0);
      }
    }
  }
  return m;
}

inline std::vector<char> block_kinds(const Model& m) {
  std::vector<char> kinds;
  for (const BlockParams& b : m.blocks) kinds.push_back(b.kind);
  return kinds;
}

struct ModelSaved {
  Tensor patches;
  std::vector<BlockSaved> blocks;
  Tensor pooled;  // mean over tokens
};

inline Tensor model_forward(Model& m, const Tensor& clip, ModelSaved* saved) {
  const Tensor patches = extract_patches(clip, m.cfg.patch);
  TokenVolume vol(linear_forward(patches, m.embed));
  if (saved) {
    saved->patches = patches;
    saved->blocks.resize(m.blocks.size());
  }
  for (std::size_t i = 0; i < m.blocks.size(); ++i) {
    vol = block_forward(vol, m.blocks[i], m.cfg, saved ? &saved->blocks[i] : nullptr);
  }
  const int n = vol.tokens();
  const int d = vol.channels();
  Tensor pooled({static_cast<std::size_t>(d)});
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    const double* row = vol.values().data() + static_cast<std::size_t>(i) * d;
    for (int c = 0; c < d; ++c) pooled[c] += row[c];
  }
  pooled *= inv_n;
  Tensor logits = linear_forward(pooled, m.head);
  if (saved) saved->pooled = std::move(pooled);
  return logits;
}

// Accumulates parameter gradients; input gradients stop at the patch
// projection (clips are data, not parameters).
inline void model_backward(Model& m, const Tensor& dlogits, ModelSaved& saved) {
  Tensor dpooled = linear_backward(saved.pooled, m.head, dlogits);
  const BlockSaved& last = saved.blocks.back();
  const Tensor& out_shape_ref =
      saved.blocks.empty() ? saved.patches : last.y;  // shape source for the token grad
  (void)out_shape_ref;
  const int d = m.cfg.channels;
  // The pooled vector spreads back uniformly over tokens.
  const TokenVolume& top = saved.blocks.back().y;  // same extents as the final volume
  const int n = top.tokens();
  Tensor dtokens(top.values().shape());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    double* row = dtokens.data() + static_cast<std::size_t>(i) * d;
    for (int c = 0; c < d; ++c) row[c] = dpooled[c] * inv_n;
  }
  TokenVolume dvol(std::move(dtokens));
  for (std::size_t i = m.blocks.size(); i-- > 0;) {
    dvol = block_backward(dvol, saved.blocks[i], m.blocks[i], m.cfg);
  }
  linear_backward(saved.patches, m.embed, dvol.values());
}

// ---------------------------------------------------------------------------
// Parameter registry: stable names, used for checkpoints and gradient checks.

struct ParamRef {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

inline void collect_linear(std::vector<ParamRef>& out, const std::string& prefix,
                           LinearParams& p) {
  out.push_back({prefix + ".weight", &p.weight, &p.grad_weight});
  out.push_back({prefix + ".bias", &p.bias, &p.grad_bias});
}

inline std::vector<ParamRef> emim_parameters(EmimParams& p, const std::string& prefix) {
  std::vector<ParamRef> out;
  collect_linear(out, prefix + ".q", p.q);
  collect_linear(out, prefix + ".k", p.k);
  collect_linear(out, prefix + ".v", p.v);
  collect_linear(out, prefix + ".out", p.out);
  out.push_back({prefix + ".bias_table", &p.bias.table, &p.bias.grad});
  collect_linear(out, prefix + ".motion.fc1", p.motion.fc1);
  collect_linear(out, prefix + ".motion.fc2", p.motion.fc2);
  return out;
}

inline std::vector<ParamRef> global_parameters(GlobalAttnParams& p, const std::string& prefix) {
  std::vector<ParamRef> out;
  collect_linear(out, prefix + ".q", p.q);
  collect_linear(out, prefix + ".k", p.k);
  collect_linear(out, prefix + ".v", p.v);
  collect_linear(out, prefix + ".out", p.out);
  return out;
}

inline std::vector<ParamRef> model_parameters(Model& m) {
  std::vector<ParamRef> out;
  collect_linear(out, "patch_embed", m.embed);
  for (std::size_t i = 0; i < m.blocks.size(); ++i) {
    BlockParams& b = m.blocks[i];
    const std::string prefix = "blocks." + std::to_string(i);
    out.push_back({prefix + ".ln1.gamma", &b.ln1.gamma, &b.ln1.grad_gamma});
    out.push_back({prefix + ".ln1.beta", &b.ln1.beta, &b.ln1.grad_beta});
    std::vector<ParamRef> attn = b.use_emim ? emim_parameters(b.emim, prefix + ".attn")
                                            : global_parameters(b.global_attn, prefix + ".attn");
    out.insert(out.end(), attn.begin(), attn.end());
    out.push_back({prefix + ".ln2.gamma", &b.ln2.gamma, &b.ln2.grad_gamma});
    out.push_back({prefix + ".ln2.beta", &b.ln2.beta, &b.ln2.grad_beta});
    collect_linear(out, prefix + ".ffn.fc1", b.ffn.fc1);
    collect_linear(out, prefix + ".ffn.fc2", b.ffn.fc2);
  }
  collect_linear(out, "head", m.head);
  return out;
}

inline void zero_grads(std::vector<ParamRef>& params) {
  for (ParamRef& p : params) p.grad->fill(0.0);
}

}  // namespace emim
