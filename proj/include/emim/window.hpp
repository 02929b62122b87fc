#pragma once

#include <cstddef>
#include <string>

#include "emim/config.hpp"
#include "emim/error.hpp"
#include "emim/tensor.hpp"

namespace emim {

// Dense rank-4 value field: frames x height x width x channels.
class TokenVolume {
 public:
  TokenVolume() = default;

  explicit TokenVolume(Tensor values) : values_(std::move(values)) {
    if (values_.rank() != 4) {
      throw DimensionError("TokenVolume expects rank-4 values, got shape " +
                           shape_str(values_.shape()));
    }
  }

  static TokenVolume zeros(int t, int h, int w, int d) {
    return TokenVolume(Tensor({static_cast<std::size_t>(t), static_cast<std::size_t>(h),
                               static_cast<std::size_t>(w), static_cast<std::size_t>(d)}));
  }

  int frames() const { return static_cast<int>(values_.extent(0)); }
  int height() const { return static_cast<int>(values_.extent(1)); }
  int width() const { return static_cast<int>(values_.extent(2)); }
  int channels() const { return static_cast<int>(values_.extent(3)); }
  int tokens() const { return frames() * height() * width(); }

  double* token(int t, int x, int y) {
    return values_.data() + values_.flat_index(t, x, y, 0);
  }
  const double* token(int t, int x, int y) const {
    return values_.data() + values_.flat_index(t, x, y, 0);
  }

  Tensor& values() { return values_; }
  const Tensor& values() const { return values_; }

 private:
  Tensor values_;
};

// ---------------------------------------------------------------------------
// Window geometry. Slot order is fixed raster order: dx outer, dy inner, so
// slot w maps to offsets (w / side - radius, w % side - radius).

inline int slot_dx(int w, const EmimConfig& cfg) { return w / cfg.window_side() - cfg.radius; }
inline int slot_dy(int w, const EmimConfig& cfg) { return w % cfg.window_side() - cfg.radius; }
inline int offset_to_slot(int dx, int dy, const EmimConfig& cfg) {
  return (dx + cfg.radius) * cfg.window_side() + (dy + cfg.radius);
}

// Keys/values for frame t come from t+interval; past the end of the clip the
// frame clamps to itself.
inline int source_frame(int t, int frames, const EmimConfig& cfg) {
  const int s = t + cfg.interval;
  return s < frames ? s : t;
}

// Spatial anchor of the window. Sliding windows center on the query itself;
// non-sliding windows share one frame-center anchor for every query.
inline void window_anchor(const EmimConfig& cfg, int h, int w, int x, int y, int* ax, int* ay) {
  if (cfg.sampling == Sampling::sliding) {
    *ax = x;
    *ay = y;
  } else {
    *ax = (h - 1) / 2;
    *ay = (w - 1) / 2;
  }
}

struct SlotSource {
  bool padded;  // true only under pad_constant when the slot fell outside the frame
  int t, x, y;  // valid source coordinates when !padded
};

inline SlotSource slot_source(const EmimConfig& cfg, int frames, int h, int w, int t, int x,
                              int y, int slot) {
  int ax, ay;
  window_anchor(cfg, h, w, x, y, &ax, &ay);
  int sx = ax + slot_dx(slot, cfg);
  int sy = ay + slot_dy(slot, cfg);
  const int st = source_frame(t, frames, cfg);
  if (sx < 0 || sx >= h || sy < 0 || sy >= w) {
    if (cfg.boundary == Boundary::pad_constant) return {true, st, sx, sy};
    sx = sx < 0 ? 0 : (sx >= h ? h - 1 : sx);
    sy = sy < 0 ? 0 : (sy >= w ? w - 1 : sy);
  }
  return {false, st, sx, sy};
}

// Materializes the (2P+1)^2 x d window of source tokens for one query, in
// slot order. Padded slots are filled with cfg.pad_value in every channel.
inline Tensor sample_window(const TokenVolume& vol, int t, int x, int y, const EmimConfig& cfg) {
  cfg.validate_window(vol.height(), vol.width());
  if (t < 0 || t >= vol.frames() || x < 0 || x >= vol.height() || y < 0 || y >= vol.width()) {
    throw DimensionError("sample_window: query index (" + std::to_string(t) + "," +
                         std::to_string(x) + "," + std::to_string(y) + ") out of range for " +
                         shape_str(vol.values().shape()));
  }
  const int area = cfg.window_area();
  const int d = vol.channels();
  Tensor out({static_cast<std::size_t>(area), static_cast<std::size_t>(d)});
  for (int slot = 0; slot < area; ++slot) {
    double* row = out.data() + static_cast<std::size_t>(slot) * d;
    const SlotSource src = slot_source(cfg, vol.frames(), vol.height(), vol.width(), t, x, y, slot);
    if (src.padded) {
      for (int c = 0; c < d; ++c) row[c] = cfg.pad_value;
    } else {
      const double* tok = vol.token(src.t, src.x, src.y);
      for (int c = 0; c < d; ++c) row[c] = tok[c];
    }
  }
  return out;
}

}  // namespace emim
