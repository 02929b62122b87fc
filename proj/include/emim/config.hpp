#pragma once

#include <cstdio>
#include <map>
#include <sstream>
#include <string>

#include "emim/error.hpp"

namespace emim {

enum class Sampling { sliding, non_sliding };
enum class Boundary { pad_constant, clamp_edge };

inline std::string to_string(Sampling s) {
  return s == Sampling::sliding ? "sliding" : "non_sliding";
}
inline std::string to_string(Boundary b) {
  return b == Boundary::pad_constant ? "pad_constant" : "clamp_edge";
}

inline Sampling sampling_from_string(const std::string& s) {
  if (s == "sliding") return Sampling::sliding;
  if (s == "non_sliding") return Sampling::non_sliding;
  throw ConfigError("unknown sampling mode '" + s + "' (expected sliding|non_sliding)");
}
inline Boundary boundary_from_string(const std::string& s) {
  if (s == "pad_constant") return Boundary::pad_constant;
  if (s == "clamp_edge") return Boundary::clamp_edge;
  throw ConfigError("unknown boundary mode '" + s + "' (expected pad_constant|clamp_edge)");
}

// Hyperparameters of the windowed cross-frame attention mechanism.
// Defaults: 7x7 window (radius 3), interval 1. The last frame always clamps
// to itself: keys/values for frame t come from frame t when t+interval is
// past the end of the clip.
struct EmimConfig {
  int radius = 3;    // window is (2*radius+1)^2
  int interval = 1;  // temporal gap to the source frame
  int heads = 1;
  Sampling sampling = Sampling::sliding;
  Boundary boundary = Boundary::pad_constant;
  double pad_value = 1e-6;
  bool bias_enabled = true;

  int window_side() const { return 2 * radius + 1; }
  int window_area() const { return window_side() * window_side(); }

  void validate_window(int h, int w) const {
    if (radius < 0) throw ConfigError("radius must be nonnegative, got " + std::to_string(radius));
    if (interval < 1) throw ConfigError("interval must be positive, got " + std::to_string(interval));
    if (heads < 1) throw ConfigError("heads must be positive, got " + std::to_string(heads));
    if (window_side() > h || window_side() > w) {
      throw ConfigError("window " + std::to_string(window_side()) + "x" +
                        std::to_string(window_side()) + " exceeds spatial extent " +
                        std::to_string(h) + "x" + std::to_string(w));
    }
  }

  void validate(int h, int w, int channels) const {
    validate_window(h, w);
    if (channels % heads != 0) {
      throw ConfigError("channels " + std::to_string(channels) + " not divisible by heads " +
                        std::to_string(heads));
    }
  }
};

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Flat key-value text document, one `key = value` per line.
inline std::string serialize_config(const EmimConfig& cfg) {
  std::ostringstream os;
  os << "radius = " << cfg.radius << "\n";
  os << "interval = " << cfg.interval << "\n";
  os << "heads = " << cfg.heads << "\n";
  os << "sampling = " << to_string(cfg.sampling) << "\n";
  os << "boundary = " << to_string(cfg.boundary) << "\n";
  os << "pad_value = " << format_double(cfg.pad_value) << "\n";
  os << "bias_enabled = " << (cfg.bias_enabled ? "true" : "false") << "\n";
  return os.str();
}

inline EmimConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  const char* required[] = {"radius",   "interval",  "heads",       "sampling",
                            "boundary", "pad_value", "bias_enabled"};
  for (const char* key : required) {
    if (!kv.count(key)) throw ConfigError(std::string("config missing key: ") + key);
  }
  EmimConfig cfg;
  cfg.radius = std::stoi(kv["radius"]);
  cfg.interval = std::stoi(kv["interval"]);
  cfg.heads = std::stoi(kv["heads"]);
  cfg.sampling = sampling_from_string(kv["sampling"]);
  cfg.boundary = boundary_from_string(kv["boundary"]);
  cfg.pad_value = std::stod(kv["pad_value"]);
  if (kv["bias_enabled"] == "true") {
    cfg.bias_enabled = true;
  } else if (kv["bias_enabled"] == "false") {
    cfg.bias_enabled = false;
  } else {
    throw ConfigError("bias_enabled must be true|false, got '" + kv["bias_enabled"] + "'");
  }
  return cfg;
}

}  // namespace emim
