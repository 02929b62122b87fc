#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "emim/error.hpp"
#include "emim/tensor.hpp"

// Forward and backward passes for every primitive the mechanism needs.
// Reduction order is fixed everywhere (ascending over the contracted axis)
// so optimized and naive code paths produce bit-identical sums.

namespace emim {

// ---------------------------------------------------------------------------
// matmul

// C[i,:] += A[i,k] * B[k,:], k ascending. Per-element accumulation order is
// identical to the scalar triple loop, while the inner axpy stays vectorizable.
inline void matmul_acc(const double* a, const double* b, double* c, std::size_t m,
                       std::size_t k_len, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k_len;
    double* crow = c + i * n;
    for (std::size_t k = 0; k < k_len; ++k) {
      const double av = arow[k];
      const double* brow = b + k * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  Tensor c({a.extent(0), b.extent(1)});
  matmul_acc(a.data(), b.data(), c.data(), a.extent(0), a.extent(1), b.extent(1));
  return c;
}

inline Tensor transpose2d(const Tensor& a) {
  if (a.rank() != 2) throw DimensionError("transpose2d: rank != 2, shape " + shape_str(a.shape()));
  const std::size_t m = a.extent(0), n = a.extent(1);
  Tensor t({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) t[j * m + i] = a[i * n + j];
  return t;
}

struct MatmulGrads {
  Tensor a;
  Tensor b;
};

inline MatmulGrads matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dc) {
  if (dc.rank() != 2 || dc.extent(0) != a.extent(0) || dc.extent(1) != b.extent(1)) {
    throw DimensionError("matmul_backward: upstream shape " + shape_str(dc.shape()) +
                         " does not match product of " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  }
  MatmulGrads g{Tensor(a.shape()), Tensor(b.shape())};
  // dA = dC * B^T
  const std::size_t m = a.extent(0), k_len = a.extent(1), n = b.extent(1);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < k_len; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += dc[i * n + j] * b[k * n + j];
      g.a[i * k_len + k] = acc;
    }
  // dB = A^T * dC
  for (std::size_t k = 0; k < k_len; ++k)
    for (std::size_t i = 0; i < m; ++i) {
      const double av = a[i * k_len + k];
      for (std::size_t j = 0; j < n; ++j) g.b[k * n + j] += av * dc[i * n + j];
    }
  return g;
}

// ---------------------------------------------------------------------------
// softmax

inline void softmax_row_inplace(const double* x, double* y, std::size_t n) {
  double mx = x[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::exp(x[i] - mx);
    sum += y[i];
  }
  const double inv = 1.0 / sum;
  for (std::size_t i = 0; i < n; ++i) y[i] *= inv;
}

inline std::vector<double> softmax_row(const std::vector<double>& x) {
  if (x.empty()) throw DimensionError("softmax_row: empty vector");
  std::vector<double> y(x.size());
  softmax_row_inplace(x.data(), y.data(), x.size());
  return y;
}

// Softmax over the trailing axis, all other axes independent.
inline Tensor softmax_rows(const Tensor& x) {
  if (x.rank() == 0 || x.size() == 0) throw DimensionError("softmax_rows: empty tensor");
  const std::size_t n = x.extent(x.rank() - 1);
  Tensor y(x.shape());
  for (std::size_t r = 0; r < x.size() / n; ++r)
    softmax_row_inplace(x.data() + r * n, y.data() + r * n, n);
  return y;
}

// dx_i = y_i * (dy_i - sum_j dy_j y_j), with y the softmax output.
inline void softmax_backward_row(const double* y, const double* dy, double* dx, std::size_t n) {
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += dy[i] * y[i];
  for (std::size_t i = 0; i < n; ++i) dx[i] = y[i] * (dy[i] - dot);
}

inline Tensor softmax_backward_rows(const Tensor& y, const Tensor& dy) {
  y.require_same_shape(dy, "softmax_backward_rows");
  const std::size_t n = y.extent(y.rank() - 1);
  Tensor dx(y.shape());
  for (std::size_t r = 0; r < y.size() / n; ++r)
    softmax_backward_row(y.data() + r * n, dy.data() + r * n, dx.data() + r * n, n);
  return dx;
}

// ---------------------------------------------------------------------------
// gelu (tanh approximation, fixed constants)

inline constexpr double kGeluCubicCoef = 0.044715;

inline double gelu(double x) {
  const double c = std::numbers::sqrt2 / std::sqrt(std::numbers::pi);  // sqrt(2/pi)
  const double u = c * (x + kGeluCubicCoef * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

inline double gelu_grad(double x) {
  const double c = std::numbers::sqrt2 / std::sqrt(std::numbers::pi);
  const double u = c * (x + kGeluCubicCoef * x * x * x);
  const double t = std::tanh(u);
  const double du = c * (1.0 + 3.0 * kGeluCubicCoef * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

inline Tensor gelu_forward(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = gelu(x[i]);
  return y;
}

// x is the forward *input*.
inline Tensor gelu_backward(const Tensor& x, const Tensor& dy) {
  x.require_same_shape(dy, "gelu_backward");
  Tensor dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = dy[i] * gelu_grad(x[i]);
  return dx;
}

// ---------------------------------------------------------------------------
// layernorm

inline constexpr double kLayerNormEps = 1e-6;

struct LayerNormParams {
  Tensor gamma;
  Tensor beta;
  Tensor grad_gamma;
  Tensor grad_beta;
};

inline LayerNormParams make_layernorm(std::size_t n) {
  LayerNormParams p;
  p.gamma = Tensor({n}, 1.0);
  p.beta = Tensor({n}, 0.0);
  p.grad_gamma = Tensor({n}, 0.0);
  p.grad_beta = Tensor({n}, 0.0);
  return p;
}

// Saved per-row normalization state for the backward pass.
struct LayerNormSaved {
  Tensor xhat;     // same shape as input
  Tensor inv_std;  // one per row
};

inline void layernorm_row(const double* x, const double* gamma, const double* beta,
                          std::size_t n, double eps, double* y, double* xhat_out,
                          double* inv_std_out) {
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += x[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / std::sqrt(var + eps);
  for (std::size_t i = 0; i < n; ++i) {
    const double xh = (x[i] - mean) * inv_std;
    if (xhat_out) xhat_out[i] = xh;
    y[i] = gamma[i] * xh + beta[i];
  }
  if (inv_std_out) *inv_std_out = inv_std;
}

inline std::vector<double> layernorm(const std::vector<double>& x, const std::vector<double>& gamma,
                                     const std::vector<double>& beta, double eps = kLayerNormEps) {
  if (x.empty()) throw DimensionError("layernorm: empty vector");
  if (gamma.size() != x.size() || beta.size() != x.size()) {
    throw DimensionError("layernorm: gamma/beta length does not match input length " +
                         std::to_string(x.size()));
  }
  std::vector<double> y(x.size());
  layernorm_row(x.data(), gamma.data(), beta.data(), x.size(), eps, y.data(), nullptr, nullptr);
  return y;
}

// Layernorm over the trailing axis of a tensor.
inline Tensor layernorm_rows(const Tensor& x, const LayerNormParams& p, LayerNormSaved* saved) {
  const std::size_t n = x.extent(x.rank() - 1);
  if (p.gamma.size() != n) {
    throw DimensionError("layernorm_rows: gamma size " + std::to_string(p.gamma.size()) +
                         " vs row length " + std::to_string(n));
  }
  const std::size_t rows = x.size() / n;
  Tensor y(x.shape());
  if (saved) {
    saved->xhat = Tensor(x.shape());
    saved->inv_std = Tensor({rows});
  }
  for (std::size_t r = 0; r < rows; ++r) {
    layernorm_row(x.data() + r * n, p.gamma.data(), p.beta.data(), n, kLayerNormEps,
                  y.data() + r * n, saved ? saved->xhat.data() + r * n : nullptr,
                  saved ? saved->inv_std.data() + r : nullptr);
  }
  return y;
}

// Accumulates gamma/beta gradients into p, returns dx.
inline Tensor layernorm_backward_rows(const Tensor& dy, const LayerNormSaved& saved,
                                      LayerNormParams& p) {
  const std::size_t n = p.gamma.size();
  const std::size_t rows = dy.size() / n;
  Tensor dx(dy.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* dyr = dy.data() + r * n;
    const double* xh = saved.xhat.data() + r * n;
    const double inv_std = saved.inv_std[r];
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p.grad_gamma[i] += dyr[i] * xh[i];
      p.grad_beta[i] += dyr[i];
      const double dxh = dyr[i] * p.gamma[i];
      mean_dxhat += dxh;
      mean_dxhat_xhat += dxh * xh[i];
    }
    mean_dxhat /= static_cast<double>(n);
    mean_dxhat_xhat /= static_cast<double>(n);
    double* dxr = dx.data() + r * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double dxh = dyr[i] * p.gamma[i];
      dxr[i] = inv_std * (dxh - mean_dxhat - xh[i] * mean_dxhat_xhat);
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// linear

struct LinearParams {
  Tensor weight;  // out x in
  Tensor bias;    // out
  Tensor grad_weight;
  Tensor grad_bias;

  std::size_t in_dim() const { return weight.extent(1); }
  std::size_t out_dim() const { return weight.extent(0); }
};

inline LinearParams make_linear(std::size_t in, std::size_t out, Rng& rng) {
  LinearParams p;
  const double s = std::sqrt(6.0 / static_cast<double>(in + out));
  p.weight = random_uniform({out, in}, rng, -s, s);
  p.bias = Tensor({out}, 0.0);
  p.grad_weight = Tensor({out, in}, 0.0);
  p.grad_bias = Tensor({out}, 0.0);
  return p;
}

inline LinearParams make_linear_zero(std::size_t in, std::size_t out) {
  LinearParams p;
  p.weight = Tensor({out, in}, 0.0);
  p.bias = Tensor({out}, 0.0);
  p.grad_weight = Tensor({out, in}, 0.0);
  p.grad_bias = Tensor({out}, 0.0);
  return p;
}

// y[r,:] = bias + x[r,:] W^T over the trailing axis; leading axes pass through.
inline Tensor linear_forward(const Tensor& x, const LinearParams& p) {
  const std::size_t in = p.in_dim(), out = p.out_dim();
  if (x.rank() == 0 || x.extent(x.rank() - 1) != in) {
    throw DimensionError("linear_forward: input shape " + shape_str(x.shape()) +
                         " vs weight " + shape_str(p.weight.shape()));
  }
  std::vector<std::size_t> yshape = x.shape();
  yshape.back() = out;
  Tensor y(std::move(yshape));
  const std::size_t rows = x.size() / in;
  const Tensor wt = transpose2d(p.weight);  // in x out, contiguous for the axpy loop
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * in;
    double* yr = y.data() + r * out;
    for (std::size_t j = 0; j < out; ++j) yr[j] = p.bias[j];
    for (std::size_t k = 0; k < in; ++k) {
      const double xv = xr[k];
      const double* wrow = wt.data() + k * out;
      for (std::size_t j = 0; j < out; ++j) yr[j] += xv * wrow[j];
    }
  }
  return y;
}

// Accumulates weight/bias gradients into p, returns dx. x is the forward input.
inline Tensor linear_backward(const Tensor& x, const LinearParams& p, const Tensor& dy) {
  const std::size_t in = p.in_dim(), out = p.out_dim();
  if (dy.extent(dy.rank() - 1) != out || dy.size() / out != x.size() / in) {
    throw DimensionError("linear_backward: upstream shape " + shape_str(dy.shape()) +
                         " vs input " + shape_str(x.shape()) + " and weight " +
                         shape_str(p.weight.shape()));
  }
  const std::size_t rows = x.size() / in;
  Tensor dx(x.shape());
  // dx[r,:] = dy[r,:] W  (j ascending per element)
  for (std::size_t r = 0; r < rows; ++r) {
    const double* dyr = dy.data() + r * out;
    double* dxr = dx.data() + r * in;
    for (std::size_t j = 0; j < out; ++j) {
      const double g = dyr[j];
      const double* wrow = p.weight.data() + j * in;
      for (std::size_t k = 0; k < in; ++k) dxr[k] += g * wrow[k];
    }
  }
  // dW[j,:] += sum_r dy[r,j] x[r,:]; db[j] += sum_r dy[r,j]  (r ascending)
  for (std::size_t r = 0; r < rows; ++r) {
    const double* dyr = dy.data() + r * out;
    const double* xr = x.data() + r * in;
    for (std::size_t j = 0; j < out; ++j) {
      const double g = dyr[j];
      double* wrow = p.grad_weight.data() + j * in;
      for (std::size_t k = 0; k < in; ++k) wrow[k] += g * xr[k];
    }
    for (std::size_t j = 0; j < out; ++j) p.grad_bias[j] += dyr[j];
  }
  return dx;
}

}  // namespace emim
