#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "eeg2shape/tensor.hpp"

namespace e2s {

enum class Padding { Same, Valid };

struct Stride {
  int h = 1;
  int w = 1;
};

// Argmax positions recorded by maxpool2d, one (row, col) per output cell,
// row-major over [Hout, Wout, C].
struct PoolSwitches {
  std::vector<int> in_dims;
  std::vector<int> out_dims;
  std::vector<std::int32_t> rows;
  std::vector<std::int32_t> cols;
};

namespace detail {

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

struct ConvGeometry {
  int out_h, out_w, pad_top, pad_left;
};

inline ConvGeometry conv_geometry(int h, int w, int kh, int kw, Stride stride, Padding padding) {
  if (stride.h < 1 || stride.w < 1) throw shape_error("conv2d stride components must be >= 1");
  ConvGeometry g{};
  if (padding == Padding::Same) {
    g.out_h = ceil_div(h, stride.h);
    g.out_w = ceil_div(w, stride.w);
    g.pad_top = std::max((g.out_h - 1) * stride.h + kh - h, 0) / 2;
    g.pad_left = std::max((g.out_w - 1) * stride.w + kw - w, 0) / 2;
  } else {
    if (kh > h || kw > w) {
      throw shape_error("conv2d VALID kernel exceeds input: kernel [" + std::to_string(kh) + "," +
                        std::to_string(kw) + "] input [" + std::to_string(h) + "," +
                        std::to_string(w) + "]");
    }
    g.out_h = (h - kh) / stride.h + 1;
    g.out_w = (w - kw) / stride.w + 1;
    g.pad_top = 0;
    g.pad_left = 0;
  }
  return g;
}

template <typename T>
void check_conv_args(const TensorT<T>& input, const TensorT<T>& kernels, const TensorT<T>& bias) {
  if (input.rank() != 3) throw shape_error("conv2d input must be rank 3 [H,W,Cin]");
  if (kernels.rank() != 4) throw shape_error("conv2d kernels must be rank 4 [kh,kw,Cin,Cout]");
  if (kernels.dims[2] != input.dims[2]) {
    throw shape_error("conv2d channel mismatch: input Cin=" + std::to_string(input.dims[2]) +
                      " kernels Cin=" + std::to_string(kernels.dims[2]));
  }
  if (bias.rank() != 1 || bias.dims[0] != kernels.dims[3]) {
    throw shape_error("conv2d bias must be rank 1 [Cout]");
  }
}

}  // namespace detail

// 2-d cross-correlation over channels-last data.
// input [H,W,Cin], kernels [kh,kw,Cin,Cout], bias [Cout] -> [Hout,Wout,Cout].
template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& kernels, const TensorT<T>& bias,
                  Stride stride = {1, 1}, Padding padding = Padding::Same) {
  detail::check_conv_args(input, kernels, bias);
  const int h = input.dims[0], w = input.dims[1], cin = input.dims[2];
  const int kh = kernels.dims[0], kw = kernels.dims[1], cout = kernels.dims[3];
  const auto g = detail::conv_geometry(h, w, kh, kw, stride, padding);

  TensorT<T> out({g.out_h, g.out_w, cout});
  const T* in = input.data.data();
  const T* ker = kernels.data.data();
  for (int oy = 0; oy < g.out_h; ++oy) {
    for (int ox = 0; ox < g.out_w; ++ox) {
      T* acc = &out.data[(static_cast<std::size_t>(oy) * g.out_w + ox) * cout];
      for (int co = 0; co < cout; ++co) acc[co] = bias[co];
      const int y0 = oy * stride.h - g.pad_top;
      const int x0 = ox * stride.w - g.pad_left;
      for (int dy = 0; dy < kh; ++dy) {
        const int iy = y0 + dy;
        if (iy < 0 || iy >= h) continue;
        for (int dx = 0; dx < kw; ++dx) {
          const int ix = x0 + dx;
          if (ix < 0 || ix >= w) continue;
          const T* ip = &in[(static_cast<std::size_t>(iy) * w + ix) * cin];
          const T* kp = &ker[(static_cast<std::size_t>(dy) * kw + dx) * cin * cout];
          for (int ci = 0; ci < cin; ++ci) {
            const T v = ip[ci];
            const T* kr = kp + static_cast<std::size_t>(ci) * cout;
            for (int co = 0; co < cout; ++co) acc[co] += v * kr[co];
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
struct Conv2dGrads {
  TensorT<T> input;
  TensorT<T> kernels;
  TensorT<T> bias;
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const TensorT<T>& input, const TensorT<T>& kernels,
                               const TensorT<T>& d_out, Stride stride = {1, 1},
                               Padding padding = Padding::Same) {
  const int h = input.dims[0], w = input.dims[1], cin = input.dims[2];
  const int kh = kernels.dims[0], kw = kernels.dims[1], cout = kernels.dims[3];
  const auto g = detail::conv_geometry(h, w, kh, kw, stride, padding);
  if (d_out.dims != std::vector<int>{g.out_h, g.out_w, cout}) {
    throw shape_error("conv2d_backward d_out dims mismatch");
  }

  Conv2dGrads<T> grads{TensorT<T>(input.dims), TensorT<T>(kernels.dims),
                       TensorT<T>({cout})};
  const T* in = input.data.data();
  const T* ker = kernels.data.data();
  T* din = grads.input.data.data();
  T* dker = grads.kernels.data.data();
  for (int oy = 0; oy < g.out_h; ++oy) {
    for (int ox = 0; ox < g.out_w; ++ox) {
      const T* dor = &d_out.data[(static_cast<std::size_t>(oy) * g.out_w + ox) * cout];
      for (int co = 0; co < cout; ++co) grads.bias[co] += dor[co];
      const int y0 = oy * stride.h - g.pad_top;
      const int x0 = ox * stride.w - g.pad_left;
      for (int dy = 0; dy < kh; ++dy) {
        const int iy = y0 + dy;
        if (iy < 0 || iy >= h) continue;
        for (int dx = 0; dx < kw; ++dx) {
          const int ix = x0 + dx;
          if (ix < 0 || ix >= w) continue;
          const std::size_t in_off = (static_cast<std::size_t>(iy) * w + ix) * cin;
          const std::size_t k_off = (static_cast<std::size_t>(dy) * kw + dx) * cin * cout;
          // Separate axpy and dot passes so each inner loop vectorizes.
          for (int ci = 0; ci < cin; ++ci) {
            const T v = in[in_off + ci];
            T* __restrict dkr = &dker[k_off + static_cast<std::size_t>(ci) * cout];
            for (int co = 0; co < cout; ++co) dkr[co] += v * dor[co];
          }
          for (int ci = 0; ci < cin; ++ci) {
            const T* __restrict kr = &ker[k_off + static_cast<std::size_t>(ci) * cout];
            T din_acc = T(0);
            for (int co = 0; co < cout; ++co) din_acc += kr[co] * dor[co];
            din[in_off + ci] += din_acc;
          }
        }
      }
    }
  }
  return grads;
}

// Input gradient only, for backprop paths that do not update the kernels.
template <typename T>
TensorT<T> conv2d_backward_input(const std::vector<int>& input_dims, const TensorT<T>& kernels,
                                 const TensorT<T>& d_out, Stride stride = {1, 1},
                                 Padding padding = Padding::Same) {
  const int h = input_dims[0], w = input_dims[1], cin = input_dims[2];
  const int kh = kernels.dims[0], kw = kernels.dims[1], cout = kernels.dims[3];
  const auto g = detail::conv_geometry(h, w, kh, kw, stride, padding);
  if (d_out.dims != std::vector<int>{g.out_h, g.out_w, cout}) {
    throw shape_error("conv2d_backward_input d_out dims mismatch");
  }
  TensorT<T> d_in(input_dims);
  const T* ker = kernels.data.data();
  T* din = d_in.data.data();
  for (int oy = 0; oy < g.out_h; ++oy) {
    for (int ox = 0; ox < g.out_w; ++ox) {
      const T* dor = &d_out.data[(static_cast<std::size_t>(oy) * g.out_w + ox) * cout];
      const int y0 = oy * stride.h - g.pad_top;
      const int x0 = ox * stride.w - g.pad_left;
      for (int dy = 0; dy < kh; ++dy) {
        const int iy = y0 + dy;
        if (iy < 0 || iy >= h) continue;
        for (int dx = 0; dx < kw; ++dx) {
          const int ix = x0 + dx;
          if (ix < 0 || ix >= w) continue;
          const std::size_t in_off = (static_cast<std::size_t>(iy) * w + ix) * cin;
          const std::size_t k_off = (static_cast<std::size_t>(dy) * kw + dx) * cin * cout;
          for (int ci = 0; ci < cin; ++ci) {
            const T* kr = &ker[k_off + static_cast<std::size_t>(ci) * cout];
            T acc = T(0);
            for (int co = 0; co < cout; ++co) acc += kr[co] * dor[co];
            din[in_off + ci] += acc;
          }
        }
      }
    }
  }
  return d_in;
}

// Ceil-mode max pooling; boundary windows are truncated. Ties go to the first
// element in row-major window order.
template <typename T>
std::pair<TensorT<T>, PoolSwitches> maxpool2d(const TensorT<T>& input, std::pair<int, int> window,
                                              Stride stride) {
  if (input.rank() != 3) throw shape_error("maxpool2d input must be rank 3 [H,W,C]");
  if (window.first < 1 || window.second < 1) throw shape_error("maxpool2d window must be >= 1");
  if (stride.h < 1 || stride.w < 1) throw shape_error("maxpool2d stride must be >= 1");
  const int h = input.dims[0], w = input.dims[1], c = input.dims[2];
  const int out_h = detail::ceil_div(h, stride.h);
  const int out_w = detail::ceil_div(w, stride.w);

  TensorT<T> out({out_h, out_w, c});
  PoolSwitches sw;
  sw.in_dims = input.dims;
  sw.out_dims = out.dims;
  sw.rows.resize(static_cast<std::size_t>(out.size()));
  sw.cols.resize(static_cast<std::size_t>(out.size()));

  for (int oy = 0; oy < out_h; ++oy) {
    const int y0 = oy * stride.h;
    const int y1 = std::min(y0 + window.first, h);
    for (int ox = 0; ox < out_w; ++ox) {
      const int x0 = ox * stride.w;
      const int x1 = std::min(x0 + window.second, w);
      for (int ch = 0; ch < c; ++ch) {
        T best = input.at3(y0, x0, ch);
        int br = y0, bc = x0;
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) {
            const T v = input.at3(y, x, ch);
            if (v > best) {
              best = v;
              br = y;
              bc = x;
            }
          }
        }
        const std::size_t idx = (static_cast<std::size_t>(oy) * out_w + ox) * c + ch;
        out.data[idx] = best;
        sw.rows[idx] = static_cast<std::int32_t>(br);
        sw.cols[idx] = static_cast<std::int32_t>(bc);
      }
    }
  }
  return {std::move(out), std::move(sw)};
}

// Routes each output-cell gradient back to its recorded argmax position.
template <typename T>
TensorT<T> maxpool2d_backward(const TensorT<T>& d_out, const PoolSwitches& sw) {
  if (d_out.dims != sw.out_dims) throw shape_error("maxpool2d_backward d_out dims mismatch");
  TensorT<T> d_in(sw.in_dims);
  const int out_w = sw.out_dims[1], c = sw.out_dims[2];
  const int in_w = sw.in_dims[1];
  for (std::size_t idx = 0; idx < sw.rows.size(); ++idx) {
    const int ch = static_cast<int>(idx % c);
    d_in.data[(static_cast<std::size_t>(sw.rows[idx]) * in_w + sw.cols[idx]) * c + ch] +=
        d_out.data[idx];
  }
  (void)out_w;
  return d_in;
}

// Switch-based unpooling: each pooled value returns to its argmax position,
// zeros elsewhere.
template <typename T>
TensorT<T> max_unpool2d(const TensorT<T>& pooled, const PoolSwitches& sw) {
  if (pooled.dims != sw.out_dims) throw shape_error("max_unpool2d pooled dims mismatch");
  TensorT<T> out(sw.in_dims);
  const int c = sw.out_dims[2];
  const int in_w = sw.in_dims[1];
  for (std::size_t idx = 0; idx < sw.rows.size(); ++idx) {
    const int ch = static_cast<int>(idx % c);
    out.data[(static_cast<std::size_t>(sw.rows[idx]) * in_w + sw.cols[idx]) * c + ch] =
        pooled.data[idx];
  }
  return out;
}

// Nearest-neighbor x2 upsampling: every cell fills its 2x2 block.
template <typename T>
TensorT<T> upsample2x(const TensorT<T>& input) {
  if (input.rank() != 3) throw shape_error("upsample2x input must be rank 3 [H,W,C]");
  const int h = input.dims[0], w = input.dims[1], c = input.dims[2];
  TensorT<T> out({2 * h, 2 * w, c});
  for (int y = 0; y < 2 * h; ++y) {
    for (int x = 0; x < 2 * w; ++x) {
      const T* src = &input.data[(static_cast<std::size_t>(y / 2) * w + x / 2) * c];
      T* dst = &out.data[(static_cast<std::size_t>(y) * 2 * w + x) * c];
      for (int ch = 0; ch < c; ++ch) dst[ch] = src[ch];
    }
  }
  return out;
}

template <typename T>
TensorT<T> upsample2x_backward(const TensorT<T>& d_out) {
  if (d_out.rank() != 3 || d_out.dims[0] % 2 || d_out.dims[1] % 2) {
    throw shape_error("upsample2x_backward expects rank 3 with even spatial dims");
  }
  const int h = d_out.dims[0] / 2, w = d_out.dims[1] / 2, c = d_out.dims[2];
  TensorT<T> d_in({h, w, c});
  for (int y = 0; y < 2 * h; ++y) {
    for (int x = 0; x < 2 * w; ++x) {
      const T* src = &d_out.data[(static_cast<std::size_t>(y) * 2 * w + x) * c];
      T* dst = &d_in.data[(static_cast<std::size_t>(y / 2) * w + x / 2) * c];
      for (int ch = 0; ch < c; ++ch) dst[ch] += src[ch];
    }
  }
  return d_in;
}

// Affine layer: input [n], weights [n,m], bias [m] -> [m].
template <typename T>
TensorT<T> dense(const TensorT<T>& input, const TensorT<T>& weights, const TensorT<T>& bias) {
  if (input.rank() != 1 || weights.rank() != 2 || bias.rank() != 1) {
    throw shape_error("dense expects input [n], weights [n,m], bias [m]");
  }
  const int n = weights.dims[0], m = weights.dims[1];
  if (input.dims[0] != n || bias.dims[0] != m) {
    throw shape_error("dense shape mismatch: input [" + std::to_string(input.dims[0]) +
                      "] weights [" + std::to_string(n) + "," + std::to_string(m) + "] bias [" +
                      std::to_string(bias.dims[0]) + "]");
  }
  TensorT<T> out({m});
  for (int j = 0; j < m; ++j) out[j] = bias[j];
  const T* wp = weights.data.data();
  for (int i = 0; i < n; ++i) {
    const T v = input[i];
    const T* row = wp + static_cast<std::size_t>(i) * m;
    T* op = out.data.data();
    for (int j = 0; j < m; ++j) op[j] += v * row[j];
  }
  return out;
}

template <typename T>
struct DenseGrads {
  TensorT<T> input;
  TensorT<T> weights;
  TensorT<T> bias;
};

template <typename T>
DenseGrads<T> dense_backward(const TensorT<T>& input, const TensorT<T>& weights,
                             const TensorT<T>& d_out) {
  const int n = weights.dims[0], m = weights.dims[1];
  if (d_out.dims != std::vector<int>{m}) throw shape_error("dense_backward d_out dims mismatch");
  DenseGrads<T> g{TensorT<T>({n}), TensorT<T>(weights.dims), d_out};
  const T* wp = weights.data.data();
  T* dwp = g.weights.data.data();
  for (int i = 0; i < n; ++i) {
    const T v = input[i];
    const T* row = wp + static_cast<std::size_t>(i) * m;
    T* drow = dwp + static_cast<std::size_t>(i) * m;
    T acc = T(0);
    for (int j = 0; j < m; ++j) {
      acc += row[j] * d_out[j];
      drow[j] += v * d_out[j];
    }
    g.input[i] = acc;
  }
  return g;
}

template <typename T>
TensorT<T> dense_backward_input(const TensorT<T>& weights, const TensorT<T>& d_out) {
  const int n = weights.dims[0], m = weights.dims[1];
  if (d_out.dims != std::vector<int>{m}) {
    throw shape_error("dense_backward_input d_out dims mismatch");
  }
  TensorT<T> d_in({n});
  const T* wp = weights.data.data();
  for (int i = 0; i < n; ++i) {
    const T* row = wp + static_cast<std::size_t>(i) * m;
    T acc = T(0);
    for (int j = 0; j < m; ++j) acc += row[j] * d_out[j];
    d_in[i] = acc;
  }
  return d_in;
}

// --- elementwise activations ---

template <typename T>
TensorT<T> relu(const TensorT<T>& x) {
  TensorT<T> out(x.dims);
  for (long long i = 0; i < x.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
  return out;
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& x, const TensorT<T>& d_out) {
  if (!x.same_shape(d_out)) throw shape_error("relu_backward shape mismatch");
  TensorT<T> d_in(x.dims);
  for (long long i = 0; i < x.size(); ++i) d_in[i] = x[i] > T(0) ? d_out[i] : T(0);
  return d_in;
}

template <typename T>
T sigmoid_scalar(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& x) {
  TensorT<T> out(x.dims);
  for (long long i = 0; i < x.size(); ++i) out[i] = sigmoid_scalar(x[i]);
  return out;
}

// Takes the forward output y = sigmoid(x).
template <typename T>
TensorT<T> sigmoid_backward(const TensorT<T>& y, const TensorT<T>& d_out) {
  TensorT<T> d_in(y.dims);
  for (long long i = 0; i < y.size(); ++i) d_in[i] = d_out[i] * y[i] * (T(1) - y[i]);
  return d_in;
}

template <typename T>
TensorT<T> tanh_act(const TensorT<T>& x) {
  TensorT<T> out(x.dims);
  for (long long i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  return out;
}

// Takes the forward output y = tanh(x).
template <typename T>
TensorT<T> tanh_backward(const TensorT<T>& y, const TensorT<T>& d_out) {
  TensorT<T> d_in(y.dims);
  for (long long i = 0; i < y.size(); ++i) d_in[i] = d_out[i] * (T(1) - y[i] * y[i]);
  return d_in;
}

// Max-subtraction stabilized softmax over the whole tensor (used on vectors).
template <typename T>
TensorT<T> softmax(const TensorT<T>& x) {
  TensorT<T> out(x.dims);
  T mx = x[0];
  for (long long i = 1; i < x.size(); ++i) mx = std::max(mx, x[i]);
  T sum = T(0);
  for (long long i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    sum += out[i];
  }
  for (long long i = 0; i < x.size(); ++i) out[i] /= sum;
  return out;
}

// Takes the forward output y = softmax(x).
template <typename T>
TensorT<T> softmax_backward(const TensorT<T>& y, const TensorT<T>& d_out) {
  T dot = T(0);
  for (long long i = 0; i < y.size(); ++i) dot += y[i] * d_out[i];
  TensorT<T> d_in(y.dims);
  for (long long i = 0; i < y.size(); ++i) d_in[i] = y[i] * (d_out[i] - dot);
  return d_in;
}

// Fused stable softmax cross-entropy. Returns loss and d_loss/d_logits.
template <typename T>
std::pair<T, TensorT<T>> cross_entropy_with_logits(const TensorT<T>& logits, int label) {
  if (logits.rank() != 1 || label < 0 || label >= logits.dims[0]) {
    throw shape_error("cross_entropy_with_logits expects rank-1 logits and a valid label");
  }
  T mx = logits[0];
  for (long long i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
  T sum = T(0);
  for (long long i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - mx);
  const T lse = mx + std::log(sum);
  const T loss = lse - logits[label];
  TensorT<T> d(logits.dims);
  for (long long i = 0; i < logits.size(); ++i) d[i] = std::exp(logits[i] - lse);
  d[label] -= T(1);
  return {loss, std::move(d)};
}

// log(1 + e^x) without overflow; d/dx = sigmoid(x).
template <typename T>
T softplus(T x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, T(0));
}

}  // namespace e2s
