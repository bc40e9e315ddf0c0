#pragma once

#include <utility>
#include <vector>

#include "eeg2shape/ops.hpp"
#include "eeg2shape/rng.hpp"
#include "eeg2shape/tensor.hpp"

namespace e2s {

inline constexpr int kReprDim = 40;

// Two conv+pool stages (32 then 64 filters, 3x3, SAME, ceil-pool 2x2/2), a
// 40-wide ReLU representation layer, and a 5-way output head. Instantiated at
// [10,14] as the EEG encoder and at [40,56] as the evaluation scorer.
template <typename T>
struct SmallCnnT {
  int in_h = 0;
  int in_w = 0;
  TensorT<T> conv1_k, conv1_b;
  TensorT<T> conv2_k, conv2_b;
  TensorT<T> fc_repr_w, fc_repr_b;
  TensorT<T> fc_out_w, fc_out_b;

  static int pooled(int n) { return detail::ceil_div(detail::ceil_div(n, 2), 2); }
  static int flat_size(int h, int w) { return pooled(h) * pooled(w) * 64; }

  static SmallCnnT zeros(int h, int w) {
    SmallCnnT net;
    net.in_h = h;
    net.in_w = w;
    net.conv1_k = TensorT<T>({3, 3, 1, 32});
    net.conv1_b = TensorT<T>({32});
    net.conv2_k = TensorT<T>({3, 3, 32, 64});
    net.conv2_b = TensorT<T>({64});
    net.fc_repr_w = TensorT<T>({flat_size(h, w), kReprDim});
    net.fc_repr_b = TensorT<T>({kReprDim});
    net.fc_out_w = TensorT<T>({kReprDim, 5});
    net.fc_out_b = TensorT<T>({5});
    return net;
  }

  // Zero-mean Gaussian weights truncated at +-2 sigma, zero biases.
  static SmallCnnT init(int h, int w, Rng& rng, double stddev = 0.05) {
    SmallCnnT net = zeros(h, w);
    rng.fill_truncated_normal(net.conv1_k, stddev);
    rng.fill_truncated_normal(net.conv2_k, stddev);
    rng.fill_truncated_normal(net.fc_repr_w, stddev);
    rng.fill_truncated_normal(net.fc_out_w, stddev);
    return net;
  }

  template <typename Fn>
  void visit(Fn&& fn) {
    fn("conv1_kernels", conv1_k);
    fn("conv1_bias", conv1_b);
    fn("conv2_kernels", conv2_k);
    fn("conv2_bias", conv2_b);
    fn("fc_repr_weights", fc_repr_w);
    fn("fc_repr_bias", fc_repr_b);
    fn("fc_out_weights", fc_out_w);
    fn("fc_out_bias", fc_out_b);
  }

  void zero() {
    visit([](const char*, TensorT<T>& t) { std::fill(t.data.begin(), t.data.end(), T(0)); });
  }

  void add(const SmallCnnT& other) {
    add_pairwise(other, [](TensorT<T>& a, const TensorT<T>& b) {
      for (long long i = 0; i < a.size(); ++i) a[i] += b[i];
    });
  }

  struct Forward {
    TensorT<T> repr;    // [40], post-ReLU
    TensorT<T> logits;  // [5]
    TensorT<T> probs;   // [5]
    std::vector<std::vector<int>> shape_trace;
  };

  Forward forward(const TensorT<T>& image) const {
    const TensorT<T> x0 = as_input(image);
    Forward f;
    f.shape_trace.push_back(x0.dims);
    const TensorT<T> a1 = conv2d(x0, conv1_k, conv1_b);
    const TensorT<T> r1 = relu(a1);
    f.shape_trace.push_back(r1.dims);
    auto [p1, sw1] = maxpool2d(r1, {2, 2}, {2, 2});
    f.shape_trace.push_back(p1.dims);
    const TensorT<T> a2 = conv2d(p1, conv2_k, conv2_b);
    const TensorT<T> r2 = relu(a2);
    f.shape_trace.push_back(r2.dims);
    auto [p2, sw2] = maxpool2d(r2, {2, 2}, {2, 2});
    f.shape_trace.push_back(p2.dims);
    const TensorT<T> flat = p2.reshaped({static_cast<int>(p2.size())});
    f.shape_trace.push_back(flat.dims);
    const TensorT<T> a3 = dense(flat, fc_repr_w, fc_repr_b);
    f.repr = relu(a3);
    f.shape_trace.push_back(f.repr.dims);
    f.logits = dense(f.repr, fc_out_w, fc_out_b);
    f.probs = softmax(f.logits);
    f.shape_trace.push_back(f.probs.dims);
    return f;
  }

  // Cross-entropy forward/backward for one sample; gradients are accumulated
  // into `grads` (a same-shaped net).
  T forward_backward_ce(const TensorT<T>& image, int label, SmallCnnT& grads,
                        int* predicted = nullptr) const {
    const TensorT<T> x0 = as_input(image);
    const TensorT<T> a1 = conv2d(x0, conv1_k, conv1_b);
    const TensorT<T> r1 = relu(a1);
    auto [p1, sw1] = maxpool2d(r1, {2, 2}, {2, 2});
    const TensorT<T> a2 = conv2d(p1, conv2_k, conv2_b);
    const TensorT<T> r2 = relu(a2);
    auto [p2, sw2] = maxpool2d(r2, {2, 2}, {2, 2});
    const TensorT<T> flat = p2.reshaped({static_cast<int>(p2.size())});
    const TensorT<T> a3 = dense(flat, fc_repr_w, fc_repr_b);
    const TensorT<T> repr = relu(a3);
    const TensorT<T> logits = dense(repr, fc_out_w, fc_out_b);
    if (predicted) {
      int arg = 0;
      for (int k = 1; k < logits.dims[0]; ++k) {
        if (logits[k] > logits[arg]) arg = k;
      }
      *predicted = arg;
    }

    auto [loss, d_logits] = cross_entropy_with_logits(logits, label);

    const DenseGrads<T> g_out = dense_backward(repr, fc_out_w, d_logits);
    accumulate(grads.fc_out_w, g_out.weights);
    accumulate(grads.fc_out_b, g_out.bias);
    const TensorT<T> d_a3 = relu_backward(a3, g_out.input);
    const DenseGrads<T> g_repr = dense_backward(flat, fc_repr_w, d_a3);
    accumulate(grads.fc_repr_w, g_repr.weights);
    accumulate(grads.fc_repr_b, g_repr.bias);
    const TensorT<T> d_p2 = g_repr.input.reshaped(p2.dims);
    const TensorT<T> d_r2 = maxpool2d_backward(d_p2, sw2);
    const TensorT<T> d_a2 = relu_backward(a2, d_r2);
    const Conv2dGrads<T> g2 = conv2d_backward(p1, conv2_k, d_a2);
    accumulate(grads.conv2_k, g2.kernels);
    accumulate(grads.conv2_b, g2.bias);
    const TensorT<T> d_p1 = maxpool2d_backward(g2.input, sw1);
    const TensorT<T> d_a1 = relu_backward(a1, d_p1);
    const Conv2dGrads<T> g1 = conv2d_backward(x0, conv1_k, d_a1);
    accumulate(grads.conv1_k, g1.kernels);
    accumulate(grads.conv1_b, g1.bias);
    return loss;
  }

 private:
  TensorT<T> as_input(const TensorT<T>& image) const {
    if (image.rank() == 2 && image.dims[0] == in_h && image.dims[1] == in_w) {
      return image.reshaped({in_h, in_w, 1});
    }
    if (image.rank() == 3 && image.dims == std::vector<int>{in_h, in_w, 1}) return image;
    throw shape_error("expected input [" + std::to_string(in_h) + "," + std::to_string(in_w) +
                      "], got " + dims_to_string(image.dims));
  }

  static void accumulate(TensorT<T>& dst, const TensorT<T>& src) {
    for (long long i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }

  template <typename Fn>
  void add_pairwise(const SmallCnnT& other, Fn&& fn) {
    fn(conv1_k, other.conv1_k);
    fn(conv1_b, other.conv1_b);
    fn(conv2_k, other.conv2_k);
    fn(conv2_b, other.conv2_b);
    fn(fc_repr_w, other.fc_repr_w);
    fn(fc_repr_b, other.fc_repr_b);
    fn(fc_out_w, other.fc_out_w);
    fn(fc_out_b, other.fc_out_b);
  }
};

using SmallCnn = SmallCnnT<float>;

}  // namespace e2s
