#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eeg2shape/checkpoint.hpp"
#include "eeg2shape/encoder.hpp"
#include "eeg2shape/ops.hpp"
#include "eeg2shape/rng.hpp"
#include "eeg2shape/stimuli.hpp"
#include "eeg2shape/tensor.hpp"

namespace e2s {

inline constexpr int kNoiseDim = 20;
inline constexpr int kGenInputDim = kReprDim + kNoiseDim;  // 60
inline constexpr int kGenFcWidth = 64 * kWindowLength * kChannels;  // 8960, reshaped [10,14,64]

// Generator: dense+sigmoid to [10,14,64], then two (x2 nearest-neighbor
// upsample, stride-1 5x5 conv) blocks; ReLU between blocks, tanh output.
template <typename T>
struct GeneratorNetT {
  TensorT<T> fc_w, fc_b;       // [60,8960], [8960]
  TensorT<T> conv1_k, conv1_b; // [5,5,64,32]
  TensorT<T> conv2_k, conv2_b; // [5,5,32,1]

  static GeneratorNetT zeros() {
    GeneratorNetT net;
    net.fc_w = TensorT<T>({kGenInputDim, kGenFcWidth});
    net.fc_b = TensorT<T>({kGenFcWidth});
    net.conv1_k = TensorT<T>({5, 5, 64, 32});
    net.conv1_b = TensorT<T>({32});
    net.conv2_k = TensorT<T>({5, 5, 32, 1});
    net.conv2_b = TensorT<T>({1});
    return net;
  }

  static GeneratorNetT init(Rng& rng, double stddev = 0.02) {
    GeneratorNetT net = zeros();
    rng.fill_truncated_normal(net.fc_w, stddev);
    rng.fill_truncated_normal(net.conv1_k, stddev);
    rng.fill_truncated_normal(net.conv2_k, stddev);
    return net;
  }

  template <typename Fn>
  void visit(Fn&& fn) {
    fn("g_fc_weights", fc_w);
    fn("g_fc_bias", fc_b);
    fn("g_conv1_kernels", conv1_k);
    fn("g_conv1_bias", conv1_b);
    fn("g_conv2_kernels", conv2_k);
    fn("g_conv2_bias", conv2_b);
  }

  void zero() {
    visit([](const char*, TensorT<T>& t) { std::fill(t.data.begin(), t.data.end(), T(0)); });
  }

  void add(const GeneratorNetT& o) {
    auto acc = [](TensorT<T>& a, const TensorT<T>& b) {
      for (long long i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    acc(fc_w, o.fc_w);
    acc(fc_b, o.fc_b);
    acc(conv1_k, o.conv1_k);
    acc(conv1_b, o.conv1_b);
    acc(conv2_k, o.conv2_k);
    acc(conv2_b, o.conv2_b);
  }
};

// Discriminator: the encoder's conv stack over the 40x56 image, flattened and
// concatenated with the 40-d representation, a 100-wide ReLU layer, then a
// source head (1 logit) and a class head (5 logits).
template <typename T>
struct DiscriminatorNetT {
  TensorT<T> conv1_k, conv1_b;  // [3,3,1,32]
  TensorT<T> conv2_k, conv2_b;  // [3,3,32,64]
  TensorT<T> fc_w, fc_b;        // [9000,100]
  TensorT<T> src_w, src_b;      // [100,1]
  TensorT<T> cls_w, cls_b;      // [100,5]

  static constexpr int kFlat = 10 * 14 * 64;           // after two ceil-pools of 40x56
  static constexpr int kConcat = kFlat + kReprDim;     // 9000

  static DiscriminatorNetT zeros() {
    DiscriminatorNetT net;
    net.conv1_k = TensorT<T>({3, 3, 1, 32});
    net.conv1_b = TensorT<T>({32});
    net.conv2_k = TensorT<T>({3, 3, 32, 64});
    net.conv2_b = TensorT<T>({64});
    net.fc_w = TensorT<T>({kConcat, 100});
    net.fc_b = TensorT<T>({100});
    net.src_w = TensorT<T>({100, 1});
    net.src_b = TensorT<T>({1});
    net.cls_w = TensorT<T>({100, 5});
    net.cls_b = TensorT<T>({5});
    return net;
  }

  static DiscriminatorNetT init(Rng& rng, double stddev = 0.02) {
    DiscriminatorNetT net = zeros();
    rng.fill_truncated_normal(net.conv1_k, stddev);
    rng.fill_truncated_normal(net.conv2_k, stddev);
    rng.fill_truncated_normal(net.fc_w, stddev);
    rng.fill_truncated_normal(net.src_w, stddev);
    rng.fill_truncated_normal(net.cls_w, stddev);
    return net;
  }

  template <typename Fn>
  void visit(Fn&& fn) {
    fn("d_conv1_kernels", conv1_k);
    fn("d_conv1_bias", conv1_b);
    fn("d_conv2_kernels", conv2_k);
    fn("d_conv2_bias", conv2_b);
    fn("d_fc_weights", fc_w);
    fn("d_fc_bias", fc_b);
    fn("d_src_weights", src_w);
    fn("d_src_bias", src_b);
    fn("d_cls_weights", cls_w);
    fn("d_cls_bias", cls_b);
  }

  void zero() {
    visit([](const char*, TensorT<T>& t) { std::fill(t.data.begin(), t.data.end(), T(0)); });
  }

  void add(const DiscriminatorNetT& o) {
    auto acc = [](TensorT<T>& a, const TensorT<T>& b) {
      for (long long i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    acc(conv1_k, o.conv1_k);
    acc(conv1_b, o.conv1_b);
    acc(conv2_k, o.conv2_k);
    acc(conv2_b, o.conv2_b);
    acc(fc_w, o.fc_w);
    acc(fc_b, o.fc_b);
    acc(src_w, o.src_w);
    acc(src_b, o.src_b);
    acc(cls_w, o.cls_w);
    acc(cls_b, o.cls_b);
  }
};

using GeneratorNet = GeneratorNetT<float>;
using DiscriminatorNet = DiscriminatorNetT<float>;

template <typename T>
struct GenCacheT {
  TensorT<T> h0, fc_pre, fc_act;
  TensorT<T> up1, conv1_pre, conv1_act, up2, conv2_pre;
  TensorT<T> image;  // [40,56]
};

// h0 = concat(repr, z); dense+sigmoid; reshape [10,14,64]; upsample;
// conv32+ReLU; upsample; conv1; tanh. Output [40,56] in (-1,1).
template <typename T>
TensorT<T> generator_forward(const GeneratorNetT<T>& net, const TensorT<T>& repr,
                             const TensorT<T>& noise, GenCacheT<T>* cache = nullptr);

// Backpropagates d_image [40,56] through the generator, accumulating into
// `grads`.
template <typename T>
void generator_backward(const GeneratorNetT<T>& net, const GenCacheT<T>& cache,
                        const TensorT<T>& d_image, GeneratorNetT<T>& grads);

template <typename T>
struct DiscCacheT {
  TensorT<T> x0, a1, p1, a2, p2;
  PoolSwitches sw1, sw2;
  TensorT<T> concat, fc_pre, fc_act;
  TensorT<T> cls_logits;
  T src_logit = T(0);
};

template <typename T>
struct DiscOutT {
  T src_logit = T(0);
  T p_real = T(0);          // sigmoid(src_logit), clamped to (0,1)
  TensorT<T> cls_logits;    // [5]
  TensorT<T> cls_probs;     // [5]
};

// Rejects images outside the [-1,1] domain (tolerance 1e-6).
template <typename T>
DiscOutT<T> discriminator_forward(const DiscriminatorNetT<T>& net, const TensorT<T>& image,
                                  const TensorT<T>& repr, DiscCacheT<T>* cache = nullptr);

// Backpropagates head gradients. `grads` may be null when only the image
// gradient is needed (the generator step).
template <typename T>
void discriminator_backward(const DiscriminatorNetT<T>& net, const DiscCacheT<T>& cache,
                            T d_src_logit, const TensorT<T>* d_cls_logits,
                            DiscriminatorNetT<T>* grads, TensorT<T>* d_image);

// Root-mean-square pixel distance between two same-shaped images.
template <typename T>
double semantic_distance(const TensorT<T>& real, const TensorT<T>& fake) {
  if (real.dims != fake.dims) {
    throw shape_error("semantic_distance dims mismatch: " + dims_to_string(real.dims) + " vs " +
                      dims_to_string(fake.dims));
  }
  double q = 0.0;
  for (long long i = 0; i < real.size(); ++i) {
    const double d = static_cast<double>(real[i]) - static_cast<double>(fake[i]);
    q += d * d;
  }
  return std::sqrt(q / static_cast<double>(real.size()));
}

enum class GanMode { Full, Acgan, Cgan, Gan };

const char* to_string(GanMode mode);
GanMode parse_gan_mode(const std::string& name);

struct GanTrainConfig {
  double lambda_align = 0.01;
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int epochs = 150;
  int batch_size = 50;
  std::uint64_t seed = 0;
  GanMode mode = GanMode::Full;
};

// One training tuple: conditioning representation, its label, the generator
// noise, and the class-matched real image.
template <typename T>
struct GanSampleT {
  TensorT<T> repr;
  int label = 0;
  TensorT<T> noise;
  TensorT<T> real_image;
};

using GanSample = GanSampleT<float>;

struct LossBreakdown {
  double total = 0.0;
  double adversarial = 0.0;
  double classification = 0.0;
  double alignment = 0.0;   // lambda-weighted term
  double mean_s_r = 0.0;    // unweighted mean semantic distance (generator only)
  double d_real_acc = 0.0;  // discriminator stats
  double d_fake_acc = 0.0;
  double class_acc = 0.0;
};

// Generator objective: -E[log D_src(F)] - E[log P(C=y|F)] + lambda*E[S_r],
// with the class and alignment terms gated by the mode. `grads` may be null
// for evaluation-only calls.
template <typename T>
LossBreakdown generator_loss(const std::vector<GanSampleT<T>>& batch, const GeneratorNetT<T>& gen,
                             const DiscriminatorNetT<T>& disc, const GanTrainConfig& config,
                             GeneratorNetT<T>* grads);

// Discriminator objective: -E[log D_src(R)] - E[log(1-D_src(F))] -
// E[log P(C=y|R)], the class term on real samples only and active in
// full/acgan modes.
template <typename T>
LossBreakdown discriminator_loss(const std::vector<GanSampleT<T>>& batch,
                                 const GeneratorNetT<T>& gen, const DiscriminatorNetT<T>& disc,
                                 const GanTrainConfig& config, DiscriminatorNetT<T>* grads);

struct GanEpochStats {
  int epoch = 0;
  double g_loss = 0.0;
  double d_loss = 0.0;
  double mean_s_r = 0.0;
  double d_real_acc = 0.0;
  double d_fake_acc = 0.0;
  double class_acc = 0.0;
};

struct GanTrainResult {
  GeneratorNet gen;
  DiscriminatorNet disc;
  std::vector<GanEpochStats> history;
};

// Alternating per-batch D step then G step, Adam on both nets; deterministic
// under the seed.
GanTrainResult train_gan(const std::vector<ReprSample>& reprs,
                         const std::vector<ShapeImage>& canonical_normalized,
                         const GanTrainConfig& config);

Checkpoint gan_checkpoint(const GeneratorNet& gen, const DiscriminatorNet& disc,
                          std::uint64_t seed, GanMode mode, double lambda_align);

struct LoadedGan {
  GeneratorNet gen;
  DiscriminatorNet disc;
  GanMode mode = GanMode::Full;
  double lambda_align = 0.0;
  std::uint64_t seed = 0;
};

LoadedGan gan_from_checkpoint(const Checkpoint& ck);

}  // namespace e2s

#include "eeg2shape/gan_impl.hpp"
