#pragma once

#include <algorithm>
#include <cmath>

#include "eeg2shape/gan.hpp"
#include "eeg2shape/parallel.hpp"

namespace e2s {

template <typename T>
TensorT<T> generator_forward(const GeneratorNetT<T>& net, const TensorT<T>& repr,
                             const TensorT<T>& noise, GenCacheT<T>* cache) {
  if (repr.dims != std::vector<int>{kReprDim}) {
    throw shape_error("generator repr must be [" + std::to_string(kReprDim) + "], got " +
                      dims_to_string(repr.dims));
  }
  if (noise.dims != std::vector<int>{kNoiseDim}) {
    throw shape_error("generator noise must be [" + std::to_string(kNoiseDim) + "], got " +
                      dims_to_string(noise.dims));
  }
  GenCacheT<T> local;
  GenCacheT<T>& c = cache ? *cache : local;

  c.h0 = TensorT<T>({kGenInputDim});
  for (int i = 0; i < kReprDim; ++i) c.h0[i] = repr[i];
  for (int i = 0; i < kNoiseDim; ++i) c.h0[kReprDim + i] = noise[i];

  c.fc_pre = dense(c.h0, net.fc_w, net.fc_b);
  c.fc_act = sigmoid(c.fc_pre);
  const TensorT<T> grid = c.fc_act.reshaped({kWindowLength, kChannels, 64});
  c.up1 = upsample2x(grid);
  c.conv1_pre = conv2d(c.up1, net.conv1_k, net.conv1_b);
  c.conv1_act = relu(c.conv1_pre);
  c.up2 = upsample2x(c.conv1_act);
  c.conv2_pre = conv2d(c.up2, net.conv2_k, net.conv2_b);
  const TensorT<T> out = tanh_act(c.conv2_pre);
  c.image = out.reshaped({4 * kWindowLength, 4 * kChannels});
  return c.image;
}

template <typename T>
void generator_backward(const GeneratorNetT<T>& net, const GenCacheT<T>& cache,
                        const TensorT<T>& d_image, GeneratorNetT<T>& grads) {
  const TensorT<T> d_tanh = tanh_backward(cache.image, d_image);
  const TensorT<T> d_conv2_pre = d_tanh.reshaped(cache.conv2_pre.dims);
  const Conv2dGrads<T> g2 = conv2d_backward(cache.up2, net.conv2_k, d_conv2_pre);
  for (long long i = 0; i < g2.kernels.size(); ++i) grads.conv2_k[i] += g2.kernels[i];
  for (long long i = 0; i < g2.bias.size(); ++i) grads.conv2_b[i] += g2.bias[i];
  const TensorT<T> d_conv1_act = upsample2x_backward(g2.input);
  const TensorT<T> d_conv1_pre = relu_backward(cache.conv1_pre, d_conv1_act);
  const Conv2dGrads<T> g1 = conv2d_backward(cache.up1, net.conv1_k, d_conv1_pre);
  for (long long i = 0; i < g1.kernels.size(); ++i) grads.conv1_k[i] += g1.kernels[i];
  for (long long i = 0; i < g1.bias.size(); ++i) grads.conv1_b[i] += g1.bias[i];
  const TensorT<T> d_grid = upsample2x_backward(g1.input);
  const TensorT<T> d_fc_act = d_grid.reshaped({kGenFcWidth});
  const TensorT<T> d_fc_pre = sigmoid_backward(cache.fc_act, d_fc_act);
  const DenseGrads<T> gd = dense_backward(cache.h0, net.fc_w, d_fc_pre);
  for (long long i = 0; i < gd.weights.size(); ++i) grads.fc_w[i] += gd.weights[i];
  for (long long i = 0; i < gd.bias.size(); ++i) grads.fc_b[i] += gd.bias[i];
}

template <typename T>
DiscOutT<T> discriminator_forward(const DiscriminatorNetT<T>& net, const TensorT<T>& image,
                                  const TensorT<T>& repr, DiscCacheT<T>* cache) {
  if (image.dims != std::vector<int>{4 * kWindowLength, 4 * kChannels}) {
    throw shape_error("discriminator image must be [40,56], got " + dims_to_string(image.dims));
  }
  if (repr.dims != std::vector<int>{kReprDim}) {
    throw shape_error("discriminator repr must be [40], got " + dims_to_string(repr.dims));
  }
  for (long long i = 0; i < image.size(); ++i) {
    if (std::abs(static_cast<double>(image[i])) > 1.0 + 1e-6) {
      throw numeric_error("discriminator input pixel " + std::to_string(i) + " = " +
                          std::to_string(static_cast<double>(image[i])) +
                          " outside the [-1,1] domain");
    }
  }

  DiscCacheT<T> local;
  DiscCacheT<T>& c = cache ? *cache : local;
  c.x0 = image.reshaped({4 * kWindowLength, 4 * kChannels, 1});
  c.a1 = conv2d(c.x0, net.conv1_k, net.conv1_b);
  {
    auto pooled = maxpool2d(relu(c.a1), {2, 2}, {2, 2});
    c.p1 = std::move(pooled.first);
    c.sw1 = std::move(pooled.second);
  }
  c.a2 = conv2d(c.p1, net.conv2_k, net.conv2_b);
  {
    auto pooled = maxpool2d(relu(c.a2), {2, 2}, {2, 2});
    c.p2 = std::move(pooled.first);
    c.sw2 = std::move(pooled.second);
  }
  c.concat = TensorT<T>({DiscriminatorNetT<T>::kConcat});
  for (long long i = 0; i < c.p2.size(); ++i) c.concat[i] = c.p2[i];
  for (int i = 0; i < kReprDim; ++i) c.concat[DiscriminatorNetT<T>::kFlat + i] = repr[i];
  c.fc_pre = dense(c.concat, net.fc_w, net.fc_b);
  c.fc_act = relu(c.fc_pre);
  const TensorT<T> src = dense(c.fc_act, net.src_w, net.src_b);
  c.src_logit = src[0];
  c.cls_logits = dense(c.fc_act, net.cls_w, net.cls_b);

  DiscOutT<T> out;
  out.src_logit = c.src_logit;
  const T eps = T(1e-7);
  out.p_real = std::min(T(1) - eps, std::max(eps, sigmoid_scalar(c.src_logit)));
  out.cls_logits = c.cls_logits;
  out.cls_probs = softmax(c.cls_logits);
  return out;
}

template <typename T>
void discriminator_backward(const DiscriminatorNetT<T>& net, const DiscCacheT<T>& cache,
                            T d_src_logit, const TensorT<T>* d_cls_logits,
                            DiscriminatorNetT<T>* grads, TensorT<T>* d_image) {
  TensorT<T> d_fc_act({100});
  {
    TensorT<T> d_src({1});
    d_src[0] = d_src_logit;
    if (grads) {
      const DenseGrads<T> g = dense_backward(cache.fc_act, net.src_w, d_src);
      for (long long i = 0; i < g.weights.size(); ++i) grads->src_w[i] += g.weights[i];
      grads->src_b[0] += g.bias[0];
      d_fc_act = g.input;
    } else {
      d_fc_act = dense_backward_input(net.src_w, d_src);
    }
  }
  if (d_cls_logits) {
    TensorT<T> d_in;
    if (grads) {
      DenseGrads<T> g = dense_backward(cache.fc_act, net.cls_w, *d_cls_logits);
      for (long long i = 0; i < g.weights.size(); ++i) grads->cls_w[i] += g.weights[i];
      for (long long i = 0; i < g.bias.size(); ++i) grads->cls_b[i] += g.bias[i];
      d_in = std::move(g.input);
    } else {
      d_in = dense_backward_input(net.cls_w, *d_cls_logits);
    }
    for (long long i = 0; i < d_fc_act.size(); ++i) d_fc_act[i] += d_in[i];
  }
  const TensorT<T> d_fc_pre = relu_backward(cache.fc_pre, d_fc_act);
  TensorT<T> d_concat;
  if (grads) {
    DenseGrads<T> gfc = dense_backward(cache.concat, net.fc_w, d_fc_pre);
    for (long long i = 0; i < gfc.weights.size(); ++i) grads->fc_w[i] += gfc.weights[i];
    for (long long i = 0; i < gfc.bias.size(); ++i) grads->fc_b[i] += gfc.bias[i];
    d_concat = std::move(gfc.input);
  } else {
    d_concat = dense_backward_input(net.fc_w, d_fc_pre);
  }

  TensorT<T> d_p2 = TensorT<T>(cache.p2.dims);
  for (long long i = 0; i < d_p2.size(); ++i) d_p2[i] = d_concat[i];
  const TensorT<T> d_r2 = maxpool2d_backward(d_p2, cache.sw2);
  const TensorT<T> d_a2 = relu_backward(cache.a2, d_r2);
  TensorT<T> d_p1;
  if (grads) {
    Conv2dGrads<T> g2 = conv2d_backward(cache.p1, net.conv2_k, d_a2);
    for (long long i = 0; i < g2.kernels.size(); ++i) grads->conv2_k[i] += g2.kernels[i];
    for (long long i = 0; i < g2.bias.size(); ++i) grads->conv2_b[i] += g2.bias[i];
    d_p1 = std::move(g2.input);
  } else {
    d_p1 = conv2d_backward_input(cache.p1.dims, net.conv2_k, d_a2);
  }
  const TensorT<T> d_r1 = maxpool2d_backward(d_p1, cache.sw1);
  const TensorT<T> d_a1 = relu_backward(cache.a1, d_r1);
  if (grads) {
    Conv2dGrads<T> g1 = conv2d_backward(cache.x0, net.conv1_k, d_a1);
    for (long long i = 0; i < g1.kernels.size(); ++i) grads->conv1_k[i] += g1.kernels[i];
    for (long long i = 0; i < g1.bias.size(); ++i) grads->conv1_b[i] += g1.bias[i];
    if (d_image) *d_image = g1.input.reshaped({4 * kWindowLength, 4 * kChannels});
  } else if (d_image) {
    *d_image = conv2d_backward_input(cache.x0.dims, net.conv1_k, d_a1)
                   .reshaped({4 * kWindowLength, 4 * kChannels});
  }
}

namespace detail {

inline bool gan_class_term_active(GanMode mode) {
  return mode == GanMode::Full || mode == GanMode::Acgan;
}

template <typename T>
const TensorT<T>& effective_repr(const GanSampleT<T>& sample, GanMode mode,
                                 const TensorT<T>& zero_repr) {
  return mode == GanMode::Gan ? zero_repr : sample.repr;
}

}  // namespace detail

template <typename T>
LossBreakdown generator_loss(const std::vector<GanSampleT<T>>& batch, const GeneratorNetT<T>& gen,
                             const DiscriminatorNetT<T>& disc, const GanTrainConfig& config,
                             GeneratorNetT<T>* grads) {
  if (batch.empty()) throw shape_error("generator_loss: empty batch");
  const int n = static_cast<int>(batch.size());
  const bool class_on = detail::gan_class_term_active(config.mode);
  const bool align_on = config.mode == GanMode::Full;
  const TensorT<T> zero_repr({kReprDim});
  const double inv_n = 1.0 / n;

  struct ChunkAcc {
    double adv = 0, cls = 0, align = 0, s_r = 0;
  };
  std::vector<ChunkAcc> acc(kBatchChunks);
  std::vector<GeneratorNetT<T>> chunk_grads;
  if (grads) {
    chunk_grads.resize(kBatchChunks);
    for (auto& g : chunk_grads) g = GeneratorNetT<T>::zeros();
  }

  parallel_chunks(n, kBatchChunks, [&](int chunk, int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const GanSampleT<T>& s = batch[static_cast<std::size_t>(i)];
      const TensorT<T>& repr = detail::effective_repr(s, config.mode, zero_repr);
      GenCacheT<T> gc;
      const TensorT<T> fake = generator_forward(gen, repr, s.noise, &gc);
      DiscCacheT<T> dc;
      const DiscOutT<T> out = discriminator_forward(disc, fake, repr, &dc);

      const double s_logit = static_cast<double>(out.src_logit);
      acc[chunk].adv += softplus(-s_logit);

      TensorT<T> d_cls;
      if (class_on) {
        auto [ce, d] = cross_entropy_with_logits(dc.cls_logits, s.label);
        acc[chunk].cls += static_cast<double>(ce);
        d_cls = std::move(d);
      }

      const double s_r = semantic_distance(s.real_image, fake);
      acc[chunk].s_r += s_r;
      if (align_on) acc[chunk].align += config.lambda_align * s_r;

      if (grads) {
        const T d_src = static_cast<T>((1.0 / (1.0 + std::exp(-s_logit)) - 1.0) * inv_n);
        if (class_on) {
          for (long long j = 0; j < d_cls.size(); ++j) d_cls[j] = static_cast<T>(d_cls[j] * inv_n);
        }
        TensorT<T> d_image({4 * kWindowLength, 4 * kChannels});
        discriminator_backward<T>(disc, dc, d_src, class_on ? &d_cls : nullptr, nullptr,
                                  &d_image);
        if (align_on && s_r > 0.0) {
          const double scale =
              config.lambda_align * inv_n / (static_cast<double>(fake.size()) * s_r);
          for (long long j = 0; j < d_image.size(); ++j) {
            d_image[j] += static_cast<T>(scale * (static_cast<double>(fake[j]) -
                                                  static_cast<double>(s.real_image[j])));
          }
        }
        generator_backward(gen, gc, d_image, chunk_grads[static_cast<std::size_t>(chunk)]);
      }
    }
  });

  LossBreakdown b;
  for (int c = 0; c < kBatchChunks; ++c) {
    b.adversarial += acc[c].adv;
    b.classification += acc[c].cls;
    b.alignment += acc[c].align;
    b.mean_s_r += acc[c].s_r;
  }
  b.adversarial *= inv_n;
  b.classification *= inv_n;
  b.alignment *= inv_n;
  b.mean_s_r *= inv_n;
  b.total = b.adversarial + b.classification + b.alignment;
  if (grads) {
    for (int c = 0; c < kBatchChunks; ++c) grads->add(chunk_grads[static_cast<std::size_t>(c)]);
  }
  return b;
}

template <typename T>
LossBreakdown discriminator_loss(const std::vector<GanSampleT<T>>& batch,
                                 const GeneratorNetT<T>& gen, const DiscriminatorNetT<T>& disc,
                                 const GanTrainConfig& config, DiscriminatorNetT<T>* grads) {
  if (batch.empty()) throw shape_error("discriminator_loss: empty batch");
  const int n = static_cast<int>(batch.size());
  const bool class_on = detail::gan_class_term_active(config.mode);
  const TensorT<T> zero_repr({kReprDim});
  const double inv_n = 1.0 / n;

  struct ChunkAcc {
    double adv = 0, cls = 0, real_acc = 0, fake_acc = 0, class_acc = 0;
  };
  std::vector<ChunkAcc> acc(kBatchChunks);
  std::vector<DiscriminatorNetT<T>> chunk_grads;
  if (grads) {
    chunk_grads.resize(kBatchChunks);
    for (auto& g : chunk_grads) g = DiscriminatorNetT<T>::zeros();
  }

  parallel_chunks(n, kBatchChunks, [&](int chunk, int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const GanSampleT<T>& s = batch[static_cast<std::size_t>(i)];
      const TensorT<T>& repr = detail::effective_repr(s, config.mode, zero_repr);
      const TensorT<T> fake = generator_forward(gen, repr, s.noise);

      DiscCacheT<T> dc_real, dc_fake;
      const DiscOutT<T> out_real = discriminator_forward(disc, s.real_image, repr, &dc_real);
      const DiscOutT<T> out_fake = discriminator_forward(disc, fake, repr, &dc_fake);

      const double sr = static_cast<double>(out_real.src_logit);
      const double sf = static_cast<double>(out_fake.src_logit);
      acc[chunk].adv += softplus(-sr) + softplus(sf);
      acc[chunk].real_acc += sr > 0.0 ? 1.0 : 0.0;
      acc[chunk].fake_acc += sf < 0.0 ? 1.0 : 0.0;

      TensorT<T> d_cls_real;
      if (class_on) {
        auto [ce, d] = cross_entropy_with_logits(dc_real.cls_logits, s.label);
        acc[chunk].cls += static_cast<double>(ce);
        d_cls_real = std::move(d);
        int arg = 0;
        for (int k = 1; k < kNumClasses; ++k) {
          if (dc_real.cls_logits[k] > dc_real.cls_logits[arg]) arg = k;
        }
        acc[chunk].class_acc += arg == s.label ? 1.0 : 0.0;
      }

      if (grads) {
        auto& cg = chunk_grads[static_cast<std::size_t>(chunk)];
        const T d_sr = static_cast<T>((1.0 / (1.0 + std::exp(-sr)) - 1.0) * inv_n);
        const T d_sf = static_cast<T>(1.0 / (1.0 + std::exp(-sf)) * inv_n);
        if (class_on) {
          for (long long j = 0; j < d_cls_real.size(); ++j) {
            d_cls_real[j] = static_cast<T>(d_cls_real[j] * inv_n);
          }
        }
        discriminator_backward<T>(disc, dc_real, d_sr, class_on ? &d_cls_real : nullptr, &cg,
                                  nullptr);
        discriminator_backward<T>(disc, dc_fake, d_sf, nullptr, &cg, nullptr);
      }
    }
  });

  LossBreakdown b;
  for (int c = 0; c < kBatchChunks; ++c) {
    b.adversarial += acc[c].adv;
    b.classification += acc[c].cls;
    b.d_real_acc += acc[c].real_acc;
    b.d_fake_acc += acc[c].fake_acc;
    b.class_acc += acc[c].class_acc;
  }
  b.adversarial *= inv_n;
  b.classification *= inv_n;
  b.d_real_acc *= inv_n;
  b.d_fake_acc *= inv_n;
  b.class_acc *= inv_n;
  b.total = b.adversarial + b.classification;
  if (grads) {
    for (int c = 0; c < kBatchChunks; ++c) grads->add(chunk_grads[static_cast<std::size_t>(c)]);
  }
  return b;
}

}  // namespace e2s
