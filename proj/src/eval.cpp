#include "eeg2shape/eval.hpp"

#include <cmath>
#include <cstdio>

#include "eeg2shape/adam.hpp"
#include "eeg2shape/parallel.hpp"
#include "eeg2shape/stimuli.hpp"

namespace e2s {

namespace {

int argmax(const Tensor& v) {
  int arg = 0;
  for (int k = 1; k < v.dims[0]; ++k) {
    if (v[k] > v[arg]) arg = k;
  }
  return arg;
}

struct LabeledImage {
  Tensor image;
  int label;
};

}  // namespace

Tensor augment_image(const Tensor& image, int shift_y, int shift_x, double noise_sigma,
                     Rng& rng) {
  const int h = image.dims[0], w = image.dims[1];
  Tensor out({h, w});
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int sr = r - shift_y, sc = c - shift_x;
      const float base =
          (sr >= 0 && sr < h && sc >= 0 && sc < w) ? image.at2(sr, sc) : -1.0f;
      out.at2(r, c) = base + static_cast<float>(noise_sigma * rng.normal());
    }
  }
  return out;
}

SmallCnn train_scoring_classifier(std::uint64_t seed, const ScorerConfig& config) {
  Rng rng(seed);
  const std::vector<ShapeImage> canonical = canonical_images_normalized();

  auto make_set = [&](int per_class) {
    std::vector<LabeledImage> set;
    set.reserve(static_cast<std::size_t>(per_class) * kNumClasses);
    for (int k = 0; k < kNumClasses; ++k) {
      for (int i = 0; i < per_class; ++i) {
        const int dy = rng.uniform_int(2 * config.max_shift_px + 1) - config.max_shift_px;
        const int dx = rng.uniform_int(2 * config.max_shift_px + 1) - config.max_shift_px;
        set.push_back({augment_image(canonical[static_cast<std::size_t>(k)].pixels, dy, dx,
                                     config.noise_sigma, rng),
                       k});
      }
    }
    return set;
  };
  const std::vector<LabeledImage> train = make_set(config.train_per_class);
  const std::vector<LabeledImage> holdout = make_set(config.holdout_per_class);

  SmallCnn net = SmallCnn::init(kImageHeight, kImageWidth, rng, 0.05);
  std::vector<Tensor*> params;
  std::vector<const char*> names;
  net.visit([&](const char* name, Tensor& t) {
    names.push_back(name);
    params.push_back(&t);
  });
  std::vector<AdamState> states;
  for (Tensor* t : params) states.emplace_back(t->dims, config.learning_rate, 0.9, 0.999);

  std::vector<SmallCnn> chunk_grads(kBatchChunks);
  for (auto& g : chunk_grads) g = SmallCnn::zeros(kImageHeight, kImageWidth);
  SmallCnn grads = SmallCnn::zeros(kImageHeight, kImageWidth);
  std::vector<Tensor*> grad_refs;
  grads.visit([&](const char*, Tensor& t) { grad_refs.push_back(&t); });

  auto holdout_accuracy = [&] {
    const int n = static_cast<int>(holdout.size());
    std::vector<int> correct(kBatchChunks, 0);
    parallel_chunks(n, kBatchChunks, [&](int chunk, int begin, int end) {
      for (int i = begin; i < end; ++i) {
        const auto& s = holdout[static_cast<std::size_t>(i)];
        if (argmax(net.forward(s.image).probs) == s.label) {
          ++correct[static_cast<std::size_t>(chunk)];
        }
      }
    });
    int total = 0;
    for (int c : correct) total += c;
    return static_cast<double>(total) / n;
  };

  const int n = static_cast<int>(train.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  double best = 0.0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (int b0 = 0; b0 < n; b0 += config.batch_size) {
      const int b1 = std::min(n, b0 + config.batch_size);
      const int batch_n = b1 - b0;
      for (auto& g : chunk_grads) g.zero();
      std::vector<double> chunk_loss(kBatchChunks, 0.0);
      parallel_chunks(batch_n, kBatchChunks, [&](int chunk, int begin, int end) {
        for (int i = begin; i < end; ++i) {
          const auto& s = train[static_cast<std::size_t>(order[static_cast<std::size_t>(b0 + i)])];
          chunk_loss[static_cast<std::size_t>(chunk)] +=
              net.forward_backward_ce(s.image, s.label, chunk_grads[static_cast<std::size_t>(chunk)]);
        }
      });
      double batch_loss = 0.0;
      for (double l : chunk_loss) batch_loss += l;
      if (!std::isfinite(batch_loss)) {
        throw numeric_error("scoring classifier diverged at epoch " + std::to_string(epoch));
      }
      grads.zero();
      for (auto& g : chunk_grads) grads.add(g);
      const float inv = 1.0f / static_cast<float>(batch_n);
      grads.visit([&](const char*, Tensor& t) {
        for (long long i = 0; i < t.size(); ++i) t[i] *= inv;
      });
      for (std::size_t p = 0; p < params.size(); ++p) {
        adam_step(*params[p], *grad_refs[p], states[p], names[p]);
      }
    }
    best = holdout_accuracy();
    if (best >= config.target_accuracy) return net;
  }
  throw numeric_error("scoring classifier reached only " + std::to_string(best) + " after " +
                      std::to_string(config.max_epochs) +
                      " epochs; retry with a different seed or stronger augmentation");
}

std::vector<std::vector<double>> score_images(const std::vector<Tensor>& images,
                                              const SmallCnn& scorer) {
  std::vector<std::vector<double>> probs(images.size());
  const int n = static_cast<int>(images.size());
  parallel_chunks(n, kBatchChunks, [&](int, int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const auto fwd = scorer.forward(images[static_cast<std::size_t>(i)]);
      std::vector<double> p(static_cast<std::size_t>(kNumClasses));
      for (int k = 0; k < kNumClasses; ++k) p[static_cast<std::size_t>(k)] = fwd.probs[k];
      probs[static_cast<std::size_t>(i)] = std::move(p);
    }
  });
  return probs;
}

double inception_score_from_probs(const std::vector<std::vector<double>>& probs) {
  if (probs.empty()) throw data_error("inception score needs at least one scored image");
  const std::size_t k = probs.front().size();
  std::vector<double> marginal(k, 0.0);
  for (const auto& p : probs) {
    if (p.size() != k) throw shape_error("inconsistent score vector length");
    for (std::size_t j = 0; j < k; ++j) marginal[j] += p[j];
  }
  for (double& m : marginal) m /= static_cast<double>(probs.size());

  double mean_kl = 0.0;
  for (const auto& p : probs) {
    double kl = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (p[j] > 0.0) kl += p[j] * std::log(p[j] / marginal[j]);
    }
    mean_kl += kl;
  }
  mean_kl /= static_cast<double>(probs.size());
  return std::exp(mean_kl);
}

double inception_score(const std::vector<Tensor>& images, const SmallCnn& scorer) {
  return inception_score_from_probs(score_images(images, scorer));
}

std::vector<GeneratedSample> generate_samples(const GeneratorNet& gen,
                                              const std::vector<ReprSample>& pool, int per_class,
                                              GanMode mode, std::uint64_t seed) {
  std::vector<std::vector<const ReprSample*>> by_class(kNumClasses);
  for (const auto& r : pool) by_class[static_cast<std::size_t>(r.label)].push_back(&r);
  for (int k = 0; k < kNumClasses; ++k) {
    if (by_class[static_cast<std::size_t>(k)].empty()) {
      throw data_error(std::string("no representations available for class '") +
                       to_string(static_cast<ShapeClass>(k)) + "'");
    }
  }

  Rng rng(seed);
  const Tensor zero_repr({kReprDim});
  std::vector<GeneratedSample> samples;
  samples.reserve(static_cast<std::size_t>(per_class) * kNumClasses);
  for (int k = 0; k < kNumClasses; ++k) {
    const auto& candidates = by_class[static_cast<std::size_t>(k)];
    for (int j = 0; j < per_class; ++j) {
      const ReprSample* pick = candidates[static_cast<std::size_t>(
          rng.uniform_int(static_cast<int>(candidates.size())))];
      Tensor z({kNoiseDim});
      for (int i = 0; i < kNoiseDim; ++i) z[i] = static_cast<float>(rng.normal());
      GeneratedSample s;
      s.repr = mode == GanMode::Gan ? zero_repr : pick->repr;
      s.label = k;
      s.image = generator_forward(gen, s.repr, z);
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

double inception_accuracy(const std::vector<GeneratedSample>& samples,
                          const DiscriminatorNet& disc) {
  if (samples.empty()) throw data_error("inception accuracy needs at least one sample");
  const int n = static_cast<int>(samples.size());
  std::vector<int> correct(kBatchChunks, 0);
  parallel_chunks(n, kBatchChunks, [&](int chunk, int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const auto& s = samples[static_cast<std::size_t>(i)];
      const auto out = discriminator_forward(disc, s.image, s.repr);
      if (argmax(out.cls_probs) == s.label) ++correct[static_cast<std::size_t>(chunk)];
    }
  });
  int total = 0;
  for (int c : correct) total += c;
  return static_cast<double>(total) / n;
}

Tensor sample_grid(const GeneratorNet& gen, const std::vector<ReprSample>& pool, int n_per_class,
                   GanMode mode, std::uint64_t seed) {
  const auto samples = generate_samples(gen, pool, n_per_class, mode, seed);
  const int sep = 2;
  const int grid_h = kNumClasses * kImageHeight + (kNumClasses - 1) * sep;
  const int grid_w = n_per_class * kImageWidth + (n_per_class - 1) * sep;
  Tensor grid({grid_h, grid_w}, 1.0f);  // separators stay white
  for (int k = 0; k < kNumClasses; ++k) {
    for (int j = 0; j < n_per_class; ++j) {
      const Tensor& img = samples[static_cast<std::size_t>(k * n_per_class + j)].image;
      const int r0 = k * (kImageHeight + sep);
      const int c0 = j * (kImageWidth + sep);
      for (int r = 0; r < kImageHeight; ++r) {
        for (int c = 0; c < kImageWidth; ++c) {
          grid.at2(r0 + r, c0 + c) = 0.5f * (img.at2(r, c) + 1.0f);
        }
      }
    }
  }
  return grid;
}

std::string EvalReport::to_text() const {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof buf, "inception_score=%.6f\n", inception_score);
  out += buf;
  std::snprintf(buf, sizeof buf, "inception_accuracy=%.6f\n", inception_accuracy);
  out += buf;
  for (int k = 0; k < kNumClasses; ++k) {
    std::snprintf(buf, sizeof buf, "samples_%s=%d\n", to_string(static_cast<ShapeClass>(k)),
                  per_class_counts[static_cast<std::size_t>(k)]);
    out += buf;
  }
  out += "mode=" + mode + "\n";
  std::snprintf(buf, sizeof buf, "lambda=%g\n", lambda_align);
  out += buf;
  out += "eval_seed=" + std::to_string(eval_seed) + "\n";
  out += "gan_seed=" + std::to_string(gan_seed) + "\n";
  out += "encoder_seed=" + std::to_string(encoder_seed) + "\n";
  return out;
}

}  // namespace e2s
