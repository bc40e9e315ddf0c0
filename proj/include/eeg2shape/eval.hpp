#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eeg2shape/gan.hpp"
#include "eeg2shape/small_cnn.hpp"

namespace e2s {

struct ScorerConfig {
  int train_per_class = 240;
  int holdout_per_class = 60;
  int max_shift_px = 4;
  double noise_sigma = 0.05;
  double target_accuracy = 0.99;
  int max_epochs = 40;
  int batch_size = 50;
  double learning_rate = 5e-4;
};

// Random shift plus per-pixel Gaussian noise on a normalized image; shifted-in
// areas are background (-1).
Tensor augment_image(const Tensor& image, int shift_y, int shift_x, double noise_sigma, Rng& rng);

// Task classifier with the encoder architecture at [40,56], trained on
// augmented canonical shapes to the target held-out accuracy. Throws if the
// budget is exhausted.
SmallCnn train_scoring_classifier(std::uint64_t seed, const ScorerConfig& config = {});

std::vector<std::vector<double>> score_images(const std::vector<Tensor>& images,
                                              const SmallCnn& scorer);

// exp(mean KL(p(y|x) || p(y))), single split, natural log.
double inception_score_from_probs(const std::vector<std::vector<double>>& probs);
double inception_score(const std::vector<Tensor>& images, const SmallCnn& scorer);

struct GeneratedSample {
  Tensor image;  // [40,56] in (-1,1)
  int label = 0;
  Tensor repr;   // conditioning representation as seen by the discriminator
};

// Draws per_class conditioned samples per class from the representation pool,
// class-major, deterministic under the seed. In plain-gan mode the
// conditioning is zeroed.
std::vector<GeneratedSample> generate_samples(const GeneratorNet& gen,
                                              const std::vector<ReprSample>& pool, int per_class,
                                              GanMode mode, std::uint64_t seed);

// Fraction of samples whose class-head argmax equals the conditioning label,
// first-index tie-breaking.
double inception_accuracy(const std::vector<GeneratedSample>& samples,
                          const DiscriminatorNet& disc);

// 5 x n grid of generated samples (rows in class order) with 2-px separators,
// mapped to the raw [0,1] domain for PGM export.
Tensor sample_grid(const GeneratorNet& gen, const std::vector<ReprSample>& pool, int n_per_class,
                   GanMode mode, std::uint64_t seed);

struct EvalReport {
  double inception_score = 0.0;
  double inception_accuracy = 0.0;
  std::array<int, kNumClasses> per_class_counts{};
  std::string mode;
  double lambda_align = 0.0;
  std::uint64_t eval_seed = 0;
  std::uint64_t gan_seed = 0;
  std::uint64_t encoder_seed = 0;

  std::string to_text() const;
};

}  // namespace e2s
