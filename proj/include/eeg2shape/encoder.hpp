#pragma once

#include <cstdint>
#include <vector>

#include "eeg2shape/checkpoint.hpp"
#include "eeg2shape/eeg_data.hpp"
#include "eeg2shape/small_cnn.hpp"

namespace e2s {

// Latent representation paired with its class label.
struct ReprSample {
  Tensor repr;  // [40]
  int label = 0;
};

struct EncoderTrainConfig {
  int epochs = 1000;
  int batch_size = 50;
  double learning_rate = 5e-4;
  std::uint64_t seed = 0;
  // When > 0, training stops at the first epoch whose test accuracy reaches
  // this value.
  double target_test_accuracy = 0.0;
};

struct EncoderEpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct EncoderTrainResult {
  SmallCnn net;
  std::vector<EncoderEpochStats> history;
};

SmallCnn init_encoder(Rng& rng);

// Softmax cross-entropy training with Adam; deterministic under the seed.
EncoderTrainResult train_encoder(const DatasetSplit& split, const EncoderTrainConfig& config);

double encoder_accuracy(const SmallCnn& net, const std::vector<EEGSegment>& segments);

std::vector<ReprSample> extract_representations(const std::vector<EEGSegment>& segments,
                                                const SmallCnn& net);

Checkpoint encoder_checkpoint(const SmallCnn& net, const ChannelStats& stats, std::uint64_t seed);

struct LoadedEncoder {
  SmallCnn net;
  ChannelStats stats;
  std::uint64_t seed = 0;
};

LoadedEncoder encoder_from_checkpoint(const Checkpoint& ck);

}  // namespace e2s
