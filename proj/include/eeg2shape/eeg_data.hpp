#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eeg2shape/tensor.hpp"

namespace e2s {

// Thrown on malformed input files; messages carry the offending line number.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ShapeClass { Circle = 0, Star, Triangle, Rhombus, Rectangle };

inline constexpr int kNumClasses = 5;
inline constexpr int kChannels = 14;
inline constexpr int kWindowLength = 10;
inline constexpr int kSampleRateHz = 128;

const char* to_string(ShapeClass c);
// Throws data_error listing the valid labels.
ShapeClass parse_shape_class(const std::string& name);

// One contiguous stimulus trial: samples [T, 14] at 128 Hz.
struct EEGRecording {
  int subject_id = 0;
  int session = 0;
  int trial = 0;
  ShapeClass label = ShapeClass::Circle;
  Tensor samples;
};

// One model input window: values [10, 14], label one-hot [5].
struct EEGSegment {
  Tensor values;
  Tensor label;

  int label_index() const {
    for (int i = 0; i < label.dims[0]; ++i) {
      if (label[i] == 1.0f) return i;
    }
    return -1;
  }
};

Tensor one_hot(int label, int classes = kNumClasses);

struct DatasetSplit {
  std::vector<EEGSegment> train;
  std::vector<EEGSegment> test;
  std::uint64_t seed = 0;
};

// Per-channel standardization statistics, computed on the training split.
struct ChannelStats {
  Tensor mean;
  Tensor stddev;
};

// CSV with header subject,session,trial,label,ch01..ch14; one row per sample,
// rows grouped by (subject,session,trial) in time order. One recording per
// contiguous (subject,session,trial,label) group.
std::vector<EEGRecording> ingest_csv(const std::string& path);

void write_recordings_csv(const std::string& path, const std::vector<EEGRecording>& recordings);

// Sliding windows: step = round(window*(1-overlap)); a recording shorter than
// the window yields no segments.
std::vector<EEGSegment> segment_stream(const EEGRecording& rec, int window = kWindowLength,
                                       double overlap = 0.5);

ChannelStats compute_channel_stats(const std::vector<EEGSegment>& train_segments);

// Per-channel z-score with std floored at 1e-8.
std::vector<EEGSegment> normalize_segments(std::vector<EEGSegment> segments,
                                           const ChannelStats& stats);

// Uniform random permutation under the seed; the first round(fraction*n)
// segments become the training split.
DatasetSplit split_dataset(std::vector<EEGSegment> segments, double train_fraction,
                           std::uint64_t seed);

// Class-conditioned synthetic EEG. Channel c of class k emits
// amplitude*sin(2*pi*f_k*t/rate + phi_kc) + pink noise, f_k = base + step*k.
struct SynthConfig {
  double amplitude = 1.0;
  double noise_amplitude = 0.3;
  double base_freq_hz = 4.0;
  double freq_step_hz = 3.0;
  int trial_samples = 640;
};

std::vector<EEGRecording> synth_eeg(int n_trials_per_class, std::uint64_t seed,
                                    const SynthConfig& config = {});

}  // namespace e2s
