#include "eeg2shape/eeg_data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "eeg2shape/errors.hpp"
#include "eeg2shape/rng.hpp"

namespace e2s {

namespace {

const char* kHeader =
    "subject,session,trial,label,ch01,ch02,ch03,ch04,ch05,ch06,ch07,ch08,ch09,ch10,ch11,ch12,"
    "ch13,ch14";

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    throw data_error("line " + std::to_string(line_no) + ": malformed " + what + " '" + s + "'");
  }
}

float parse_float(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const float v = std::stof(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    throw data_error("line " + std::to_string(line_no) + ": malformed " + what + " '" + s + "'");
  }
}

}  // namespace

const char* to_string(ShapeClass c) {
  switch (c) {
    case ShapeClass::Circle: return "circle";
    case ShapeClass::Star: return "star";
    case ShapeClass::Triangle: return "triangle";
    case ShapeClass::Rhombus: return "rhombus";
    case ShapeClass::Rectangle: return "rectangle";
  }
  return "?";
}

ShapeClass parse_shape_class(const std::string& name) {
  for (int k = 0; k < kNumClasses; ++k) {
    if (name == to_string(static_cast<ShapeClass>(k))) return static_cast<ShapeClass>(k);
  }
  throw data_error("unknown label '" + name +
                   "' (valid: circle, star, triangle, rhombus, rectangle)");
}

Tensor one_hot(int label, int classes) {
  Tensor t({classes});
  t[label] = 1.0f;
  return t;
}

std::vector<EEGRecording> ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw data_error("line 1: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw data_error(std::string("line 1: expected header '") + kHeader + "'");
  }

  std::vector<EEGRecording> recordings;
  std::vector<float> rows;  // samples of the current group, row-major
  int cur_subject = 0, cur_session = 0, cur_trial = 0;
  ShapeClass cur_label = ShapeClass::Circle;
  bool have_group = false;

  auto flush = [&] {
    if (!have_group) return;
    EEGRecording rec;
    rec.subject_id = cur_subject;
    rec.session = cur_session;
    rec.trial = cur_trial;
    rec.label = cur_label;
    const int t = static_cast<int>(rows.size()) / kChannels;
    rec.samples = Tensor({t, kChannels}, rows);
    recordings.push_back(std::move(rec));
    rows.clear();
  };

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 4 + kChannels) {
      throw data_error("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(4 + kChannels) + " fields (14 channels), got " +
                       std::to_string(fields.size()));
    }
    const int subject = parse_int(fields[0], line_no, "subject");
    const int session = parse_int(fields[1], line_no, "session");
    const int trial = parse_int(fields[2], line_no, "trial");
    ShapeClass label;
    try {
      label = parse_shape_class(fields[3]);
    } catch (const data_error& e) {
      throw data_error("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_group || subject != cur_subject || session != cur_session || trial != cur_trial ||
        label != cur_label) {
      flush();
      cur_subject = subject;
      cur_session = session;
      cur_trial = trial;
      cur_label = label;
      have_group = true;
    }
    for (int c = 0; c < kChannels; ++c) {
      rows.push_back(parse_float(fields[4 + c], line_no, "channel value"));
    }
  }
  flush();
  return recordings;
}

void write_recordings_csv(const std::string& path, const std::vector<EEGRecording>& recordings) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << kHeader << "\n";
  char buf[64];
  for (const auto& rec : recordings) {
    const int t_len = rec.samples.dims[0];
    for (int t = 0; t < t_len; ++t) {
      out << rec.subject_id << ',' << rec.session << ',' << rec.trial << ','
          << to_string(rec.label);
      for (int c = 0; c < kChannels; ++c) {
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(rec.samples.at2(t, c)));
        out << ',' << buf;
      }
      out << '\n';
    }
  }
}

std::vector<EEGSegment> segment_stream(const EEGRecording& rec, int window, double overlap) {
  if (window < 2) throw data_error("segment window must be >= 2");
  if (overlap < 0.0 || overlap >= 1.0) throw data_error("overlap must be in [0, 1)");
  const int step = static_cast<int>(std::lround(window * (1.0 - overlap)));
  if (step < 1) throw data_error("segment step must be >= 1");

  const int t_len = rec.samples.dims[0];
  std::vector<EEGSegment> segments;
  if (t_len < window) return segments;
  const int count = (t_len - window) / step + 1;
  segments.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    const int start = s * step;
    EEGSegment seg;
    seg.values = Tensor({window, kChannels});
    for (int t = 0; t < window; ++t) {
      for (int c = 0; c < kChannels; ++c) {
        seg.values.at2(t, c) = rec.samples.at2(start + t, c);
      }
    }
    seg.label = one_hot(static_cast<int>(rec.label));
    segments.push_back(std::move(seg));
  }
  return segments;
}

ChannelStats compute_channel_stats(const std::vector<EEGSegment>& train_segments) {
  ChannelStats stats{Tensor({kChannels}), Tensor({kChannels})};
  std::vector<double> sum(kChannels, 0.0), sq(kChannels, 0.0);
  long long count = 0;
  for (const auto& seg : train_segments) {
    const int rows = seg.values.dims[0];
    for (int t = 0; t < rows; ++t) {
      for (int c = 0; c < kChannels; ++c) sum[c] += seg.values.at2(t, c);
    }
    count += rows;
  }
  if (count == 0) throw data_error("cannot compute channel stats from empty training split");
  for (int c = 0; c < kChannels; ++c) stats.mean[c] = static_cast<float>(sum[c] / count);
  for (const auto& seg : train_segments) {
    const int rows = seg.values.dims[0];
    for (int t = 0; t < rows; ++t) {
      for (int c = 0; c < kChannels; ++c) {
        const double d = seg.values.at2(t, c) - stats.mean[c];
        sq[c] += d * d;
      }
    }
  }
  for (int c = 0; c < kChannels; ++c) {
    stats.stddev[c] = static_cast<float>(std::sqrt(sq[c] / count));
  }
  return stats;
}

std::vector<EEGSegment> normalize_segments(std::vector<EEGSegment> segments,
                                           const ChannelStats& stats) {
  for (auto& seg : segments) {
    const int rows = seg.values.dims[0];
    for (int t = 0; t < rows; ++t) {
      for (int c = 0; c < kChannels; ++c) {
        const float sd = std::max(stats.stddev[c], 1e-8f);
        seg.values.at2(t, c) = (seg.values.at2(t, c) - stats.mean[c]) / sd;
      }
    }
  }
  return segments;
}

DatasetSplit split_dataset(std::vector<EEGSegment> segments, double train_fraction,
                           std::uint64_t seed) {
  if (segments.size() < 5) throw data_error("split_dataset needs at least 5 segments");
  Rng rng(seed);
  rng.shuffle(segments);
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(segments.size())));
  DatasetSplit split;
  split.seed = seed;
  split.train.assign(segments.begin(), segments.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(segments.begin() + static_cast<std::ptrdiff_t>(n_train), segments.end());
  return split;
}

namespace {

// Voss-McCartney style 1/f noise: octave rows of held white noise, the row
// picked by the trailing zeros of the sample counter.
class PinkNoise {
 public:
  PinkNoise(Rng& rng) : rng_(rng) {
    for (double& r : rows_) r = rng_.normal();
  }

  double next() {
    ++counter_;
    int j = 0;
    std::uint64_t c = counter_;
    while ((c & 1) == 0 && j < kRows - 1) {
      c >>= 1;
      ++j;
    }
    rows_[static_cast<std::size_t>(j)] = rng_.normal();
    double s = 0.0;
    for (double r : rows_) s += r;
    return s / std::sqrt(static_cast<double>(kRows));
  }

 private:
  static constexpr int kRows = 6;
  Rng& rng_;
  double rows_[kRows] = {};
  std::uint64_t counter_ = 0;
};

}  // namespace

std::vector<EEGRecording> synth_eeg(int n_trials_per_class, std::uint64_t seed,
                                    const SynthConfig& config) {
  if (n_trials_per_class < 1) throw data_error("synth_eeg needs n_trials_per_class >= 1");
  Rng rng(seed);

  // Phases are drawn once per (class, channel), before any noise draws.
  std::vector<double> phases(static_cast<std::size_t>(kNumClasses) * kChannels);
  for (auto& p : phases) p = rng.uniform(0.0, 2.0 * M_PI);

  std::vector<EEGRecording> recordings;
  recordings.reserve(static_cast<std::size_t>(kNumClasses) * n_trials_per_class);
  for (int trial = 0; trial < n_trials_per_class; ++trial) {
    for (int k = 0; k < kNumClasses; ++k) {
      EEGRecording rec;
      rec.subject_id = 1;
      rec.session = 1;
      rec.trial = trial * kNumClasses + k + 1;
      rec.label = static_cast<ShapeClass>(k);
      rec.samples = Tensor({config.trial_samples, kChannels});
      const double freq = config.base_freq_hz + config.freq_step_hz * k;
      std::vector<PinkNoise> noise;
      noise.reserve(kChannels);
      for (int c = 0; c < kChannels; ++c) noise.emplace_back(rng);
      for (int t = 0; t < config.trial_samples; ++t) {
        for (int c = 0; c < kChannels; ++c) {
          // Phase kept modulo one cycle so integer frequencies repeat exactly.
          const double cycles = std::fmod(freq * t / kSampleRateHz, 1.0);
          const double angle = 2.0 * M_PI * cycles + phases[static_cast<std::size_t>(k) * kChannels + c];
          const double value = config.amplitude * std::sin(angle) +
                               config.noise_amplitude * noise[static_cast<std::size_t>(c)].next();
          rec.samples.at2(t, c) = static_cast<float>(value);
        }
      }
      recordings.push_back(std::move(rec));
    }
  }
  return recordings;
}

}  // namespace e2s
