#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "eeg2shape/eeg_data.hpp"
#include "eeg2shape/errors.hpp"

using namespace e2s;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string header_line() {
  return "subject,session,trial,label,ch01,ch02,ch03,ch04,ch05,ch06,ch07,ch08,ch09,ch10,ch11,"
         "ch12,ch13,ch14";
}

std::string sample_row(int subject, int session, int trial, const std::string& label,
                       float value) {
  std::string row = std::to_string(subject) + "," + std::to_string(session) + "," +
                    std::to_string(trial) + "," + label;
  for (int c = 0; c < 14; ++c) row += "," + std::to_string(value + c);
  return row;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const auto& l : lines) out << l << "\n";
}

EEGRecording make_recording(int t_len, ShapeClass label, float fill = 0.0f) {
  EEGRecording rec;
  rec.subject_id = 1;
  rec.session = 1;
  rec.trial = 1;
  rec.label = label;
  rec.samples = Tensor({t_len, kChannels}, fill);
  return rec;
}

}  // namespace

TEST_CASE("ingest groups contiguous rows into one recording") {
  const std::string path = temp_path("e2s_ingest_one.csv");
  std::vector<std::string> lines{header_line()};
  for (int t = 0; t < 20; ++t) lines.push_back(sample_row(1, 1, 1, "circle", 0.5f));
  write_lines(path, lines);

  const auto recs = ingest_csv(path);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].samples.dims == std::vector<int>{20, 14});
  CHECK(recs[0].label == ShapeClass::Circle);
}

TEST_CASE("ingest of a header-only file yields an empty list") {
  const std::string path = temp_path("e2s_ingest_empty.csv");
  write_lines(path, {header_line()});
  CHECK(ingest_csv(path).empty());
}

TEST_CASE("ingest: two 640-row trials become two recordings") {
  const std::string path = temp_path("e2s_ingest_two.csv");
  std::vector<std::string> lines{header_line()};
  for (int t = 0; t < 640; ++t) lines.push_back(sample_row(1, 1, 1, "star", 0.1f));
  for (int t = 0; t < 640; ++t) lines.push_back(sample_row(1, 1, 2, "rhombus", 0.2f));
  write_lines(path, lines);

  const auto recs = ingest_csv(path);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].samples.dims[0] == 640);  // five seconds at 128 Hz
  CHECK(recs[1].samples.dims[0] == 640);
  CHECK(recs[0].label == ShapeClass::Star);
  CHECK(recs[1].label == ShapeClass::Rhombus);
}

TEST_CASE("ingest errors carry line numbers and list valid labels") {
  const std::string path = temp_path("e2s_ingest_bad.csv");

  SUBCASE("malformed row") {
    write_lines(path, {header_line(), sample_row(1, 1, 1, "circle", 0.0f), "1,1,oops"});
    try {
      ingest_csv(path);
      FAIL("expected data_error");
    } catch (const data_error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("unknown label") {
    write_lines(path, {header_line(), sample_row(1, 1, 1, "square", 0.0f)});
    try {
      ingest_csv(path);
      FAIL("expected data_error");
    } catch (const data_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("line 2") != std::string::npos);
      for (const char* label : {"circle", "star", "triangle", "rhombus", "rectangle"}) {
        CHECK(msg.find(label) != std::string::npos);
      }
    }
  }
  SUBCASE("wrong channel count") {
    write_lines(path, {header_line(), "1,1,1,circle,0.5,0.5"});
    CHECK_THROWS_AS(ingest_csv(path), data_error);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(ingest_csv(temp_path("nope.csv")), io_error); }
}

TEST_CASE("segment_stream window arithmetic") {
  SUBCASE("T=20 gives 3 segments at offsets 0, 5, 10") {
    EEGRecording rec = make_recording(20, ShapeClass::Triangle);
    for (int t = 0; t < 20; ++t) rec.samples.at2(t, 0) = static_cast<float>(t);
    const auto segs = segment_stream(rec, 10, 0.5);
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].values.at2(0, 0) == 0.0f);
    CHECK(segs[1].values.at2(0, 0) == 5.0f);
    CHECK(segs[2].values.at2(0, 0) == 10.0f);
    for (const auto& s : segs) CHECK(s.label_index() == 2);
  }
  SUBCASE("T equal to the window gives exactly one segment") {
    CHECK(segment_stream(make_recording(10, ShapeClass::Circle)).size() == 1);
  }
  SUBCASE("T=640 gives 127 segments") {
    // floor((640-10)/5)+1, computed independently.
    const int expected = (640 - 10) / 5 + 1;
    CHECK(expected == 127);
    CHECK(segment_stream(make_recording(640, ShapeClass::Circle)).size() == 127);
  }
  SUBCASE("T shorter than the window gives an empty list") {
    CHECK(segment_stream(make_recording(9, ShapeClass::Circle)).empty());
  }
}

TEST_CASE("overlapping segments share their halves") {
  EEGRecording rec = make_recording(25, ShapeClass::Star);
  for (int t = 0; t < 25; ++t) {
    for (int c = 0; c < kChannels; ++c) rec.samples.at2(t, c) = static_cast<float>(t * 100 + c);
  }
  const auto segs = segment_stream(rec);
  REQUIRE(segs.size() >= 2);
  for (std::size_t s = 0; s + 1 < segs.size(); ++s) {
    for (int t = 0; t < 5; ++t) {
      for (int c = 0; c < kChannels; ++c) {
        CHECK(segs[s].values.at2(t + 5, c) == segs[s + 1].values.at2(t, c));
      }
    }
  }
}

TEST_CASE("normalization maps train stats to zero mean unit std") {
  auto segments = segment_stream(make_recording(200, ShapeClass::Circle));
  int counter = 0;
  for (auto& seg : segments) {
    for (int t = 0; t < kWindowLength; ++t) {
      for (int c = 0; c < kChannels; ++c) {
        seg.values.at2(t, c) = static_cast<float>(std::sin(0.1 * ++counter) * (c + 1) + c);
      }
    }
  }
  const ChannelStats stats = compute_channel_stats(segments);
  const auto normalized = normalize_segments(segments, stats);

  // Recompute the stats directly from the normalized values.
  for (int c = 0; c < kChannels; ++c) {
    double sum = 0, count = 0;
    for (const auto& seg : normalized) {
      for (int t = 0; t < kWindowLength; ++t) {
        sum += seg.values.at2(t, c);
        ++count;
      }
    }
    const double mean = sum / count;
    CHECK(std::abs(mean) < 1e-6);
    double sq = 0;
    for (const auto& seg : normalized) {
      for (int t = 0; t < kWindowLength; ++t) {
        sq += (seg.values.at2(t, c) - mean) * (seg.values.at2(t, c) - mean);
      }
    }
    CHECK(std::abs(std::sqrt(sq / count) - 1.0) < 1e-6);
  }
}

TEST_CASE("normalization maps a constant channel to zeros") {
  auto segments = segment_stream(make_recording(40, ShapeClass::Circle, 7.5f));
  const ChannelStats stats = compute_channel_stats(segments);
  const auto normalized = normalize_segments(segments, stats);
  for (const auto& seg : normalized) {
    for (long long i = 0; i < seg.values.size(); ++i) CHECK(seg.values[i] == 0.0f);
  }
}

TEST_CASE("already standardized data passes through unchanged") {
  auto segments = segment_stream(make_recording(40, ShapeClass::Circle));
  // Alternate -1/+1 per time step: mean 0, std 1 per channel.
  for (auto& seg : segments) {
    for (int t = 0; t < kWindowLength; ++t) {
      for (int c = 0; c < kChannels; ++c) seg.values.at2(t, c) = (t % 2 == 0) ? 1.0f : -1.0f;
    }
  }
  const ChannelStats stats = compute_channel_stats(segments);
  const auto normalized = normalize_segments(segments, stats);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (long long j = 0; j < segments[i].values.size(); ++j) {
      CHECK(normalized[i].values[j] ==
            doctest::Approx(segments[i].values[j]).epsilon(1e-6));
    }
  }
}

TEST_CASE("split_dataset proportions and determinism") {
  auto segments = segment_stream(make_recording(55, ShapeClass::Circle));
  REQUIRE(segments.size() == 10);
  const DatasetSplit split = split_dataset(segments, 0.8, 99);
  CHECK(split.train.size() == 8);
  CHECK(split.test.size() == 2);

  const DatasetSplit again = split_dataset(segments, 0.8, 99);
  REQUIRE(again.train.size() == split.train.size());
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    for (long long j = 0; j < split.train[i].values.size(); ++j) {
      CHECK(split.train[i].values[j] == again.train[i].values[j]);
    }
  }
}

TEST_CASE("split_dataset is disjoint and exhaustive") {
  std::vector<EEGSegment> segments;
  for (int i = 0; i < 23; ++i) {
    EEGSegment seg;
    seg.values = Tensor({kWindowLength, kChannels}, static_cast<float>(i));
    seg.label = one_hot(i % kNumClasses);
    segments.push_back(std::move(seg));
  }
  const DatasetSplit split = split_dataset(segments, 0.8, 5);
  CHECK(split.train.size() + split.test.size() == 23);
  std::multiset<float> seen;
  for (const auto& s : split.train) seen.insert(s.values[0]);
  for (const auto& s : split.test) seen.insert(s.values[0]);
  CHECK(seen.size() == 23);
  for (int i = 0; i < 23; ++i) CHECK(seen.count(static_cast<float>(i)) == 1);
}

TEST_CASE("split keeps class proportions roughly balanced across seeds") {
  // Monte-Carlo property: with >= 500 segments the train-split class share
  // stays within 10 percentage points of the overall share.
  std::vector<EEGSegment> segments;
  for (int i = 0; i < 600; ++i) {
    EEGSegment seg;
    seg.values = Tensor({kWindowLength, kChannels});
    seg.label = one_hot(i % kNumClasses);
    segments.push_back(std::move(seg));
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const DatasetSplit split = split_dataset(segments, 0.8, seed);
    std::array<int, kNumClasses> counts{};
    for (const auto& s : split.train) ++counts[static_cast<std::size_t>(s.label_index())];
    for (int k = 0; k < kNumClasses; ++k) {
      const double share = static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                           static_cast<double>(split.train.size());
      CHECK(std::abs(share - 0.2) < 0.1);
    }
  }
}

TEST_CASE("every segment label is a valid one-hot vector") {
  const auto recs = synth_eeg(2, 31);
  for (const auto& rec : recs) {
    for (const auto& seg : segment_stream(rec)) {
      int ones = 0, zeros = 0;
      for (int i = 0; i < kNumClasses; ++i) {
        if (seg.label[i] == 1.0f) ++ones;
        if (seg.label[i] == 0.0f) ++zeros;
      }
      CHECK(ones == 1);
      CHECK(zeros == kNumClasses - 1);
    }
  }
}

TEST_CASE("synth_eeg is deterministic") {
  const auto a = synth_eeg(2, 123);
  const auto b = synth_eeg(2, 123);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].samples.size() == b[i].samples.size());
    for (long long j = 0; j < a[i].samples.size(); ++j) {
      CHECK(a[i].samples[j] == b[i].samples[j]);
    }
  }
}

TEST_CASE("noise-free synthetic classes are exactly periodic") {
  SynthConfig config;
  config.noise_amplitude = 0.0;
  const auto recs = synth_eeg(1, 7, config);
  REQUIRE(recs.size() == 5);
  // Class 0 at 4 Hz repeats every 32 samples, class 4 at 16 Hz every 8.
  const auto check_period = [](const EEGRecording& rec, int period) {
    const int t_len = rec.samples.dims[0];
    for (int t = 0; t + period < t_len; ++t) {
      for (int c = 0; c < kChannels; ++c) {
        CHECK(rec.samples.at2(t, c) == rec.samples.at2(t + period, c));
      }
    }
  };
  check_period(recs[0], 32);
  check_period(recs[4], 8);
}

TEST_CASE("ingest-segment-split pipeline is a pure function of bytes and seed") {
  const std::string path = temp_path("e2s_purity.csv");
  write_recordings_csv(path, synth_eeg(1, 42));

  auto run = [&] {
    std::vector<EEGSegment> segments;
    for (const auto& rec : ingest_csv(path)) {
      for (auto& s : segment_stream(rec)) segments.push_back(std::move(s));
    }
    return split_dataset(segments, 0.8, 9);
  };
  const DatasetSplit a = run();
  const DatasetSplit b = run();
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    for (long long j = 0; j < a.train[i].values.size(); ++j) {
      CHECK(a.train[i].values[j] == b.train[i].values[j]);
    }
  }
}

TEST_CASE("csv round trip preserves sample values") {
  const std::string path = temp_path("e2s_roundtrip.csv");
  const auto recs = synth_eeg(1, 8);
  write_recordings_csv(path, recs);
  const auto back = ingest_csv(path);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].label == recs[i].label);
    REQUIRE(back[i].samples.size() == recs[i].samples.size());
    for (long long j = 0; j < recs[i].samples.size(); ++j) {
      CHECK(back[i].samples[j] == recs[i].samples[j]);
    }
  }
}
