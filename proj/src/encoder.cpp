#include "eeg2shape/encoder.hpp"

#include <cmath>

#include "eeg2shape/adam.hpp"
#include "eeg2shape/parallel.hpp"

namespace e2s {

namespace {

struct ParamRefs {
  std::vector<const char*> names;
  std::vector<Tensor*> tensors;
};

ParamRefs collect(SmallCnn& net) {
  ParamRefs refs;
  net.visit([&](const char* name, Tensor& t) {
    refs.names.push_back(name);
    refs.tensors.push_back(&t);
  });
  return refs;
}

int argmax5(const Tensor& probs) {
  int arg = 0;
  for (int k = 1; k < probs.dims[0]; ++k) {
    if (probs[k] > probs[arg]) arg = k;
  }
  return arg;
}

}  // namespace

SmallCnn init_encoder(Rng& rng) { return SmallCnn::init(kWindowLength, kChannels, rng, 0.05); }

double encoder_accuracy(const SmallCnn& net, const std::vector<EEGSegment>& segments) {
  if (segments.empty()) return 0.0;
  const int n = static_cast<int>(segments.size());
  std::vector<int> correct(kBatchChunks, 0);
  parallel_chunks(n, kBatchChunks, [&](int chunk, int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const auto& seg = segments[static_cast<std::size_t>(i)];
      const auto fwd = net.forward(seg.values);
      if (argmax5(fwd.probs) == seg.label_index()) ++correct[static_cast<std::size_t>(chunk)];
    }
  });
  int total = 0;
  for (int c : correct) total += c;
  return static_cast<double>(total) / n;
}

EncoderTrainResult train_encoder(const DatasetSplit& split, const EncoderTrainConfig& config) {
  if (split.train.empty()) throw data_error("train_encoder: empty training split");

  Rng rng(config.seed);
  EncoderTrainResult result;
  result.net = init_encoder(rng);
  SmallCnn& net = result.net;

  ParamRefs params = collect(net);
  std::vector<AdamState> states;
  for (Tensor* t : params.tensors) {
    states.emplace_back(t->dims, config.learning_rate, 0.9, 0.999);
  }

  const int n = static_cast<int>(split.train.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  std::vector<SmallCnn> chunk_grads(kBatchChunks);
  for (auto& g : chunk_grads) g = SmallCnn::zeros(kWindowLength, kChannels);
  SmallCnn grads = SmallCnn::zeros(kWindowLength, kChannels);
  ParamRefs grad_refs = collect(grads);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    long long train_correct = 0;

    for (int b0 = 0; b0 < n; b0 += config.batch_size) {
      const int b1 = std::min(n, b0 + config.batch_size);
      const int batch_n = b1 - b0;
      std::vector<double> chunk_loss(kBatchChunks, 0.0);
      std::vector<long long> chunk_correct(kBatchChunks, 0);
      for (auto& g : chunk_grads) g.zero();

      parallel_chunks(batch_n, kBatchChunks, [&](int chunk, int begin, int end) {
        for (int i = begin; i < end; ++i) {
          const auto& seg = split.train[static_cast<std::size_t>(order[static_cast<std::size_t>(b0 + i)])];
          int predicted = -1;
          const float loss = net.forward_backward_ce(
              seg.values, seg.label_index(), chunk_grads[static_cast<std::size_t>(chunk)],
              &predicted);
          chunk_loss[static_cast<std::size_t>(chunk)] += loss;
          if (predicted == seg.label_index()) ++chunk_correct[static_cast<std::size_t>(chunk)];
        }
      });

      double batch_loss = 0.0;
      for (int c = 0; c < kBatchChunks; ++c) {
        batch_loss += chunk_loss[static_cast<std::size_t>(c)];
        train_correct += chunk_correct[static_cast<std::size_t>(c)];
      }
      if (!std::isfinite(batch_loss)) {
        throw numeric_error("encoder training diverged at epoch " + std::to_string(epoch) +
                            " batch " + std::to_string(b0 / config.batch_size) +
                            " (non-finite loss)");
      }
      epoch_loss += batch_loss;

      grads.zero();
      for (auto& g : chunk_grads) grads.add(g);
      const float inv = 1.0f / static_cast<float>(batch_n);
      grads.visit([&](const char*, Tensor& t) {
        for (long long i = 0; i < t.size(); ++i) t[i] *= inv;
      });
      for (std::size_t p = 0; p < params.tensors.size(); ++p) {
        adam_step(*params.tensors[p], *grad_refs.tensors[p], states[p], params.names[p]);
      }
    }

    EncoderEpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / n;
    stats.train_accuracy = static_cast<double>(train_correct) / n;
    stats.test_accuracy = encoder_accuracy(net, split.test);
    result.history.push_back(stats);
    if (config.target_test_accuracy > 0.0 && stats.test_accuracy >= config.target_test_accuracy) {
      break;
    }
  }
  return result;
}

std::vector<ReprSample> extract_representations(const std::vector<EEGSegment>& segments,
                                                const SmallCnn& net) {
  std::vector<ReprSample> out(segments.size());
  const int n = static_cast<int>(segments.size());
  parallel_chunks(n, kBatchChunks, [&](int, int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const auto& seg = segments[static_cast<std::size_t>(i)];
      auto fwd = net.forward(seg.values);
      out[static_cast<std::size_t>(i)].repr = std::move(fwd.repr);
      out[static_cast<std::size_t>(i)].label = seg.label_index();
    }
  });
  return out;
}

Checkpoint encoder_checkpoint(const SmallCnn& net, const ChannelStats& stats,
                              std::uint64_t seed) {
  Checkpoint ck;
  ck.module = "encoder";
  ck.created_from_seed = seed;
  const_cast<SmallCnn&>(net).visit(
      [&](const char* name, Tensor& t) { ck.tensors.emplace_back(name, t); });
  ck.tensors.emplace_back("norm_mean", stats.mean);
  ck.tensors.emplace_back("norm_stddev", stats.stddev);
  return ck;
}

LoadedEncoder encoder_from_checkpoint(const Checkpoint& ck) {
  if (ck.module != "encoder") {
    throw checkpoint_error("expected an encoder checkpoint, found module '" + ck.module + "'");
  }
  LoadedEncoder loaded;
  loaded.net = SmallCnn::zeros(kWindowLength, kChannels);
  loaded.net.visit([&](const char* name, Tensor& t) {
    const Tensor& src = ck.tensor(name);
    if (src.dims != t.dims) {
      throw checkpoint_error(std::string("tensor '") + name + "' dims " +
                             dims_to_string(src.dims) + " do not match expected " +
                             dims_to_string(t.dims));
    }
    t = src;
  });
  loaded.stats.mean = ck.tensor("norm_mean");
  loaded.stats.stddev = ck.tensor("norm_stddev");
  if (loaded.stats.mean.dims != std::vector<int>{kChannels} ||
      loaded.stats.stddev.dims != std::vector<int>{kChannels}) {
    throw checkpoint_error("normalization stats must be [14]");
  }
  loaded.seed = ck.created_from_seed;
  return loaded;
}

}  // namespace e2s
