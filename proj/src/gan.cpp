#include "eeg2shape/gan.hpp"

#include <cmath>
#include <cstdio>

#include "eeg2shape/adam.hpp"
#include "eeg2shape/errors.hpp"

namespace e2s {

const char* to_string(GanMode mode) {
  switch (mode) {
    case GanMode::Full: return "full";
    case GanMode::Acgan: return "acgan";
    case GanMode::Cgan: return "cgan";
    case GanMode::Gan: return "gan";
  }
  return "?";
}

GanMode parse_gan_mode(const std::string& name) {
  if (name == "full") return GanMode::Full;
  if (name == "acgan") return GanMode::Acgan;
  if (name == "cgan") return GanMode::Cgan;
  if (name == "gan") return GanMode::Gan;
  throw config_error("unknown mode '" + name + "' (valid: full, acgan, cgan, gan)");
}

namespace {

template <typename Net>
struct ParamRefs {
  std::vector<const char*> names;
  std::vector<Tensor*> tensors;

  explicit ParamRefs(Net& net) {
    net.visit([&](const char* name, Tensor& t) {
      names.push_back(name);
      tensors.push_back(&t);
    });
  }
};

template <typename Net>
void apply_adam(ParamRefs<Net>& params, ParamRefs<Net>& grads, std::vector<AdamState>& states) {
  for (std::size_t p = 0; p < params.tensors.size(); ++p) {
    adam_step(*params.tensors[p], *grads.tensors[p], states[p], params.names[p]);
  }
}

}  // namespace

GanTrainResult train_gan(const std::vector<ReprSample>& reprs,
                         const std::vector<ShapeImage>& canonical_normalized,
                         const GanTrainConfig& config) {
  if (reprs.empty()) throw data_error("train_gan: no conditioning representations");
  if (canonical_normalized.size() != static_cast<std::size_t>(kNumClasses)) {
    throw shape_error("train_gan expects one canonical image per class");
  }
  for (int k = 0; k < kNumClasses; ++k) {
    const auto& img = canonical_normalized[static_cast<std::size_t>(k)];
    if (img.domain != ShapeImage::Domain::Normalized ||
        img.label != static_cast<ShapeClass>(k)) {
      throw shape_error("canonical images must be normalized and in class order");
    }
  }

  Rng rng(config.seed);
  GanTrainResult result;
  result.gen = GeneratorNet::init(rng, 0.02);
  result.disc = DiscriminatorNet::init(rng, 0.02);

  ParamRefs<GeneratorNet> g_params(result.gen);
  ParamRefs<DiscriminatorNet> d_params(result.disc);
  std::vector<AdamState> g_states, d_states;
  for (Tensor* t : g_params.tensors) {
    g_states.emplace_back(t->dims, config.learning_rate, config.beta1, config.beta2);
  }
  for (Tensor* t : d_params.tensors) {
    d_states.emplace_back(t->dims, config.learning_rate, config.beta1, config.beta2);
  }

  GeneratorNet g_grads = GeneratorNet::zeros();
  DiscriminatorNet d_grads = DiscriminatorNet::zeros();
  ParamRefs<GeneratorNet> g_grad_refs(g_grads);
  ParamRefs<DiscriminatorNet> d_grad_refs(d_grads);

  const int n = static_cast<int>(reprs.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  auto draw_noise = [&rng] {
    Tensor z({kNoiseDim});
    for (int i = 0; i < kNoiseDim; ++i) z[i] = static_cast<float>(rng.normal());
    return z;
  };

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    GanEpochStats stats;
    stats.epoch = epoch;
    int batches = 0;

    for (int b0 = 0; b0 < n; b0 += config.batch_size) {
      const int b1 = std::min(n, b0 + config.batch_size);
      std::vector<GanSample> batch;
      batch.reserve(static_cast<std::size_t>(b1 - b0));
      for (int i = b0; i < b1; ++i) {
        const ReprSample& r = reprs[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        GanSample s;
        s.repr = r.repr;
        s.label = r.label;
        s.noise = draw_noise();
        s.real_image = canonical_normalized[static_cast<std::size_t>(r.label)].pixels;
        batch.push_back(std::move(s));
      }

      d_grads.zero();
      const LossBreakdown d_loss = discriminator_loss(batch, result.gen, result.disc, config,
                                                      &d_grads);
      if (!std::isfinite(d_loss.total)) {
        throw numeric_error("gan training diverged at epoch " + std::to_string(epoch) +
                            " batch " + std::to_string(batches) + " (non-finite L_d)");
      }
      apply_adam(d_params, d_grad_refs, d_states);

      for (auto& s : batch) s.noise = draw_noise();
      g_grads.zero();
      const LossBreakdown g_loss = generator_loss(batch, result.gen, result.disc, config,
                                                  &g_grads);
      if (!std::isfinite(g_loss.total)) {
        throw numeric_error("gan training diverged at epoch " + std::to_string(epoch) +
                            " batch " + std::to_string(batches) + " (non-finite L_g)");
      }
      apply_adam(g_params, g_grad_refs, g_states);

      stats.g_loss += g_loss.total;
      stats.d_loss += d_loss.total;
      stats.mean_s_r += g_loss.mean_s_r;
      stats.d_real_acc += d_loss.d_real_acc;
      stats.d_fake_acc += d_loss.d_fake_acc;
      stats.class_acc += d_loss.class_acc;
      ++batches;
    }

    stats.g_loss /= batches;
    stats.d_loss /= batches;
    stats.mean_s_r /= batches;
    stats.d_real_acc /= batches;
    stats.d_fake_acc /= batches;
    stats.class_acc /= batches;
    result.history.push_back(stats);
  }
  return result;
}

Checkpoint gan_checkpoint(const GeneratorNet& gen, const DiscriminatorNet& disc,
                          std::uint64_t seed, GanMode mode, double lambda_align) {
  Checkpoint ck;
  ck.module = "gan";
  ck.created_from_seed = seed;
  ck.set_meta("mode", to_string(mode));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lambda_align);
  ck.set_meta("lambda", buf);
  const_cast<GeneratorNet&>(gen).visit(
      [&](const char* name, Tensor& t) { ck.tensors.emplace_back(name, t); });
  const_cast<DiscriminatorNet&>(disc).visit(
      [&](const char* name, Tensor& t) { ck.tensors.emplace_back(name, t); });
  return ck;
}

LoadedGan gan_from_checkpoint(const Checkpoint& ck) {
  if (ck.module != "gan") {
    throw checkpoint_error("expected a gan checkpoint, found module '" + ck.module + "'");
  }
  LoadedGan loaded;
  loaded.gen = GeneratorNet::zeros();
  loaded.disc = DiscriminatorNet::zeros();
  auto assign = [&ck](const char* name, Tensor& t) {
    const Tensor& src = ck.tensor(name);
    if (src.dims != t.dims) {
      throw checkpoint_error(std::string("tensor '") + name + "' dims " +
                             dims_to_string(src.dims) + " do not match expected " +
                             dims_to_string(t.dims));
    }
    t = src;
  };
  loaded.gen.visit(assign);
  loaded.disc.visit(assign);
  const std::string* mode = ck.find_meta("mode");
  if (!mode) throw checkpoint_error("gan checkpoint is missing meta.mode");
  loaded.mode = parse_gan_mode(*mode);
  const std::string* lambda = ck.find_meta("lambda");
  if (!lambda) throw checkpoint_error("gan checkpoint is missing meta.lambda");
  loaded.lambda_align = std::stod(*lambda);
  loaded.seed = ck.created_from_seed;
  return loaded;
}

}  // namespace e2s
