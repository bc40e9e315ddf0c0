#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eeg2shape/checkpoint.hpp"
#include "eeg2shape/eeg_data.hpp"
#include "eeg2shape/encoder.hpp"
#include "eeg2shape/errors.hpp"
#include "eeg2shape/eval.hpp"
#include "eeg2shape/gan.hpp"
#include "eeg2shape/pgm.hpp"
#include "eeg2shape/run_config.hpp"
#include "eeg2shape/stimuli.hpp"

namespace {

using namespace e2s;

// Config-file fallback for flags not given on the command line.
struct ConfigBinding {
  CLI::App* cmd = nullptr;
  std::string config_path;
  std::vector<std::string> keys;
  std::map<std::string, std::function<void(const std::string&)>> setters;

  void bind(CLI::App* command) {
    cmd = command;
    cmd->add_option("--config", config_path, "key=value config file mirroring the flags");
  }

  template <typename T>
  void add(const std::string& key, T& target) {
    keys.push_back(key);
    setters[key] = [key, &target](const std::string& value) {
      if constexpr (std::is_same_v<T, std::string>) {
        target = value;
      } else if constexpr (std::is_same_v<T, int>) {
        target = std::stoi(value);
      } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        target = std::stoull(value);
      } else {
        target = std::stod(value);
      }
    };
  }

  void apply() {
    if (config_path.empty()) return;
    for (const auto& [key, value] : read_run_config(config_path, keys)) {
      if (cmd->count("--" + key) > 0) continue;  // explicit flags win
      try {
        setters.at(key)(value);
      } catch (const std::exception&) {
        throw config_error("config key '" + key + "': bad value '" + value + "'");
      }
    }
  }
};

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<EEGSegment> segments_from_csv(const std::string& path) {
  std::vector<EEGSegment> segments;
  for (const auto& rec : ingest_csv(path)) {
    auto segs = segment_stream(rec);
    for (auto& s : segs) segments.push_back(std::move(s));
  }
  if (segments.empty()) throw data_error("no segments could be built from '" + path + "'");
  return segments;
}

void write_encoder_history(const std::string& path, const std::vector<EncoderEpochStats>& hist) {
  std::string csv = "epoch,train_loss,train_accuracy,test_accuracy\n";
  for (const auto& h : hist) {
    csv += std::to_string(h.epoch) + "," + format_g(h.train_loss) + "," +
           format_g(h.train_accuracy) + "," + format_g(h.test_accuracy) + "\n";
  }
  write_file_bytes(path, csv);
}

void write_gan_history(const std::string& path, const std::vector<GanEpochStats>& hist) {
  std::string csv = "epoch,L_g,L_d,mean_S_r,d_real_acc,d_fake_acc,class_acc\n";
  for (const auto& h : hist) {
    csv += std::to_string(h.epoch) + "," + format_g(h.g_loss) + "," + format_g(h.d_loss) + "," +
           format_g(h.mean_s_r) + "," + format_g(h.d_real_acc) + "," + format_g(h.d_fake_acc) +
           "," + format_g(h.class_acc) + "\n";
  }
  write_file_bytes(path, csv);
}

int run(int argc, char** argv) {
  CLI::App app{"EEG-to-shape reconstruction toolkit"};
  app.require_subcommand(1);

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "write a synthetic EEG dataset as CSV");
  std::string synth_out;
  int synth_trials = 8;
  std::uint64_t synth_seed = 0;
  SynthConfig synth_cfg;
  int synth_trial_samples = synth_cfg.trial_samples;
  ConfigBinding synth_conf;
  synth->add_option("--out", synth_out, "output CSV path")->required();
  synth->add_option("--trials-per-class", synth_trials, "recordings per class");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--amplitude", synth_cfg.amplitude, "sinusoid amplitude");
  synth->add_option("--noise-amplitude", synth_cfg.noise_amplitude, "pink noise amplitude");
  synth->add_option("--base-freq", synth_cfg.base_freq_hz, "class 0 frequency in Hz");
  synth->add_option("--freq-step", synth_cfg.freq_step_hz, "per-class frequency step in Hz");
  synth->add_option("--trial-samples", synth_trial_samples, "samples per recording");
  synth_conf.bind(synth);
  synth_conf.add("out", synth_out);
  synth_conf.add("trials-per-class", synth_trials);
  synth_conf.add("seed", synth_seed);
  synth_conf.add("amplitude", synth_cfg.amplitude);
  synth_conf.add("noise-amplitude", synth_cfg.noise_amplitude);
  synth_conf.add("base-freq", synth_cfg.base_freq_hz);
  synth_conf.add("freq-step", synth_cfg.freq_step_hz);
  synth_conf.add("trial-samples", synth_trial_samples);

  // train-encoder
  auto* tenc = app.add_subcommand("train-encoder", "train the EEG encoder");
  std::string tenc_data, tenc_out;
  EncoderTrainConfig tenc_cfg;
  tenc_cfg.epochs = 1000;
  ConfigBinding tenc_conf;
  tenc->add_option("--data", tenc_data, "input CSV")->required();
  tenc->add_option("--out", tenc_out, "output checkpoint directory")->required();
  tenc->add_option("--epochs", tenc_cfg.epochs, "training epochs");
  tenc->add_option("--seed", tenc_cfg.seed, "random seed");
  tenc->add_option("--batch-size", tenc_cfg.batch_size, "batch size");
  tenc->add_option("--learning-rate", tenc_cfg.learning_rate, "Adam learning rate");
  tenc_conf.bind(tenc);
  tenc_conf.add("data", tenc_data);
  tenc_conf.add("out", tenc_out);
  tenc_conf.add("epochs", tenc_cfg.epochs);
  tenc_conf.add("seed", tenc_cfg.seed);
  tenc_conf.add("batch-size", tenc_cfg.batch_size);
  tenc_conf.add("learning-rate", tenc_cfg.learning_rate);

  // train-gan
  auto* tgan = app.add_subcommand("train-gan", "train the shape reconstruction GAN");
  std::string tgan_data, tgan_encoder, tgan_out, tgan_mode = "full";
  GanTrainConfig tgan_cfg;
  int tgan_max_per_class = 0;
  ConfigBinding tgan_conf;
  tgan->add_option("--data", tgan_data, "input CSV")->required();
  tgan->add_option("--encoder", tgan_encoder, "encoder checkpoint directory")->required();
  tgan->add_option("--out", tgan_out, "output checkpoint directory")->required();
  tgan->add_option("--mode", tgan_mode, "full|acgan|cgan|gan");
  tgan->add_option("--lambda", tgan_cfg.lambda_align, "semantic alignment weight");
  tgan->add_option("--epochs", tgan_cfg.epochs, "training epochs");
  tgan->add_option("--seed", tgan_cfg.seed, "random seed");
  tgan->add_option("--batch-size", tgan_cfg.batch_size, "batch size");
  tgan->add_option("--learning-rate", tgan_cfg.learning_rate, "Adam learning rate");
  tgan->add_option("--max-per-class", tgan_max_per_class,
                   "cap on training representations per class (0 = all)");
  tgan_conf.bind(tgan);
  tgan_conf.add("data", tgan_data);
  tgan_conf.add("encoder", tgan_encoder);
  tgan_conf.add("out", tgan_out);
  tgan_conf.add("mode", tgan_mode);
  tgan_conf.add("lambda", tgan_cfg.lambda_align);
  tgan_conf.add("epochs", tgan_cfg.epochs);
  tgan_conf.add("seed", tgan_cfg.seed);
  tgan_conf.add("batch-size", tgan_cfg.batch_size);
  tgan_conf.add("learning-rate", tgan_cfg.learning_rate);
  tgan_conf.add("max-per-class", tgan_max_per_class);

  // generate
  auto* gen = app.add_subcommand("generate", "reconstruct shapes from EEG segments");
  std::string gen_gan, gen_encoder, gen_data, gen_out;
  int gen_n = 8;
  std::uint64_t gen_seed = 0;
  ConfigBinding gen_conf;
  gen->add_option("--gan", gen_gan, "gan checkpoint directory")->required();
  gen->add_option("--encoder", gen_encoder, "encoder checkpoint directory")->required();
  gen->add_option("--data", gen_data, "input CSV")->required();
  gen->add_option("--n", gen_n, "images per class");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen_conf.bind(gen);
  gen_conf.add("gan", gen_gan);
  gen_conf.add("encoder", gen_encoder);
  gen_conf.add("data", gen_data);
  gen_conf.add("n", gen_n);
  gen_conf.add("seed", gen_seed);
  gen_conf.add("out", gen_out);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "compute inception score and accuracy");
  std::string ev_gan, ev_encoder, ev_data, ev_out;
  int ev_per_class = 100;
  std::uint64_t ev_seed = 0;
  ConfigBinding ev_conf;
  ev->add_option("--gan", ev_gan, "gan checkpoint directory")->required();
  ev->add_option("--encoder", ev_encoder, "encoder checkpoint directory")->required();
  ev->add_option("--data", ev_data, "input CSV")->required();
  ev->add_option("--samples-per-class", ev_per_class, "generated samples per class");
  ev->add_option("--seed", ev_seed, "random seed");
  ev->add_option("--out", ev_out, "report output path")->required();
  ev_conf.bind(ev);
  ev_conf.add("gan", ev_gan);
  ev_conf.add("encoder", ev_encoder);
  ev_conf.add("data", ev_data);
  ev_conf.add("samples-per-class", ev_per_class);
  ev_conf.add("seed", ev_seed);
  ev_conf.add("out", ev_out);

  // rasterize
  auto* ras = app.add_subcommand("rasterize", "write a canonical stimulus as PGM");
  std::string ras_label, ras_out;
  ConfigBinding ras_conf;
  ras->add_option("--label", ras_label, "circle|star|triangle|rhombus|rectangle")->required();
  ras->add_option("--out", ras_out, "output PGM path")->required();
  ras_conf.bind(ras);
  ras_conf.add("label", ras_label);
  ras_conf.add("out", ras_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  }

  if (synth->parsed()) {
    synth_conf.apply();
    synth_cfg.trial_samples = synth_trial_samples;
    write_recordings_csv(synth_out, synth_eeg(synth_trials, synth_seed, synth_cfg));
    std::cout << "wrote " << synth_out << "\n";
    return 0;
  }

  if (tenc->parsed()) {
    tenc_conf.apply();
    auto segments = segments_from_csv(tenc_data);
    DatasetSplit split = split_dataset(std::move(segments), 0.8, tenc_cfg.seed);
    const ChannelStats stats = compute_channel_stats(split.train);
    split.train = normalize_segments(std::move(split.train), stats);
    split.test = normalize_segments(std::move(split.test), stats);
    EncoderTrainResult result;
    if (tenc_cfg.epochs > 0) {
      result = train_encoder(split, tenc_cfg);
    } else {
      Rng rng(tenc_cfg.seed);
      result.net = init_encoder(rng);
    }
    save_checkpoint(tenc_out, encoder_checkpoint(result.net, stats, tenc_cfg.seed));
    write_encoder_history(tenc_out + "/history.csv", result.history);
    if (!result.history.empty()) {
      const auto& last = result.history.back();
      std::cout << "epoch " << last.epoch << " train_acc " << last.train_accuracy << " test_acc "
                << last.test_accuracy << "\n";
    }
    std::cout << "wrote " << tenc_out << "\n";
    return 0;
  }

  if (tgan->parsed()) {
    tgan_conf.apply();
    tgan_cfg.mode = parse_gan_mode(tgan_mode);
    const LoadedEncoder enc = encoder_from_checkpoint(load_checkpoint(tgan_encoder));
    auto segments = segments_from_csv(tgan_data);
    DatasetSplit split = split_dataset(std::move(segments), 0.8, enc.seed);
    split.train = normalize_segments(std::move(split.train), enc.stats);
    std::vector<ReprSample> reprs = extract_representations(split.train, enc.net);
    if (tgan_max_per_class > 0) {
      std::vector<int> taken(kNumClasses, 0);
      std::vector<ReprSample> capped;
      for (auto& r : reprs) {
        if (taken[static_cast<std::size_t>(r.label)] < tgan_max_per_class) {
          ++taken[static_cast<std::size_t>(r.label)];
          capped.push_back(std::move(r));
        }
      }
      reprs = std::move(capped);
    }
    const GanTrainResult result = train_gan(reprs, canonical_images_normalized(), tgan_cfg);
    save_checkpoint(tgan_out, gan_checkpoint(result.gen, result.disc, tgan_cfg.seed,
                                             tgan_cfg.mode, tgan_cfg.lambda_align));
    write_gan_history(tgan_out + "/history.csv", result.history);
    if (!result.history.empty()) {
      const auto& last = result.history.back();
      std::cout << "epoch " << last.epoch << " L_g " << last.g_loss << " L_d " << last.d_loss
                << " mean_S_r " << last.mean_s_r << "\n";
    }
    std::cout << "wrote " << tgan_out << "\n";
    return 0;
  }

  if (gen->parsed()) {
    gen_conf.apply();
    const LoadedGan gan = gan_from_checkpoint(load_checkpoint(gen_gan));
    const LoadedEncoder enc = encoder_from_checkpoint(load_checkpoint(gen_encoder));
    auto segments = normalize_segments(segments_from_csv(gen_data), enc.stats);
    const std::vector<ReprSample> reprs = extract_representations(segments, enc.net);
    std::filesystem::create_directories(gen_out);
    const auto samples = generate_samples(gan.gen, reprs, gen_n, gan.mode, gen_seed);
    for (int k = 0; k < kNumClasses; ++k) {
      for (int j = 0; j < gen_n; ++j) {
        const auto& s = samples[static_cast<std::size_t>(k * gen_n + j)];
        Tensor img01(s.image.dims);
        for (long long i = 0; i < img01.size(); ++i) img01[i] = 0.5f * (s.image[i] + 1.0f);
        write_pgm(gen_out + "/gen_" + to_string(static_cast<ShapeClass>(k)) + "_" +
                      std::to_string(j) + ".pgm",
                  img01);
      }
    }
    write_pgm(gen_out + "/grid.pgm", sample_grid(gan.gen, reprs, gen_n, gan.mode, gen_seed));
    std::cout << "wrote " << samples.size() << " images and grid.pgm to " << gen_out << "\n";
    return 0;
  }

  if (ev->parsed()) {
    ev_conf.apply();
    const LoadedGan gan = gan_from_checkpoint(load_checkpoint(ev_gan));
    const LoadedEncoder enc = encoder_from_checkpoint(load_checkpoint(ev_encoder));
    auto segments = normalize_segments(segments_from_csv(ev_data), enc.stats);
    const std::vector<ReprSample> reprs = extract_representations(segments, enc.net);
    const auto samples = generate_samples(gan.gen, reprs, ev_per_class, gan.mode, ev_seed);
    const SmallCnn scorer = train_scoring_classifier(ev_seed);
    std::vector<Tensor> images;
    images.reserve(samples.size());
    for (const auto& s : samples) images.push_back(s.image);

    EvalReport report;
    report.inception_score = inception_score(images, scorer);
    report.inception_accuracy = inception_accuracy(samples, gan.disc);
    for (const auto& s : samples) ++report.per_class_counts[static_cast<std::size_t>(s.label)];
    report.mode = to_string(gan.mode);
    report.lambda_align = gan.lambda_align;
    report.eval_seed = ev_seed;
    report.gan_seed = gan.seed;
    report.encoder_seed = enc.seed;
    const std::string text = report.to_text();
    write_file_bytes(ev_out, text);
    std::cout << text;
    return 0;
  }

  if (ras->parsed()) {
    ras_conf.apply();
    ShapeClass label;
    try {
      label = parse_shape_class(ras_label);
    } catch (const data_error& e) {
      throw config_error(std::string("--label: ") + e.what());
    }
    write_pgm(ras_out, rasterize(label).pixels);
    std::cout << "wrote " << ras_out << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::cerr << "code=usage msg=" << e.what() << "\n";
    return 2;
  } catch (const e2s::config_error& e) {
    std::cerr << "code=usage msg=" << e.what() << "\n";
    return 2;
  } catch (const e2s::io_error& e) {
    std::cerr << "code=io msg=" << e.what() << "\n";
    return 3;
  } catch (const e2s::data_error& e) {
    std::cerr << "code=data msg=" << e.what() << "\n";
    return 4;
  } catch (const e2s::shape_error& e) {
    std::cerr << "code=data msg=" << e.what() << "\n";
    return 4;
  } catch (const e2s::checkpoint_error& e) {
    std::cerr << "code=checkpoint msg=" << e.what() << "\n";
    return 5;
  } catch (const e2s::numeric_error& e) {
    std::cerr << "code=numeric msg=" << e.what() << "\n";
    return 6;
  } catch (const std::exception& e) {
    std::cerr << "code=internal msg=" << e.what() << "\n";
    return 10;
  }
}
