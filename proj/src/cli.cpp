#include "imair/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <thread>

#include "imair/evaluation.hpp"
#include "imair/image_io.hpp"
#include "imair/manifest.hpp"
#include "imair/splits.hpp"
#include "imair/rng.hpp"
#include "imair/synthetic.hpp"
#include "text_util.hpp"

namespace imair {

namespace fs = std::filesystem;
using detail::format_double;

namespace {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

void log_line(const std::string& message) { std::cerr << "[imair] " << message << '\n'; }

void log_config(std::string_view command, const KeyValues& config) {
  log_line(std::string(command) + ": effective configuration");
  for (const auto& [k, v] : config) log_line("  " + k + "=" + v);
}

fs::path prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::string recording_stem(const ManifestEntry& entry) {
  return entry.info.subject_id + "_" + entry.info.label + "_" + std::to_string(entry.info.repetition);
}

/// Flags shared by the commands that encode recordings.
struct EncodingFlags {
  std::string method = "gadf";
  int bins = kDefaultBins;
  int pooling = kDefaultPooling;
  int length = kFixedLength;
  double target_hz = kTargetRateHz;

  void add_to(CLI::App& cmd, bool with_pooling) {
    cmd.add_option("--method", method, "Encoding: ssm, gasf, gadf or mtf")->capture_default_str();
    cmd.add_option("--q", bins, "Number of MTF quantile bins")->capture_default_str()->check(CLI::Range(2, 1 << 16));
    if (with_pooling) {
      cmd.add_option("--pooling", pooling, "Average-pooling window size")->capture_default_str()->check(CLI::PositiveNumber);
    }
    cmd.add_option("--length", length, "Fixed signal length")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--target-hz", target_hz, "Resampling rate for faster recordings")->capture_default_str()->check(CLI::PositiveNumber);
  }

  EncodingConfig build() const {
    EncodingConfig config;
    config.method = parse_method(method);
    config.bins = bins;
    config.pooling = pooling;
    config.preprocess.length = length;
    config.preprocess.target_hz = target_hz;
    if (pooling > length) throw UsageError("--pooling must not exceed --length");
    return config;
  }
};

KeyValues encoding_echo(const EncodingConfig& c) {
  return {{"method", std::string(to_string(c.method))},
          {"bins", std::to_string(c.bins)},
          {"pooling", std::to_string(c.pooling)},
          {"length", std::to_string(c.preprocess.length)},
          {"target_hz", format_double(c.preprocess.target_hz)}};
}

/// Flags that configure classifier training.
struct ModelFlags {
  std::string classifier = "logistic";
  double temperature = kDefaultTemperature;
  LogisticConfig logistic;
  double val_fraction = kDefaultValFraction;
  std::uint64_t seed = 0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--classifier", classifier, "centroid or logistic")->capture_default_str();
    cmd.add_option("--temperature", temperature, "Centroid softmax temperature")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--step", logistic.step, "Initial gradient step")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--l2", logistic.l2, "L2 penalty")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd.add_option("--max-epochs", logistic.max_epochs, "Epoch limit")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd.add_option("--patience", logistic.patience, "Early-stopping patience")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--val-fraction", val_fraction, "Fraction of training subjects used for validation")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 0.999999));
    cmd.add_option("--seed", seed, "Seed for splits and label permutation")->capture_default_str();
  }

  ClassifierConfig build() const {
    ClassifierConfig config;
    config.kind = parse_classifier_kind(classifier);
    config.temperature = temperature;
    config.logistic = logistic;
    config.logistic.seed = seed;
    return config;
  }
};

int default_workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::vector<std::size_t> select_entries(const Manifest& manifest, const std::vector<long long>& indices) {
  std::vector<std::size_t> out;
  if (indices.empty()) {
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) out.push_back(i);
    return out;
  }
  for (long long i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= manifest.entries.size()) {
      throw UsageError("--index " + std::to_string(i) + " is outside the manifest (0.." +
                       std::to_string(manifest.entries.size() - 1) + ")");
    }
    out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Image-encoded IMU airwriting recognition toolkit", "imair"};
  app.require_subcommand(1);

  // synth -------------------------------------------------------------------
  SyntheticSpec synth_spec;
  fs::path synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic 26-letter dataset");
  synth->add_option("--subjects", synth_spec.n_subjects, "Number of subjects")->capture_default_str();
  synth->add_option("--reps", synth_spec.n_repetitions, "Repetitions per letter")->capture_default_str();
  synth->add_option("--seed", synth_spec.seed, "Generator seed")->capture_default_str();
  synth->add_option("--separation", synth_spec.class_separation, "Class template amplitude")->capture_default_str();
  synth->add_option("--noise", synth_spec.noise_scale, "White-noise standard deviation")->capture_default_str();
  synth->add_option("--jitter", synth_spec.subject_jitter, "Per-subject distortion strength")->capture_default_str();
  synth->add_option("--rate", synth_spec.sample_rate_hz, "Sample rate in Hz")->capture_default_str();
  synth->add_option("--min-length", synth_spec.min_length, "Shortest recording")->capture_default_str();
  synth->add_option("--max-length", synth_spec.max_length, "Longest recording")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();

  // encode ------------------------------------------------------------------
  fs::path encode_manifest, encode_out;
  EncodingFlags encode_flags;
  std::vector<long long> encode_indices;
  auto* encode = app.add_subcommand("encode", "Encode recordings into raw image stacks");
  encode->add_option("--manifest", encode_manifest, "Manifest CSV")->required();
  encode_flags.add_to(*encode, false);
  encode->add_option("--index", encode_indices, "Manifest rows to encode (default: all)");
  encode->add_option("--out", encode_out, "Output directory")->required();

  // export-png --------------------------------------------------------------
  fs::path png_manifest, png_out;
  EncodingFlags png_flags;
  std::vector<long long> png_indices;
  auto* png = app.add_subcommand("export-png", "Write encoded images as 8-bit PNGs with sidecars");
  png->add_option("--manifest", png_manifest, "Manifest CSV")->required();
  png_flags.add_to(*png, false);
  png->add_option("--index", png_indices, "Manifest rows to export (default: 0)");
  png->add_option("--out", png_out, "Output directory")->required();

  // split -------------------------------------------------------------------
  fs::path split_manifest, split_out;
  std::string split_mode = "loso";
  int split_train = kDefaultTrainSubjects;
  double split_val = kDefaultValFraction;
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand("split", "Write subject-level evaluation splits");
  split->add_option("--manifest", split_manifest, "Manifest CSV")->required();
  split->add_option("--mode", split_mode, "fixed or loso")->capture_default_str();
  split->add_option("--train-subjects", split_train, "Train+validation subjects (fixed mode)")->capture_default_str();
  split->add_option("--val-fraction", split_val, "Validation fraction")->capture_default_str();
  split->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();
  split->add_option("--out", split_out, "Output directory")->required();

  // train -------------------------------------------------------------------
  fs::path train_manifest, train_out;
  EncodingFlags train_enc;
  ModelFlags train_model;
  int train_workers = default_workers();
  auto* train = app.add_subcommand("train", "Train and save the accelerometer and gyroscope models on all subjects");
  train->add_option("--manifest", train_manifest, "Manifest CSV")->required();
  train_enc.add_to(*train, true);
  train_model.add_to(*train);
  train->add_option("--workers", train_workers, "Encoding threads")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--out", train_out, "Output directory")->required();

  // eval --------------------------------------------------------------------
  fs::path eval_manifest, eval_out;
  std::string eval_mode = "loso";
  EncodingFlags eval_enc;
  ModelFlags eval_model;
  int eval_train = kDefaultTrainSubjects;
  bool eval_permute = false;
  int eval_workers = default_workers();
  auto* eval = app.add_subcommand("eval", "Run the fixed-split or leave-one-subject-out protocol");
  eval->add_option("--manifest", eval_manifest, "Manifest CSV")->required();
  eval->add_option("--mode", eval_mode, "fixed or loso")->capture_default_str();
  eval_enc.add_to(*eval, true);
  eval_model.add_to(*eval);
  eval->add_option("--train-subjects", eval_train, "Train+validation subjects (fixed mode)")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_flag("--permute-labels", eval_permute, "Shuffle training labels (chance-level control)");
  eval->add_option("--workers", eval_workers, "Concurrent folds")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--out", eval_out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) {
      validate(synth_spec);
      const KeyValues config = {{"command", "synth"},
                                {"subjects", std::to_string(synth_spec.n_subjects)},
                                {"reps", std::to_string(synth_spec.n_repetitions)},
                                {"seed", std::to_string(synth_spec.seed)},
                                {"separation", format_double(synth_spec.class_separation)},
                                {"noise", format_double(synth_spec.noise_scale)},
                                {"jitter", format_double(synth_spec.subject_jitter)},
                                {"rate", format_double(synth_spec.sample_rate_hz)},
                                {"min_length", std::to_string(synth_spec.min_length)},
                                {"max_length", std::to_string(synth_spec.max_length)}};
      log_config("synth", config);
      const Manifest manifest = generate_synthetic(synth_spec, prepare_out_dir(synth_out));
      write_key_values(config, synth_out / "config.txt");
      log_line("wrote " + std::to_string(manifest.entries.size()) + " recordings to " + synth_out.string());
      std::cout << (synth_out / "manifest.csv").string() << '\n';
      return kExitOk;
    }

    if (*encode || *png) {
      const bool raw = static_cast<bool>(*encode);
      const EncodingConfig config = (raw ? encode_flags : png_flags).build();
      const fs::path& manifest_path = raw ? encode_manifest : png_manifest;
      const fs::path& out = raw ? encode_out : png_out;
      KeyValues echo = {{"command", raw ? "encode" : "export-png"}, {"manifest", manifest_path.string()}};
      for (auto& kv : encoding_echo(config)) echo.push_back(kv);
      log_config(echo.front().second, echo);
      const Manifest manifest = load_manifest(manifest_path);
      auto indices = raw ? encode_indices : png_indices;
      if (!raw && indices.empty()) indices = {0};
      const auto rows = select_entries(manifest, indices);
      prepare_out_dir(out);
      for (std::size_t i : rows) {
        const auto& entry = manifest.entries[i];
        const auto [accel, gyro] = encode_recording(load_recording(manifest, entry), config);
        const std::string stem = recording_stem(entry);
        for (const ImageStack* stack : {&accel, &gyro}) {
          const std::string prefix = stem + "_" + std::string(to_string(stack->kind));
          if (raw) {
            export_image_raw(*stack, out / (prefix + ".imair"));
          } else {
            for (int c = 0; c < kAxesPerSensor; ++c) {
              export_image_png(stack->channels[static_cast<std::size_t>(c)], out / (prefix + "_" + std::to_string(c) + ".png"));
            }
          }
        }
      }
      write_key_values(echo, out / "config.txt");
      log_line("encoded " + std::to_string(rows.size()) + " recordings into " + out.string());
      return kExitOk;
    }

    if (*split) {
      const EvalMode mode = parse_eval_mode(split_mode);
      const KeyValues echo = {{"command", "split"},
                              {"manifest", split_manifest.string()},
                              {"mode", std::string(to_string(mode))},
                              {"train_subjects", std::to_string(split_train)},
                              {"val_fraction", format_double(split_val)},
                              {"seed", std::to_string(split_seed)}};
      log_config("split", echo);
      const Manifest manifest = load_manifest(split_manifest);
      const std::vector<SplitPlan> plans = mode == EvalMode::kLoso
                                               ? loso_splits(manifest, split_val, split_seed)
                                               : std::vector<SplitPlan>{fixed_subject_split(manifest, split_train, split_val, split_seed)};
      prepare_out_dir(split_out);
      std::string text = "fold_id,role,subject_id\n";
      for (const auto& plan : plans) {
        validate_plan(plan, manifest);
        for (const auto& s : plan.train_subjects) text += plan.fold_id + ",train," + s + "\n";
        for (const auto& s : plan.val_subjects) text += plan.fold_id + ",val," + s + "\n";
        for (const auto& s : plan.test_subjects) text += plan.fold_id + ",test," + s + "\n";
        std::cout << plan.fold_id << ": train=" << plan.train_subjects.size() << " val=" << plan.val_subjects.size()
                  << " test=" << plan.test_subjects.size() << '\n';
      }
      std::ofstream(split_out / "splits.csv", std::ios::binary) << text;
      write_key_values(echo, split_out / "config.txt");
      return kExitOk;
    }

    if (*train) {
      EvaluationConfig config;
      config.encoding = train_enc.build();
      config.classifier = train_model.build();
      config.val_fraction = train_model.val_fraction;
      config.seed = train_model.seed;
      config.workers = train_workers;
      KeyValues echo = config_echo(config);
      echo.erase(std::remove_if(echo.begin(), echo.end(), [](const auto& kv) {
                   return kv.first == "mode" || kv.first == "train_subjects" || kv.first == "permute_labels";
                 }), echo.end());
      echo.insert(echo.begin(), {{"command", "train"}, {"manifest", train_manifest.string()}});
      log_config("train", echo);
      const Manifest manifest = load_manifest(train_manifest);
      // All subjects train; validation subjects follow the same rule as a
      // LOSO fold without a test subject.
      auto subjects = manifest.subjects();
      Rng rng(mix_seed(config.seed, hash_string("train")));
      rng.shuffle(std::span<std::string>(subjects));
      auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(subjects.size())));
      n_val = std::min(n_val, subjects.size() - 1);
      const std::vector<std::string> val(subjects.begin(), subjects.begin() + static_cast<std::ptrdiff_t>(n_val));
      const FeatureTable features = compute_features(manifest, config.encoding, config.workers);
      std::vector<std::size_t> train_rows, val_rows;
      for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const bool is_val = std::find(val.begin(), val.end(), manifest.entries[i].info.subject_id) != val.end();
        (is_val ? val_rows : train_rows).push_back(i);
      }
      auto pick = [&](const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
        LabeledSet set;
        set.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
        for (std::size_t k = 0; k < rows.size(); ++k) {
          set.x.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
          set.labels.push_back(features.labels[rows[k]]);
        }
        return set;
      };
      prepare_out_dir(train_out);
      for (const auto& [name, x] : {std::pair<std::string, const Eigen::MatrixXd*>{"accel", &features.accel},
                                    std::pair<std::string, const Eigen::MatrixXd*>{"gyro", &features.gyro}}) {
        const auto model = train_classifier(config.classifier, pick(*x, train_rows), pick(*x, val_rows), config.encoding.pooling);
        std::ofstream out(train_out / (name + ".model"), std::ios::binary);
        model->save(out);
        if (!out) throw DataError("failed writing model " + (train_out / (name + ".model")).string());
        log_line("saved " + name + " model");
      }
      write_key_values(echo, train_out / "config.txt");
      return kExitOk;
    }

    if (*eval) {
      EvaluationConfig config;
      config.mode = parse_eval_mode(eval_mode);
      config.encoding = eval_enc.build();
      config.classifier = eval_model.build();
      config.val_fraction = eval_model.val_fraction;
      config.train_subjects = eval_train;
      config.seed = eval_model.seed;
      config.permute_labels = eval_permute;
      config.workers = eval_workers;
      config.progress = log_line;
      KeyValues echo = config_echo(config);
      log_config("eval", echo);
      log_line("  workers=" + std::to_string(config.workers));
      const Manifest manifest = load_manifest(eval_manifest);
      log_line("loaded " + std::to_string(manifest.entries.size()) + " recordings from " +
               std::to_string(manifest.subjects().size()) + " subjects");
      const EvaluationReport report = evaluate(manifest, config);
      emit_report(report, prepare_out_dir(eval_out));
      std::cout << "folds=" << report.folds.size() << " failed=" << report.failed_folds()
                << " mean_acc_accel=" << format_double(report.mean_accel)
                << " mean_acc_gyro=" << format_double(report.mean_gyro)
                << " mean_acc_fused=" << format_double(report.mean_fused) << '\n';
      return report.failed_folds() == report.folds.size() ? kExitData : kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "imair: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "imair: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const TrainingError& e) {
    std::cerr << "imair: training error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "imair: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace imair
