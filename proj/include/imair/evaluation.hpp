#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "imair/classifier.hpp"
#include "imair/encoders.hpp"
#include "imair/manifest.hpp"
#include "imair/signal.hpp"
#include "imair/splits.hpp"

namespace imair {

struct EncodingConfig {
  Method method = Method::kGadf;
  int bins = kDefaultBins;
  int pooling = kDefaultPooling;
  PreprocessConfig preprocess;
};

enum class EvalMode { kFixed, kLoso };

std::string_view to_string(EvalMode mode);
EvalMode parse_eval_mode(std::string_view name);

struct EvaluationConfig {
  EvalMode mode = EvalMode::kLoso;
  EncodingConfig encoding;
  ClassifierConfig classifier;
  double val_fraction = kDefaultValFraction;
  int train_subjects = kDefaultTrainSubjects;
  std::uint64_t seed = 0;
  /// Shuffle training and validation labels (chance-level control run).
  bool permute_labels = false;
  /// Folds evaluated concurrently; results do not depend on it.
  int workers = 1;
  /// Called once per finished fold with a one-line summary; not part of the echo.
  std::function<void(const std::string&)> progress;
};

/// Ordered key=value pairs describing every setting that affects results.
std::vector<std::pair<std::string, std::string>> config_echo(const EvaluationConfig& config);

/// Preprocesses, splits and encodes one recording into its two image stacks.
std::pair<ImageStack, ImageStack> encode_recording(const RawRecording& rec, const EncodingConfig& config);

/// Pooled features of every manifest entry (row i <-> manifest.entries[i]).
/// Rows of entries outside `subjects` (when given) are left zero and flagged
/// as not loaded.
struct FeatureTable {
  Eigen::MatrixXd accel;
  Eigen::MatrixXd gyro;
  std::vector<int> labels;
  std::vector<bool> loaded;
};

FeatureTable compute_features(const Manifest& manifest, const EncodingConfig& config, int workers = 1,
                              const std::vector<std::string>* subjects = nullptr);

struct RecordResult {
  std::size_t entry = 0;  ///< manifest row
  std::string subject_id;
  char true_label = 'A';
  ClassProbabilities accel;
  ClassProbabilities gyro;
  ClassProbabilities fused;
  char predicted = 'A';
};

struct FoldResult {
  std::string fold_id;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::vector<RecordResult> records;
  double acc_accel = 0.0;
  double acc_gyro = 0.0;
  double acc_fused = 0.0;
  bool failed = false;
  std::string error;
};

/// Trains the accelerometer and gyroscope models on the plan's train subjects
/// (validation subjects drive early stopping) and scores the test subjects.
FoldResult run_fold(const SplitPlan& plan, const Manifest& manifest, const FeatureTable& features,
                    const EvaluationConfig& config);
FoldResult run_fold(const SplitPlan& plan, const Manifest& manifest, const EvaluationConfig& config);

using ConfusionMatrix = std::array<std::array<long long, kNumClasses>, kNumClasses>;

struct EvaluationReport {
  std::vector<FoldResult> folds;  ///< sorted by fold id; failed folds included
  double mean_accel = 0.0;
  double mean_gyro = 0.0;
  double mean_fused = 0.0;  ///< unweighted mean over successful folds
  double std_fused = 0.0;   ///< population std over successful folds
  double weighted_fused = 0.0;  ///< correct / total over all test records
  ConfusionMatrix confusion{};
  std::vector<std::pair<std::string, std::string>> config;

  std::size_t failed_folds() const;
};

/// Runs the given plans (in any order) and assembles the report in fold-id
/// order. A fold that throws is recorded as failed.
EvaluationReport run_folds(const std::vector<SplitPlan>& plans, const Manifest& manifest,
                           const EvaluationConfig& config);

EvaluationReport loso_evaluate(const Manifest& manifest, const EvaluationConfig& config);
EvaluationReport fixed_evaluate(const Manifest& manifest, const EvaluationConfig& config);
/// Dispatches on config.mode.
EvaluationReport evaluate(const Manifest& manifest, const EvaluationConfig& config);

/// counts[i][j]: test recordings of class i predicted as j.
ConfusionMatrix confusion(const EvaluationReport& report);
/// Rows divided by their sums; empty rows stay zero.
std::array<std::array<double, kNumClasses>, kNumClasses> normalized_confusion(const ConfusionMatrix& counts);

/// Writes summary.csv, confusion.csv, confusion_normalized.csv, records.csv,
/// aggregate.txt and config.txt into `out_dir`.
void emit_report(const EvaluationReport& report, const std::filesystem::path& out_dir);

struct SummaryRow {
  std::string fold_id;
  std::size_t n_test = 0;
  double acc_accel = 0.0;
  double acc_gyro = 0.0;
  double acc_fused = 0.0;
};

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// Writes "key=value" lines.
void write_key_values(const std::vector<std::pair<std::string, std::string>>& pairs,
                      const std::filesystem::path& path);

}  // namespace imair
