#include "imair/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "imair/rng.hpp"
#include "text_util.hpp"

namespace imair {

namespace {

/// Calls task(i) for i in [0, count) on up to `workers` threads. The first
/// exception is rethrown after all threads finish.
template <typename Task>
void parallel_for(std::size_t count, int workers, Task&& task) {
  const auto n_threads = static_cast<std::size_t>(std::clamp<long long>(workers, 1, static_cast<long long>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (n_threads == 1) {
    body();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(body);
  }
  if (error) std::rethrow_exception(error);
}

LabeledSet select_rows(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                       const std::vector<std::size_t>& rows) {
  LabeledSet set;
  set.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  set.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    set.x.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    set.labels.push_back(labels[rows[i]]);
  }
  return set;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(EvalMode mode) { return mode == EvalMode::kFixed ? "fixed" : "loso"; }

EvalMode parse_eval_mode(std::string_view name) {
  if (name == "fixed") return EvalMode::kFixed;
  if (name == "loso") return EvalMode::kLoso;
  throw UsageError("unknown evaluation mode '" + std::string(name) + "' (valid: fixed, loso)");
}

std::vector<std::pair<std::string, std::string>> config_echo(const EvaluationConfig& c) {
  using detail::format_double;
  return {
      {"mode", std::string(to_string(c.mode))},
      {"length", std::to_string(c.encoding.preprocess.length)},
      {"target_hz", format_double(c.encoding.preprocess.target_hz)},
      {"method", std::string(to_string(c.encoding.method))},
      {"bins", std::to_string(c.encoding.bins)},
      {"pooling", std::to_string(c.encoding.pooling)},
      {"classifier", std::string(to_string(c.classifier.kind))},
      {"temperature", format_double(c.classifier.temperature)},
      {"step", format_double(c.classifier.logistic.step)},
      {"l2", format_double(c.classifier.logistic.l2)},
      {"max_epochs", std::to_string(c.classifier.logistic.max_epochs)},
      {"patience", std::to_string(c.classifier.logistic.patience)},
      {"val_fraction", format_double(c.val_fraction)},
      {"train_subjects", std::to_string(c.train_subjects)},
      {"seed", std::to_string(c.seed)},
      {"permute_labels", c.permute_labels ? "true" : "false"},
  };
}

std::pair<ImageStack, ImageStack> encode_recording(const RawRecording& rec, const EncodingConfig& config) {
  const auto [accel, gyro] = split_channels(preprocess(rec, config.preprocess));
  return {encode_stack(accel, config.method, config.bins), encode_stack(gyro, config.method, config.bins)};
}

FeatureTable compute_features(const Manifest& manifest, const EncodingConfig& config, int workers,
                              const std::vector<std::string>* subjects) {
  const auto n = manifest.entries.size();
  const Eigen::Index d = pooled_dimension(config.preprocess.length, config.pooling);
  FeatureTable table;
  table.accel = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), d);
  table.gyro = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), d);
  table.labels.resize(n);
  table.loaded.assign(n, false);

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& entry = manifest.entries[i];
    table.labels[i] = letter_index(entry.info.label);
    if (subjects && !std::binary_search(subjects->begin(), subjects->end(), entry.info.subject_id)) continue;
    todo.push_back(i);
  }
  parallel_for(todo.size(), workers, [&](std::size_t k) {
    const std::size_t i = todo[k];
    const auto& entry = manifest.entries[i];
    try {
      const auto [accel, gyro] = encode_recording(load_recording(manifest, entry), config);
      table.accel.row(static_cast<Eigen::Index>(i)) = pool_features(accel, config.pooling).x.transpose();
      table.gyro.row(static_cast<Eigen::Index>(i)) = pool_features(gyro, config.pooling).x.transpose();
    } catch (const DataError& e) {
      throw DataError(manifest.resolve(entry).string() + ": " + e.what());
    }
  });
  for (std::size_t i : todo) table.loaded[i] = true;
  return table;
}

FoldResult run_fold(const SplitPlan& plan, const Manifest& manifest, const FeatureTable& features,
                    const EvaluationConfig& config) {
  validate_plan(plan, manifest);
  const std::set<std::string> train(plan.train_subjects.begin(), plan.train_subjects.end());
  const std::set<std::string> val(plan.val_subjects.begin(), plan.val_subjects.end());
  const std::set<std::string> test(plan.test_subjects.begin(), plan.test_subjects.end());

  std::vector<std::size_t> train_rows, val_rows, test_rows;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& sid = manifest.entries[i].info.subject_id;
    auto* bucket = train.contains(sid) ? &train_rows : val.contains(sid) ? &val_rows
                                                                           : test.contains(sid) ? &test_rows : nullptr;
    if (!bucket) continue;
    if (!features.loaded[i]) throw DataError(plan.fold_id + ": features missing for manifest row " + std::to_string(i));
    bucket->push_back(i);
  }
  if (test_rows.empty()) throw DataError(plan.fold_id + ": test set has no recordings");
  if (train_rows.empty()) throw DataError(plan.fold_id + ": training set has no recordings");

  std::vector<int> labels = features.labels;
  if (config.permute_labels) {
    Rng rng(mix_seed(config.seed, hash_string("permute:" + plan.fold_id)));
    for (auto* rows : {&train_rows, &val_rows}) {
      std::vector<int> shuffled;
      for (std::size_t i : *rows) shuffled.push_back(labels[i]);
      rng.shuffle(std::span<int>(shuffled));
      for (std::size_t k = 0; k < rows->size(); ++k) labels[(*rows)[k]] = shuffled[k];
    }
  }

  SensorModelPair models;
  const int pooling = config.encoding.pooling;
  models.accel = train_classifier(config.classifier, select_rows(features.accel, labels, train_rows),
                                  select_rows(features.accel, labels, val_rows), pooling);
  models.gyro = train_classifier(config.classifier, select_rows(features.gyro, labels, train_rows),
                                 select_rows(features.gyro, labels, val_rows), pooling);

  const LabeledSet test_accel = select_rows(features.accel, features.labels, test_rows);
  const LabeledSet test_gyro = select_rows(features.gyro, features.labels, test_rows);
  const Eigen::MatrixXd pa = models.accel->predict_proba_batch(test_accel.x);
  const Eigen::MatrixXd pg = models.gyro->predict_proba_batch(test_gyro.x);

  FoldResult result;
  result.fold_id = plan.fold_id;
  result.n_train = train_rows.size();
  result.n_val = val_rows.size();
  std::size_t correct_accel = 0, correct_gyro = 0, correct_fused = 0;
  for (std::size_t k = 0; k < test_rows.size(); ++k) {
    const auto& entry = manifest.entries[test_rows[k]];
    if (train.contains(entry.info.subject_id) || val.contains(entry.info.subject_id)) {
      throw std::logic_error(plan.fold_id + ": test subject leaked into training");
    }
    RecordResult r;
    r.entry = test_rows[k];
    r.subject_id = entry.info.subject_id;
    r.true_label = entry.info.label;
    for (int c = 0; c < kNumClasses; ++c) {
      r.accel.p[static_cast<std::size_t>(c)] = pa(static_cast<Eigen::Index>(k), c);
      r.gyro.p[static_cast<std::size_t>(c)] = pg(static_cast<Eigen::Index>(k), c);
    }
    r.fused = fuse(r.accel, r.gyro);
    r.predicted = predict_label(r.fused);
    correct_accel += predict_label(r.accel) == r.true_label;
    correct_gyro += predict_label(r.gyro) == r.true_label;
    correct_fused += r.predicted == r.true_label;
    result.records.push_back(std::move(r));
  }
  const auto total = static_cast<double>(result.records.size());
  result.acc_accel = static_cast<double>(correct_accel) / total;
  result.acc_gyro = static_cast<double>(correct_gyro) / total;
  result.acc_fused = static_cast<double>(correct_fused) / total;
  return result;
}

FoldResult run_fold(const SplitPlan& plan, const Manifest& manifest, const EvaluationConfig& config) {
  std::vector<std::string> subjects;
  for (const auto* group : {&plan.train_subjects, &plan.val_subjects, &plan.test_subjects}) {
    subjects.insert(subjects.end(), group->begin(), group->end());
  }
  std::sort(subjects.begin(), subjects.end());
  const FeatureTable features = compute_features(manifest, config.encoding, config.workers, &subjects);
  return run_fold(plan, manifest, features, config);
}

std::size_t EvaluationReport::failed_folds() const {
  return static_cast<std::size_t>(std::count_if(folds.begin(), folds.end(), [](const FoldResult& f) { return f.failed; }));
}

ConfusionMatrix confusion(const EvaluationReport& report) {
  ConfusionMatrix counts{};
  for (const auto& fold : report.folds) {
    if (fold.failed) continue;
    for (const auto& r : fold.records) {
      ++counts[static_cast<std::size_t>(letter_index(r.true_label))][static_cast<std::size_t>(letter_index(r.predicted))];
    }
  }
  return counts;
}

std::array<std::array<double, kNumClasses>, kNumClasses> normalized_confusion(const ConfusionMatrix& counts) {
  std::array<std::array<double, kNumClasses>, kNumClasses> out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    long long total = 0;
    for (long long c : counts[i]) total += c;
    if (total == 0) continue;
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(total);
    }
  }
  return out;
}

EvaluationReport run_folds(const std::vector<SplitPlan>& plans, const Manifest& manifest,
                           const EvaluationConfig& config) {
  if (plans.empty()) throw DataError("no folds to evaluate");
  std::vector<std::string> subjects;
  for (const auto& plan : plans) {
    for (const auto* group : {&plan.train_subjects, &plan.val_subjects, &plan.test_subjects}) {
      subjects.insert(subjects.end(), group->begin(), group->end());
    }
  }
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
  const FeatureTable features = compute_features(manifest, config.encoding, config.workers, &subjects);

  EvaluationReport report;
  report.folds.resize(plans.size());
  std::mutex progress_mutex;
  std::size_t done = 0;
  parallel_for(plans.size(), config.workers, [&](std::size_t i) {
    try {
      report.folds[i] = run_fold(plans[i], manifest, features, config);
    } catch (const std::exception& e) {
      report.folds[i] = FoldResult{};
      report.folds[i].fold_id = plans[i].fold_id;
      report.folds[i].failed = true;
      report.folds[i].error = e.what();
    }
    if (config.progress) {
      const FoldResult& f = report.folds[i];
      const std::lock_guard lock(progress_mutex);
      ++done;
      config.progress("fold " + f.fold_id + " (" + std::to_string(done) + "/" + std::to_string(plans.size()) +
                      ") " + (f.failed ? "failed: " + f.error : "fused=" + detail::format_double(f.acc_fused)));
    }
  });
  std::sort(report.folds.begin(), report.folds.end(),
            [](const FoldResult& a, const FoldResult& b) { return a.fold_id < b.fold_id; });

  std::vector<double> accel, gyro, fused;
  std::size_t correct = 0, total = 0;
  for (const auto& fold : report.folds) {
    if (fold.failed) continue;
    accel.push_back(fold.acc_accel);
    gyro.push_back(fold.acc_gyro);
    fused.push_back(fold.acc_fused);
    for (const auto& r : fold.records) correct += r.predicted == r.true_label;
    total += fold.records.size();
  }
  report.mean_accel = mean_of(accel);
  report.mean_gyro = mean_of(gyro);
  report.mean_fused = mean_of(fused);
  double var = 0.0;
  for (double a : fused) var += (a - report.mean_fused) * (a - report.mean_fused);
  report.std_fused = fused.empty() ? 0.0 : std::sqrt(var / static_cast<double>(fused.size()));
  report.weighted_fused = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  report.confusion = confusion(report);
  report.config = config_echo(config);
  return report;
}

EvaluationReport loso_evaluate(const Manifest& manifest, const EvaluationConfig& config) {
  return run_folds(loso_splits(manifest, config.val_fraction, config.seed), manifest, config);
}

EvaluationReport fixed_evaluate(const Manifest& manifest, const EvaluationConfig& config) {
  return run_folds({fixed_subject_split(manifest, config.train_subjects, config.val_fraction, config.seed)},
                   manifest, config);
}

EvaluationReport evaluate(const Manifest& manifest, const EvaluationConfig& config) {
  return config.mode == EvalMode::kLoso ? loso_evaluate(manifest, config) : fixed_evaluate(manifest, config);
}

}  // namespace imair
