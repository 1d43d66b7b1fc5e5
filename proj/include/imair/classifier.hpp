#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "imair/common.hpp"
#include "imair/encoders.hpp"

namespace imair {

/// Posterior over the letters A..Z, index i <-> letter 'A' + i.
struct ClassProbabilities {
  std::array<double, kNumClasses> p{};

  double operator[](int i) const { return p[static_cast<std::size_t>(i)]; }
  bool is_simplex(double tol = 1e-9) const;
};

/// Elementwise mean of the accelerometer and gyroscope posteriors.
ClassProbabilities fuse(const ClassProbabilities& accel, const ClassProbabilities& gyro);

/// Class index of the largest probability; ties go to the lowest index.
int predict_index(const ClassProbabilities& probs);
char predict_label(const ClassProbabilities& probs);

inline constexpr int kDefaultPooling = 5;

/// Average-pooled image stack, flattened channel-major then row-major.
struct FeatureVector {
  Eigen::VectorXd x;
  int pooling_factor = kDefaultPooling;
};

/// 3 * ceil(side / factor)^2
Eigen::Index pooled_dimension(Eigen::Index side, int factor);

/// Non-overlapping factor x factor mean pooling; the last window in each
/// direction may be smaller when factor does not divide the image side.
FeatureVector pool_features(const ImageStack& stack, int factor = kDefaultPooling);

/// Training examples stored row-wise (n x D) with class indices 0..25.
struct LabeledSet {
  Eigen::MatrixXd x;
  std::vector<int> labels;

  Eigen::Index size() const { return x.rows(); }
  static LabeledSet from_vectors(const std::vector<FeatureVector>& features,
                                 const std::vector<int>& labels);
};

/// Per-feature affine map fitted on training data: z = (x - mean) / scale.
/// Features with (population) std below 1e-12 get scale 1.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

/// Interface shared by every per-sensor model.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string_view kind() const = 0;
  virtual Eigen::Index dimension() const = 0;

  /// Row r of the result is the posterior of row r of `x` (n x 26).
  virtual Eigen::MatrixXd predict_proba_batch(const Eigen::MatrixXd& x) const = 0;

  /// Writes the self-describing text form; see load_classifier.
  virtual void save(std::ostream& out) const = 0;

  ClassProbabilities predict_proba(const FeatureVector& features) const;
  /// Pools with the factor the model was trained on, then predicts.
  ClassProbabilities predict_proba(const ImageStack& stack) const;

  int pooling_factor() const { return pooling_factor_; }
  void set_pooling_factor(int factor) { pooling_factor_ = factor; }

 private:
  int pooling_factor_ = kDefaultPooling;
};

/// Nearest-centroid model with a softmax over -temperature * distance.
class CentroidModel final : public Classifier {
 public:
  CentroidModel(Standardizer standardizer, Eigen::MatrixXd centroids, double temperature);

  std::string_view kind() const override { return "centroid"; }
  Eigen::Index dimension() const override { return centroids_.cols(); }
  Eigen::MatrixXd predict_proba_batch(const Eigen::MatrixXd& x) const override;
  void save(std::ostream& out) const override;

  const Eigen::MatrixXd& centroids() const { return centroids_; }
  const Standardizer& standardizer() const { return standardizer_; }
  double temperature() const { return temperature_; }

 private:
  Standardizer standardizer_;
  Eigen::MatrixXd centroids_;  // 26 x D, standardized space
  double temperature_;
};

inline constexpr double kDefaultTemperature = 1.0;

/// Requires at least one example of every class; throws DataError listing the
/// missing letters otherwise.
std::unique_ptr<CentroidModel> fit_centroid(const LabeledSet& train,
                                            double temperature = kDefaultTemperature);

struct LogisticConfig {
  double step = 0.1;
  double l2 = 1e-4;
  int max_epochs = 2000;
  int patience = 10;
  std::uint64_t seed = 0;
};

/// Raised when the cross-entropy cannot be evaluated to a finite value.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Multinomial logistic regression on standardized features.
class LogisticModel final : public Classifier {
 public:
  LogisticModel(Standardizer standardizer, Eigen::MatrixXd weights, Eigen::VectorXd bias,
                LogisticConfig config = {});

  std::string_view kind() const override { return "logistic"; }
  Eigen::Index dimension() const override { return weights_.cols(); }
  Eigen::MatrixXd predict_proba_batch(const Eigen::MatrixXd& x) const override;
  void save(std::ostream& out) const override;

  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& bias() const { return bias_; }
  const Standardizer& standardizer() const { return standardizer_; }
  const LogisticConfig& config() const { return config_; }

  /// Training loss after initialization and after every accepted step.
  std::vector<double> train_loss_history;
  std::vector<double> val_loss_history;
  int epochs_run = 0;
  int best_epoch = 0;

 private:
  Standardizer standardizer_;
  Eigen::MatrixXd weights_;  // 26 x D
  Eigen::VectorXd bias_;     // 26
  LogisticConfig config_;
};

/// Mean cross-entropy plus (l2 / 2) * ||W||^2 (the bias is not penalized)
/// for samples in the rows of `x`.
double cross_entropy_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                          const Eigen::MatrixXd& x, const std::vector<int>& labels, double l2);

struct LossGradient {
  double loss = 0.0;
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

LossGradient cross_entropy_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                    const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                    double l2);

/// Full-batch gradient descent from zero weights. A step that would raise
/// the training loss is retried with half the step size. Training ends after
/// max_epochs, when the step size underflows, or when the validation loss
/// has not improved for `patience` consecutive epochs; the parameters with
/// the best validation loss are returned. With an empty validation set the
/// final parameters are returned.
std::unique_ptr<LogisticModel> fit_logistic(const LabeledSet& train, const LabeledSet& val,
                                            const LogisticConfig& config = {});

enum class ClassifierKind { kCentroid, kLogistic };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view name);

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::kLogistic;
  double temperature = kDefaultTemperature;
  LogisticConfig logistic;
};

std::unique_ptr<Classifier> train_classifier(const ClassifierConfig& config, const LabeledSet& train,
                                             const LabeledSet& val, int pooling_factor);

/// Two independently trained models of the same kind.
struct SensorModelPair {
  std::unique_ptr<Classifier> accel;
  std::unique_ptr<Classifier> gyro;
};

/// Reads the format written by Classifier::save.
std::unique_ptr<Classifier> load_classifier(std::istream& in);

}  // namespace imair
