#include <cmath>
#include <limits>

#include "imair/classifier.hpp"

namespace imair {

namespace {

// Smallest step, relative to the configured one, before training is
// considered stalled.
constexpr double kMinStepRatio = 0x1.0p-40;

struct Forward {
  double loss = 0.0;
  Eigen::MatrixXd probs;  // n x K
};

void check_labels(const std::vector<int>& labels, Eigen::Index rows, Eigen::Index classes) {
  if (static_cast<Eigen::Index>(labels.size()) != rows) throw UsageError("label count does not match rows");
  for (int y : labels) {
    if (y < 0 || y >= classes) throw DataError("label index out of range: " + std::to_string(y));
  }
}

Forward forward(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias, const Eigen::MatrixXd& x,
                const std::vector<int>& labels, double l2) {
  Forward f;
  f.probs.noalias() = x * weights.transpose();
  f.probs.rowwise() += bias.transpose();
  double nll = 0.0;
  for (Eigen::Index r = 0; r < f.probs.rows(); ++r) {
    auto row = f.probs.row(r);
    const double peak = row.maxCoeff();
    row.array() -= peak;
    const double z = row.array().exp().sum();
    const double log_z = std::log(z);
    nll -= row(labels[static_cast<std::size_t>(r)]) - log_z;
    row.array() = (row.array() - log_z).exp();
  }
  const auto n = static_cast<double>(std::max<Eigen::Index>(x.rows(), 1));
  f.loss = nll / n + 0.5 * l2 * weights.squaredNorm();
  return f;
}

/// Gradient from the probabilities of a forward pass at the same parameters.
void backward(const Forward& f, const Eigen::MatrixXd& weights, const Eigen::MatrixXd& x,
              const std::vector<int>& labels, double l2, Eigen::MatrixXd& grad_w, Eigen::VectorXd& grad_b) {
  Eigen::MatrixXd residual = f.probs;
  for (Eigen::Index r = 0; r < residual.rows(); ++r) residual(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
  const auto n = static_cast<double>(std::max<Eigen::Index>(x.rows(), 1));
  grad_w.noalias() = residual.transpose() * x;
  grad_w /= n;
  grad_w += l2 * weights;
  grad_b = residual.colwise().sum().transpose() / n;
}

}  // namespace

LogisticModel::LogisticModel(Standardizer standardizer, Eigen::MatrixXd weights, Eigen::VectorXd bias,
                             LogisticConfig config)
    : standardizer_(std::move(standardizer)),
      weights_(std::move(weights)),
      bias_(std::move(bias)),
      config_(config) {
  if (weights_.rows() != kNumClasses || bias_.size() != kNumClasses) {
    throw DataError("logistic model needs 26 weight rows and 26 biases");
  }
  if (standardizer_.mean.size() != weights_.cols()) throw DataError("standardizer and weights differ in dimension");
  if (!weights_.allFinite() || !bias_.allFinite()) throw DataError("logistic model parameters must be finite");
}

Eigen::MatrixXd LogisticModel::predict_proba_batch(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd z = standardizer_.apply(x);
  const std::vector<int> dummy(static_cast<std::size_t>(z.rows()), 0);
  return forward(weights_, bias_, z, dummy, 0.0).probs;
}

double cross_entropy_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias, const Eigen::MatrixXd& x,
                          const std::vector<int>& labels, double l2) {
  check_labels(labels, x.rows(), weights.rows());
  return forward(weights, bias, x, labels, l2).loss;
}

LossGradient cross_entropy_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                    const Eigen::MatrixXd& x, const std::vector<int>& labels, double l2) {
  check_labels(labels, x.rows(), weights.rows());
  const Forward f = forward(weights, bias, x, labels, l2);
  LossGradient g;
  g.loss = f.loss;
  backward(f, weights, x, labels, l2, g.weights, g.bias);
  return g;
}

std::unique_ptr<LogisticModel> fit_logistic(const LabeledSet& train, const LabeledSet& val,
                                            const LogisticConfig& config) {
  if (train.size() == 0) throw DataError("logistic training set is empty");
  if (!(config.step > 0.0) || !(config.l2 >= 0.0) || config.max_epochs < 0 || config.patience < 1) {
    throw UsageError("invalid logistic config (step > 0, l2 >= 0, max_epochs >= 0, patience >= 1)");
  }
  check_labels(train.labels, train.x.rows(), kNumClasses);
  const bool use_val = val.size() > 0;
  if (use_val) {
    check_labels(val.labels, val.x.rows(), kNumClasses);
    if (val.x.cols() != train.x.cols()) throw DataError("train and validation features differ in dimension");
  }

  Standardizer standardizer = Standardizer::fit(train.x);
  const Eigen::MatrixXd x = standardizer.apply(train.x);
  const Eigen::MatrixXd xv = use_val ? standardizer.apply(val.x) : Eigen::MatrixXd();

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(kNumClasses, x.cols());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(kNumClasses);
  Forward current = forward(w, b, x, train.labels, config.l2);
  if (!std::isfinite(current.loss)) throw TrainingError("training loss is not finite", 0);

  Eigen::MatrixXd grad_w;
  Eigen::VectorXd grad_b;
  backward(current, w, x, train.labels, config.l2, grad_w, grad_b);
  if (!grad_w.allFinite() || !grad_b.allFinite()) throw TrainingError("gradient is not finite", 0);

  std::vector<double> train_history{current.loss};
  std::vector<double> val_history;
  double best_val = std::numeric_limits<double>::infinity();
  if (use_val) {
    best_val = forward(w, b, xv, val.labels, config.l2).loss;
    val_history.push_back(best_val);
  }
  Eigen::MatrixXd best_w = w;
  Eigen::VectorXd best_b = b;
  int best_epoch = 0;
  int since_best = 0;
  int epoch = 0;
  double step = config.step;

  while (epoch < config.max_epochs) {
    const int this_epoch = epoch + 1;
    Eigen::MatrixXd trial_w;
    Eigen::VectorXd trial_b;
    Forward trial;
    bool accepted = false;
    bool saw_finite = false;
    while (step >= config.step * kMinStepRatio) {
      trial_w = w - step * grad_w;
      trial_b = b - step * grad_b;
      trial = forward(trial_w, trial_b, x, train.labels, config.l2);
      saw_finite = saw_finite || std::isfinite(trial.loss);
      if (std::isfinite(trial.loss) && trial.loss <= current.loss) {
        accepted = true;
        break;
      }
      step /= 2.0;
    }
    if (!accepted) {
      if (!saw_finite) throw TrainingError("training diverged: loss is not finite", this_epoch);
      break;  // stalled at a minimum
    }
    epoch = this_epoch;
    w = std::move(trial_w);
    b = std::move(trial_b);
    current = std::move(trial);
    train_history.push_back(current.loss);
    backward(current, w, x, train.labels, config.l2, grad_w, grad_b);
    if (!grad_w.allFinite() || !grad_b.allFinite()) throw TrainingError("gradient is not finite", epoch);

    if (!use_val) continue;
    const double val_loss = forward(w, b, xv, val.labels, config.l2).loss;
    if (!std::isfinite(val_loss)) throw TrainingError("validation loss is not finite", epoch);
    val_history.push_back(val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best_w = w;
      best_b = b;
      best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  if (!use_val) {
    best_w = w;
    best_b = b;
    best_epoch = epoch;
  }
  auto model = std::make_unique<LogisticModel>(std::move(standardizer), std::move(best_w), std::move(best_b), config);
  model->train_loss_history = std::move(train_history);
  model->val_loss_history = std::move(val_history);
  model->epochs_run = epoch;
  model->best_epoch = best_epoch;
  return model;
}

}  // namespace imair
