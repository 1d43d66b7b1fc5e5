#include "imair/classifier.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "text_util.hpp"

namespace imair {

namespace {

constexpr double kDegenerateStd = 1e-12;

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd logits) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return logits;
}

ClassProbabilities row_to_probabilities(const Eigen::MatrixXd& probs, Eigen::Index r) {
  ClassProbabilities out;
  for (int c = 0; c < kNumClasses; ++c) out.p[static_cast<std::size_t>(c)] = probs(r, c);
  return out;
}

}  // namespace

bool ClassProbabilities::is_simplex(double tol) const {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

ClassProbabilities fuse(const ClassProbabilities& accel, const ClassProbabilities& gyro) {
  ClassProbabilities out;
  for (std::size_t i = 0; i < out.p.size(); ++i) out.p[i] = (accel.p[i] + gyro.p[i]) / 2.0;
  return out;
}

int predict_index(const ClassProbabilities& probs) {
  int best = 0;
  for (int i = 1; i < kNumClasses; ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

char predict_label(const ClassProbabilities& probs) { return index_letter(predict_index(probs)); }

Eigen::Index pooled_dimension(Eigen::Index side, int factor) {
  const Eigen::Index windows = (side + factor - 1) / factor;
  return kAxesPerSensor * windows * windows;
}

FeatureVector pool_features(const ImageStack& stack, int factor) {
  const Eigen::Index n = stack.size();
  if (factor < 1 || factor > n) {
    throw UsageError("pooling factor must be in [1, " + std::to_string(n) + "], got " +
                     std::to_string(factor));
  }
  const Eigen::Index windows = (n + factor - 1) / factor;
  FeatureVector out;
  out.pooling_factor = factor;
  out.x.resize(pooled_dimension(n, factor));
  Eigen::Index k = 0;
  for (const auto& channel : stack.channels) {
    if (channel.pixels.rows() != n || channel.pixels.cols() != n) {
      throw DataError("image stack channels differ in size");
    }
    for (Eigen::Index wr = 0; wr < windows; ++wr) {
      const Eigen::Index r0 = wr * factor;
      const Eigen::Index rows = std::min<Eigen::Index>(factor, n - r0);
      for (Eigen::Index wc = 0; wc < windows; ++wc) {
        const Eigen::Index c0 = wc * factor;
        const Eigen::Index cols = std::min<Eigen::Index>(factor, n - c0);
        out.x[k++] = channel.pixels.block(r0, c0, rows, cols).mean();
      }
    }
  }
  return out;
}

LabeledSet LabeledSet::from_vectors(const std::vector<FeatureVector>& features,
                                    const std::vector<int>& labels) {
  if (features.size() != labels.size()) throw UsageError("features and labels differ in count");
  LabeledSet set;
  set.labels = labels;
  if (features.empty()) return set;
  const Eigen::Index d = features.front().x.size();
  set.x.resize(static_cast<Eigen::Index>(features.size()), d);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].x.size() != d) throw DataError("feature vectors differ in dimension");
    set.x.row(static_cast<Eigen::Index>(i)) = features[i].x.transpose();
  }
  return set;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw DataError("cannot standardize an empty training set");
  Standardizer s;
  const auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().sum() / n;
  s.scale.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double sd = std::sqrt((x.col(c).array() - s.mean[c]).square().sum() / n);
    s.scale[c] = sd < kDegenerateStd ? 1.0 : sd;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) {
    throw DataError("feature dimension mismatch: model expects " + std::to_string(mean.size()) +
                    ", got " + std::to_string(x.cols()));
  }
  return (x.rowwise() - mean).array().rowwise() / scale.array();
}

ClassProbabilities Classifier::predict_proba(const FeatureVector& features) const {
  if (features.x.size() != dimension()) {
    throw DataError("feature dimension mismatch: model expects " + std::to_string(dimension()) +
                    ", got " + std::to_string(features.x.size()));
  }
  return row_to_probabilities(predict_proba_batch(features.x.transpose()), 0);
}

ClassProbabilities Classifier::predict_proba(const ImageStack& stack) const {
  return predict_proba(pool_features(stack, pooling_factor_));
}

// ---------------------------------------------------------------------------
// Centroid model

CentroidModel::CentroidModel(Standardizer standardizer, Eigen::MatrixXd centroids, double temperature)
    : standardizer_(std::move(standardizer)), centroids_(std::move(centroids)), temperature_(temperature) {
  if (centroids_.rows() != kNumClasses) throw DataError("centroid model needs 26 centroids");
  if (!(temperature_ > 0.0)) throw UsageError("temperature must be positive");
}

Eigen::MatrixXd CentroidModel::predict_proba_batch(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd z = standardizer_.apply(x);
  Eigen::MatrixXd logits(z.rows(), kNumClasses);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (int c = 0; c < kNumClasses; ++c) {
      logits(r, c) = -temperature_ * (z.row(r) - centroids_.row(c)).norm();
    }
  }
  return softmax_rows(std::move(logits));
}

std::unique_ptr<CentroidModel> fit_centroid(const LabeledSet& train, double temperature) {
  if (train.size() == 0) throw DataError("centroid training set is empty");
  if (!(temperature > 0.0)) throw UsageError("temperature must be positive");
  Standardizer standardizer = Standardizer::fit(train.x);
  const Eigen::MatrixXd z = standardizer.apply(train.x);

  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(kNumClasses, z.cols());
  std::array<int, kNumClasses> counts{};
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const int label = train.labels[static_cast<std::size_t>(i)];
    sums.row(label) += z.row(i);
    ++counts[static_cast<std::size_t>(label)];
  }
  std::string missing;
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) missing += index_letter(c);
  }
  if (!missing.empty()) throw DataError("training set has no examples of classes: " + missing);
  for (int c = 0; c < kNumClasses; ++c) sums.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  return std::make_unique<CentroidModel>(std::move(standardizer), std::move(sums), temperature);
}

// ---------------------------------------------------------------------------
// Kinds and dispatch

std::string_view to_string(ClassifierKind kind) {
  return kind == ClassifierKind::kCentroid ? "centroid" : "logistic";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  if (name == "centroid") return ClassifierKind::kCentroid;
  if (name == "logistic") return ClassifierKind::kLogistic;
  throw UsageError("unknown classifier '" + std::string(name) + "' (valid: centroid, logistic)");
}

std::unique_ptr<Classifier> train_classifier(const ClassifierConfig& config, const LabeledSet& train,
                                             const LabeledSet& val, int pooling_factor) {
  std::unique_ptr<Classifier> model;
  if (config.kind == ClassifierKind::kCentroid) {
    model = fit_centroid(train, config.temperature);
  } else {
    model = fit_logistic(train, val, config.logistic);
  }
  model->set_pooling_factor(pooling_factor);
  return model;
}

// ---------------------------------------------------------------------------
// Serialization
//
//   imair-model 1
//   key=value lines (kind, classes, dimension, pooling, hyperparameters)
//   matrix <name> <rows> <cols>
//   <rows lines of space-separated hexfloats>
//   ...
//   end

namespace {

std::string hexfloat(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, ptr);
}

double parse_hexfloat(std::string_view s) {
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("model file: bad number '" + std::string(s) + "'");
  }
  return negative ? -v : v;
}

void write_matrix(std::ostream& out, std::string_view name, const Eigen::MatrixXd& m) {
  out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << hexfloat(m(r, c));
    }
    out << '\n';
  }
}

void write_common(std::ostream& out, const Classifier& model) {
  out << "imair-model 1\n"
      << "kind=" << model.kind() << '\n'
      << "classes=" << kNumClasses << '\n'
      << "dimension=" << model.dimension() << '\n'
      << "pooling=" << model.pooling_factor() << '\n';
}

struct ParsedModel {
  std::map<std::string, std::string> keys;
  std::map<std::string, Eigen::MatrixXd> matrices;

  const std::string& key(const std::string& name) const {
    const auto it = keys.find(name);
    if (it == keys.end()) throw DataError("model file: missing key '" + name + "'");
    return it->second;
  }
  const Eigen::MatrixXd& matrix(const std::string& name) const {
    const auto it = matrices.find(name);
    if (it == matrices.end()) throw DataError("model file: missing matrix '" + name + "'");
    return it->second;
  }
  std::uint64_t unsigned_integer(const std::string& name) const {
    const auto v = detail::parse_uint(key(name));
    if (!v) throw DataError("model file: key '" + name + "' is not an unsigned integer");
    return *v;
  }
  long long integer(const std::string& name) const {
    const auto v = detail::parse_int(key(name));
    if (!v) throw DataError("model file: key '" + name + "' is not an integer");
    return *v;
  }
  double real(const std::string& name) const { return parse_hexfloat(key(name)); }
};

ParsedModel parse_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "imair-model 1") {
    throw DataError("not an imair model file");
  }
  ParsedModel parsed;
  while (std::getline(in, line)) {
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    if (text == "end") return parsed;
    if (text.starts_with("matrix ")) {
      std::istringstream header{std::string(text)};
      std::string tag, name;
      Eigen::Index rows = 0, cols = 0;
      header >> tag >> name >> rows >> cols;
      if (!header || rows < 0 || cols < 0) throw DataError("model file: bad matrix header");
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw DataError("model file: truncated matrix " + name);
        std::istringstream row(line);
        std::string cell;
        for (Eigen::Index c = 0; c < cols; ++c) {
          if (!(row >> cell)) throw DataError("model file: short row in matrix " + name);
          m(r, c) = parse_hexfloat(cell);
        }
      }
      parsed.matrices[name] = std::move(m);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw DataError("model file: bad line '" + std::string(text) + "'");
    parsed.keys[std::string(text.substr(0, eq))] = std::string(text.substr(eq + 1));
  }
  throw DataError("model file: missing 'end'");
}

Standardizer read_standardizer(const ParsedModel& parsed) {
  return {parsed.matrix("mean"), parsed.matrix("scale")};
}

}  // namespace

void CentroidModel::save(std::ostream& out) const {
  write_common(out, *this);
  out << "temperature=" << hexfloat(temperature_) << '\n';
  write_matrix(out, "mean", standardizer_.mean);
  write_matrix(out, "scale", standardizer_.scale);
  write_matrix(out, "centroids", centroids_);
  out << "end\n";
}

void LogisticModel::save(std::ostream& out) const {
  write_common(out, *this);
  out << "step=" << hexfloat(config_.step) << '\n'
      << "l2=" << hexfloat(config_.l2) << '\n'
      << "max_epochs=" << config_.max_epochs << '\n'
      << "patience=" << config_.patience << '\n'
      << "seed=" << config_.seed << '\n'
      << "epochs_run=" << epochs_run << '\n'
      << "best_epoch=" << best_epoch << '\n';
  write_matrix(out, "mean", standardizer().mean);
  write_matrix(out, "scale", standardizer().scale);
  write_matrix(out, "weights", weights_);
  write_matrix(out, "bias", bias_);
  out << "end\n";
}

std::unique_ptr<Classifier> load_classifier(std::istream& in) {
  const ParsedModel parsed = parse_model(in);
  if (parsed.integer("classes") != kNumClasses) throw DataError("model file: expected 26 classes");
  const std::string& kind = parsed.key("kind");
  std::unique_ptr<Classifier> model;
  if (kind == "centroid") {
    model = std::make_unique<CentroidModel>(read_standardizer(parsed), parsed.matrix("centroids"),
                                            parsed.real("temperature"));
  } else if (kind == "logistic") {
    LogisticConfig config;
    config.step = parsed.real("step");
    config.l2 = parsed.real("l2");
    config.max_epochs = static_cast<int>(parsed.integer("max_epochs"));
    config.patience = static_cast<int>(parsed.integer("patience"));
    config.seed = parsed.unsigned_integer("seed");
    auto logistic = std::make_unique<LogisticModel>(read_standardizer(parsed), parsed.matrix("weights"),
                                                    parsed.matrix("bias"), config);
    logistic->epochs_run = static_cast<int>(parsed.integer("epochs_run"));
    logistic->best_epoch = static_cast<int>(parsed.integer("best_epoch"));
    model = std::move(logistic);
  } else {
    throw DataError("model file: unknown kind '" + kind + "'");
  }
  if (model->dimension() != parsed.integer("dimension")) throw DataError("model file: dimension mismatch");
  model->set_pooling_factor(static_cast<int>(parsed.integer("pooling")));
  return model;
}

}  // namespace imair
