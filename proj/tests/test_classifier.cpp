#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "imair/classifier.hpp"
#include "oracles.hpp"

using namespace imair;

namespace {

ImageStack random_stack(std::mt19937_64& gen, int n = 155) {
  ImageStack stack;
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& ch : stack.channels) {
    ch.method = Method::kGadf;
    ch.pixels.resize(n, n);
    for (Eigen::Index i = 0; i < ch.pixels.size(); ++i) ch.pixels.data()[i] = dist(gen);
  }
  return stack;
}

// Window mean by explicit enumeration of every covered pixel.
std::vector<double> pool_oracle(const ImageStack& stack, int f) {
  const int n = static_cast<int>(stack.size());
  std::vector<double> out;
  for (const auto& ch : stack.channels) {
    for (int r0 = 0; r0 < n; r0 += f) {
      for (int c0 = 0; c0 < n; c0 += f) {
        double sum = 0.0;
        int count = 0;
        for (int r = r0; r < std::min(n, r0 + f); ++r)
          for (int c = c0; c < std::min(n, c0 + f); ++c) {
            sum += ch.pixels(r, c);
            ++count;
          }
        out.push_back(sum / count);
      }
    }
  }
  return out;
}

ClassProbabilities random_simplex(std::mt19937_64& gen) {
  std::exponential_distribution<double> dist(1.0);
  ClassProbabilities p;
  double total = 0.0;
  for (auto& x : p.p) total += (x = dist(gen));
  for (auto& x : p.p) x /= total;
  return p;
}

ClassProbabilities one_hot(int i) {
  ClassProbabilities p;
  p.p[static_cast<std::size_t>(i)] = 1.0;
  return p;
}

// 26 Gaussian blobs in `dim` dimensions with centers far apart.
LabeledSet blobs(std::mt19937_64& gen, int per_class, int dim, double spread) {
  std::normal_distribution<double> noise(0.0, spread);
  std::uniform_real_distribution<double> center(-50.0, 50.0);
  Eigen::MatrixXd centers(kNumClasses, dim);
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = center(gen);
  LabeledSet set;
  set.x.resize(kNumClasses * per_class, dim);
  for (int c = 0; c < kNumClasses; ++c)
    for (int k = 0; k < per_class; ++k) {
      const int row = c * per_class + k;
      for (int d = 0; d < dim; ++d) set.x(row, d) = centers(c, d) + noise(gen);
      set.labels.push_back(c);
    }
  return set;
}

double accuracy(const Classifier& model, const LabeledSet& set) {
  const Eigen::MatrixXd p = model.predict_proba_batch(set.x);
  int correct = 0;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    Eigen::Index best;
    p.row(r).maxCoeff(&best);
    correct += best == set.labels[static_cast<std::size_t>(r)];
  }
  return static_cast<double>(correct) / static_cast<double>(p.rows());
}

}  // namespace

TEST(Pooling, ConstantStack) {
  ImageStack stack;
  for (auto& ch : stack.channels) ch.pixels = Eigen::MatrixXd::Constant(155, 155, 0.375);
  const auto f = pool_features(stack);
  EXPECT_EQ(f.x.size(), 2883);
  EXPECT_EQ(pooled_dimension(155, 5), 2883);
  for (Eigen::Index i = 0; i < f.x.size(); ++i) EXPECT_NEAR(f.x[i], 0.375, 1e-15);
}

TEST(Pooling, GlobalPoolingGivesChannelMeans) {
  std::mt19937_64 gen(50);
  const auto stack = random_stack(gen);
  const auto f = pool_features(stack, 155);
  ASSERT_EQ(f.x.size(), 3);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(f.x[c], stack.channels[c].pixels.mean(), 1e-12);
}

TEST(Pooling, MatchesWindowOracle) {
  std::mt19937_64 gen(51);
  const auto stack = random_stack(gen);
  for (int factor : {5, 7, 1}) {
    const auto f = pool_features(stack, factor);
    const auto want = pool_oracle(stack, factor);
    ASSERT_EQ(f.x.size(), static_cast<Eigen::Index>(want.size()));
    EXPECT_EQ(f.pooling_factor, factor);
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(f.x[static_cast<Eigen::Index>(i)], want[i], 1e-12);
  }
}

TEST(Pooling, RejectsBadFactor) {
  std::mt19937_64 gen(52);
  const auto stack = random_stack(gen, 10);
  EXPECT_THROW(pool_features(stack, 0), UsageError);
  EXPECT_THROW(pool_features(stack, 11), UsageError);
}

TEST(Centroid, OneExamplePerClassRecoversOwnClass) {
  std::mt19937_64 gen(53);
  std::normal_distribution<double> dist;
  LabeledSet set;
  set.x.resize(kNumClasses, 6);
  for (Eigen::Index i = 0; i < set.x.size(); ++i) set.x.data()[i] = dist(gen);
  for (int c = 0; c < kNumClasses; ++c) set.labels.push_back(c);
  const auto model = fit_centroid(set);
  const Eigen::MatrixXd p = model->predict_proba_batch(set.x);
  for (int c = 0; c < kNumClasses; ++c) {
    for (int k = 0; k < kNumClasses; ++k) {
      if (k == c) continue;
      EXPECT_GT(p(c, c), p(c, k));
    }
    EXPECT_NEAR(p.row(c).sum(), 1.0, 1e-9);
  }
}

TEST(Centroid, IdenticalCentroidsTieToLowerIndex) {
  LabeledSet set;
  set.x = Eigen::MatrixXd::Zero(kNumClasses, 2);
  for (int c = 0; c < kNumClasses; ++c) {
    set.labels.push_back(c);
    set.x(c, 0) = c;
    set.x(c, 1) = c % 3;
  }
  set.x.row(8) = set.x.row(4);
  const auto model = fit_centroid(set);
  EXPECT_TRUE(model->centroids().row(4) == model->centroids().row(8));
  FeatureVector f{set.x.row(4).transpose(), kDefaultPooling};
  const auto p = model->predict_proba(f);
  EXPECT_EQ(p[4], p[8]);
  EXPECT_EQ(predict_index(p), 4);
}

TEST(Centroid, SeparableBlobsPerfectOnTraining) {
  std::mt19937_64 gen(54);
  const auto set = blobs(gen, 8, 10, 0.5);
  const auto model = fit_centroid(set);
  EXPECT_EQ(accuracy(*model, set), 1.0);
}

TEST(Centroid, MissingClassListedInError) {
  std::mt19937_64 gen(55);
  auto set = blobs(gen, 2, 3, 0.5);
  for (auto& l : set.labels)
    if (l == 2 || l == 17) l = 0;
  try {
    fit_centroid(set);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('C'), std::string::npos) << msg;
    EXPECT_NE(msg.find('R'), std::string::npos) << msg;
  }
  EXPECT_THROW(fit_centroid(LabeledSet{}), DataError);
}

TEST(Centroid, InvariantToExampleOrder) {
  std::mt19937_64 gen(56);
  const auto set = blobs(gen, 4, 5, 3.0);
  std::vector<int> order(set.labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), gen);
  LabeledSet shuffled;
  shuffled.x.resize(set.x.rows(), set.x.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    shuffled.x.row(static_cast<Eigen::Index>(i)) = set.x.row(order[i]);
    shuffled.labels.push_back(set.labels[static_cast<std::size_t>(order[i])]);
  }
  const auto a = fit_centroid(set);
  const auto b = fit_centroid(shuffled);
  const auto probe = blobs(gen, 1, 5, 3.0);
  EXPECT_LE((a->predict_proba_batch(probe.x) - b->predict_proba_batch(probe.x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Logistic, SeparableTwoClassToy) {
  std::mt19937_64 gen(57);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LabeledSet set;
  set.x.resize(60, 2);
  for (int i = 0; i < 60; ++i) {
    double a = u(gen), b = u(gen);
    const int label = i % 2;
    // Margin of at least 0.2 around the line a + b = 0.
    const double shift = (label == 0 ? 1.0 : -1.0) * (0.2 + std::abs(a + b));
    set.x(i, 0) = a + shift / 2;
    set.x(i, 1) = b + shift / 2;
    set.labels.push_back(label);
  }
  for (int i = 0; i < 60; ++i) ASSERT_EQ(set.x(i, 0) + set.x(i, 1) > 0, set.labels[i] == 0);
  LogisticConfig config;
  config.max_epochs = 500;
  const auto model = fit_logistic(set, LabeledSet{}, config);
  EXPECT_LE(model->epochs_run, 500);
  EXPECT_EQ(accuracy(*model, set), 1.0);
}

TEST(Logistic, InitialLossIsLogOfClassCount) {
  std::mt19937_64 gen(58);
  const auto set = blobs(gen, 3, 4, 1.0);
  const Eigen::MatrixXd w = Eigen::MatrixXd::Zero(kNumClasses, 4);
  const Eigen::VectorXd b = Eigen::VectorXd::Zero(kNumClasses);
  EXPECT_NEAR(cross_entropy_loss(w, b, set.x, set.labels, 1e-4), std::log(26.0), 1e-9);
  LogisticConfig config;
  config.max_epochs = 3;
  const auto model = fit_logistic(set, LabeledSet{}, config);
  EXPECT_NEAR(model->train_loss_history.front(), std::log(26.0), 1e-9);
}

TEST(Logistic, GradientMatchesCentralDifferences) {
  std::mt19937_64 gen(59);
  std::normal_distribution<double> dist(0.0, 0.7);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 12, d = 5;
    Eigen::MatrixXd x(n, d), w(kNumClasses, d);
    Eigen::VectorXd b(kNumClasses);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = dist(gen);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(gen);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = dist(gen);
    std::vector<int> labels;
    std::uniform_int_distribution<int> label(0, kNumClasses - 1);
    for (int i = 0; i < n; ++i) labels.push_back(label(gen));
    const double l2 = 0.3;
    const auto g = cross_entropy_gradient(w, b, x, labels, l2);
    EXPECT_EQ(g.loss, cross_entropy_loss(w, b, x, labels, l2));

    const double h = 1e-6;
    Eigen::MatrixXd fd_w(kNumClasses, d);
    Eigen::VectorXd fd_b(kNumClasses);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      Eigen::MatrixXd plus = w, minus = w;
      plus.data()[i] += h;
      minus.data()[i] -= h;
      fd_w.data()[i] = (cross_entropy_loss(plus, b, x, labels, l2) - cross_entropy_loss(minus, b, x, labels, l2)) / (2 * h);
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      Eigen::VectorXd plus = b, minus = b;
      plus[i] += h;
      minus[i] -= h;
      fd_b[i] = (cross_entropy_loss(w, plus, x, labels, l2) - cross_entropy_loss(w, minus, x, labels, l2)) / (2 * h);
    }
    const double rel_w = (g.weights - fd_w).norm() / std::max(g.weights.norm(), fd_w.norm());
    const double rel_b = (g.bias - fd_b).norm() / std::max(g.bias.norm(), fd_b.norm());
    EXPECT_LE(rel_w, 1e-6);
    EXPECT_LE(rel_b, 1e-6);
  }
}

TEST(Logistic, ZeroWeightsGiveUniformPosterior) {
  std::mt19937_64 gen(60);
  const auto set = blobs(gen, 1, 3, 1.0);
  LogisticModel model(Standardizer::fit(set.x), Eigen::MatrixXd::Zero(kNumClasses, 3),
                      Eigen::VectorXd::Zero(kNumClasses));
  const Eigen::MatrixXd p = model.predict_proba_batch(set.x);
  EXPECT_LE((p.array() - 1.0 / 26.0).abs().maxCoeff(), 1e-15);
  EXPECT_EQ(predict_label(model.predict_proba(FeatureVector{set.x.row(5).transpose(), 5})), 'A');
}

TEST(Logistic, TrainingLossNeverIncreases) {
  std::mt19937_64 gen(61);
  const auto train = blobs(gen, 5, 8, 20.0);
  const auto val = blobs(gen, 2, 8, 20.0);
  LogisticConfig config;
  config.step = 5.0;  // large enough that backtracking is exercised
  config.max_epochs = 200;
  const auto model = fit_logistic(train, val, config);
  const auto& h = model->train_loss_history;
  ASSERT_GE(h.size(), 2u);
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1]);
  EXPECT_EQ(model->val_loss_history.size(), h.size());
  EXPECT_LE(model->best_epoch, model->epochs_run);
  const double best = *std::min_element(model->val_loss_history.begin(), model->val_loss_history.end());
  EXPECT_EQ(model->val_loss_history[static_cast<std::size_t>(model->best_epoch)], best);
}

TEST(Logistic, EarlyStoppingRestoresBestParameters) {
  std::mt19937_64 gen(62);
  // Validation labels unrelated to the features: validation loss turns up early.
  const auto train = blobs(gen, 4, 6, 1.0);
  auto val = blobs(gen, 2, 6, 1.0);
  std::shuffle(val.labels.begin(), val.labels.end(), gen);
  LogisticConfig config;
  config.patience = 3;
  const auto model = fit_logistic(train, val, config);
  EXPECT_LT(model->epochs_run, config.max_epochs);
  EXPECT_EQ(model->epochs_run - model->best_epoch, config.patience);
  const double val_loss = cross_entropy_loss(model->weights(), model->bias(), model->standardizer().apply(val.x),
                                             val.labels, config.l2);
  EXPECT_NEAR(val_loss, model->val_loss_history[static_cast<std::size_t>(model->best_epoch)], 1e-12);
}

TEST(Logistic, NonFiniteFeaturesRaiseTrainingError) {
  std::mt19937_64 gen(63);
  auto set = blobs(gen, 2, 3, 1.0);
  set.x(4, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    fit_logistic(set, LabeledSet{});
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.epoch(), 0);
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos);
  }
}

TEST(Logistic, DeterministicGivenData) {
  std::mt19937_64 gen(64);
  const auto train = blobs(gen, 3, 5, 10.0);
  const auto val = blobs(gen, 1, 5, 10.0);
  const auto a = fit_logistic(train, val);
  const auto b = fit_logistic(train, val);
  EXPECT_TRUE(a->weights() == b->weights());
  EXPECT_TRUE(a->bias() == b->bias());
}

TEST(Fusion, IdempotentCommutativeAndSimplex) {
  std::mt19937_64 gen(65);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_simplex(gen);
    const auto b = random_simplex(gen);
    const auto ab = fuse(a, b);
    const auto ba = fuse(b, a);
    EXPECT_EQ(ab.p, ba.p);
    EXPECT_TRUE(ab.is_simplex());
    for (int i = 0; i < kNumClasses; ++i) {
      EXPECT_NEAR(ab[i], (a[i] + b[i]) / 2, 1e-15);
      EXPECT_NEAR(fuse(a, a)[i], a[i], 1e-15);
    }
    // The halving never changes the decision.
    int best = 0;
    for (int i = 1; i < kNumClasses; ++i)
      if (a[i] + b[i] > a[best] + b[best]) best = i;
    EXPECT_EQ(predict_index(ab), best);
  }
}

TEST(Fusion, OneHotPair) {
  const auto f = fuse(one_hot(0), one_hot(1));
  EXPECT_EQ(f[0], 0.5);
  EXPECT_EQ(f[1], 0.5);
  for (int i = 2; i < kNumClasses; ++i) EXPECT_EQ(f[i], 0.0);
  EXPECT_EQ(predict_label(f), 'A');
}

TEST(Argmax, TiesAndOracle) {
  ClassProbabilities uniform;
  uniform.p.fill(1.0 / 26.0);
  EXPECT_EQ(predict_label(uniform), 'A');
  EXPECT_EQ(predict_label(one_hot(3)), 'D');
  std::mt19937_64 gen(66);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_simplex(gen);
    int best = 0;
    for (int i = 1; i < kNumClasses; ++i)
      if (p[i] > p[best]) best = i;
    EXPECT_EQ(predict_index(p), best);
  }
  EXPECT_FALSE(ClassProbabilities{}.is_simplex());
}

TEST(Persistence, LogisticRoundTripIsBitFaithful) {
  std::mt19937_64 gen(67);
  const auto train = blobs(gen, 3, 7, 10.0);
  const auto val = blobs(gen, 1, 7, 10.0);
  LogisticConfig config;
  config.seed = 0xfedcba9876543210ULL;
  const auto model = fit_logistic(train, val, config);
  model->set_pooling_factor(7);
  std::stringstream buf;
  model->save(buf);
  const auto loaded = load_classifier(buf);
  ASSERT_EQ(loaded->kind(), "logistic");
  EXPECT_EQ(loaded->pooling_factor(), 7);
  const auto& lm = dynamic_cast<const LogisticModel&>(*loaded);
  EXPECT_TRUE(lm.weights() == model->weights());
  EXPECT_TRUE(lm.bias() == model->bias());
  EXPECT_EQ(lm.config().seed, config.seed);
  EXPECT_TRUE(loaded->predict_proba_batch(val.x) == model->predict_proba_batch(val.x));
}

TEST(Persistence, CentroidRoundTripIsBitFaithful) {
  std::mt19937_64 gen(68);
  const auto train = blobs(gen, 2, 4, 5.0);
  const auto model = fit_centroid(train, 0.37);
  std::stringstream buf;
  model->save(buf);
  const auto loaded = load_classifier(buf);
  ASSERT_EQ(loaded->kind(), "centroid");
  EXPECT_TRUE(loaded->predict_proba_batch(train.x) == model->predict_proba_batch(train.x));
}

TEST(Persistence, RejectsGarbage) {
  std::stringstream bad("not a model\n");
  EXPECT_THROW(load_classifier(bad), DataError);
  std::stringstream truncated("imair-model 1\nkind=logistic\n");
  EXPECT_THROW(load_classifier(truncated), DataError);
}

TEST(Prediction, DimensionMismatchRejected) {
  std::mt19937_64 gen(69);
  const auto model = fit_centroid(blobs(gen, 1, 4, 1.0));
  EXPECT_THROW(model->predict_proba(FeatureVector{Eigen::VectorXd::Zero(5), 5}), DataError);
}
