#pragma once

// Reference implementations written directly from the defining formulas,
// deliberately sharing no code with the library. Slow but obvious.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

inline std::vector<double> random_series(std::mt19937_64& gen, int n, double lo = -3.0, double hi = 3.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = dist(gen);
  return v;
}

inline Eigen::MatrixXd ssm(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = std::sqrt((v[i] - v[j]) * (v[i] - v[j]));
  return m;
}

inline std::vector<double> rescale(const std::vector<double>& v) {
  double mx = v[0], mn = v[0];
  for (double x : v) {
    if (x > mx) mx = x;
    if (x < mn) mn = x;
  }
  std::vector<double> out;
  for (double x : v) {
    if (mx - mn < 1e-12) {
      out.push_back(0.0);
    } else {
      double r = ((x - mx) + (x - mn)) / (mx - mn);
      out.push_back(r > 1.0 ? 1.0 : (r < -1.0 ? -1.0 : r));
    }
  }
  return out;
}

inline std::vector<double> angles(const std::vector<double>& v) {
  std::vector<double> theta;
  for (double r : rescale(v)) theta.push_back(std::acos(r));
  return theta;
}

inline Eigen::MatrixXd gasf(const std::vector<double>& v) {
  const auto t = angles(v);
  const int n = static_cast<int>(v.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = std::cos(t[i] + t[j]);
  return m;
}

inline Eigen::MatrixXd gadf(const std::vector<double>& v) {
  const auto t = angles(v);
  const int n = static_cast<int>(v.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = std::sin(t[i] - t[j]);
  return m;
}

/// Empirical quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const int lo = static_cast<int>(h);
  if (lo + 1 >= static_cast<int>(v.size())) return v[lo];
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

/// 0-based bin of each sample: the number of boundaries strictly below it.
inline std::vector<int> bins(const std::vector<double>& v, int q) {
  std::vector<double> edges;
  for (int k = 1; k < q; ++k) edges.push_back(quantile(v, static_cast<double>(k) / q));
  std::vector<int> out;
  for (double x : v) {
    int b = 0;
    for (double e : edges) b += (x > e) ? 1 : 0;
    out.push_back(b);
  }
  return out;
}

inline Eigen::MatrixXd transition(const std::vector<int>& b, int q) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(q, q);
  for (std::size_t t = 1; t < b.size(); ++t) w(b[t], b[t - 1]) += 1.0;
  for (int j = 0; j < q; ++j) {
    double s = 0.0;
    for (int i = 0; i < q; ++i) s += w(i, j);
    if (s > 0)
      for (int i = 0; i < q; ++i) w(i, j) /= s;
  }
  return w;
}

inline Eigen::MatrixXd mtf(const std::vector<double>& v, int q) {
  const auto b = bins(v, q);
  const auto w = transition(b, q);
  const int n = static_cast<int>(v.size());
  Eigen::MatrixXd m(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) m(k, l) = w(b[k], b[l]);
  return m;
}

/// Value of the piecewise-linear interpolant through samples (i, y[i]) at x.
inline double interpolate(const std::vector<double>& y, double x) {
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (x >= static_cast<double>(i) && x <= static_cast<double>(i + 1)) {
      const double f = x - static_cast<double>(i);
      return (1.0 - f) * y[i] + f * y[i + 1];
    }
  }
  return y.back();
}

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace oracle
