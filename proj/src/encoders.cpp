#include "imair/encoders.hpp"

#include <algorithm>
#include <cmath>

namespace imair {

namespace {

constexpr double kDegenerateRange = 1e-12;

void require_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw DataError("series contains non-finite values");
  }
}

void require_non_empty(std::span<const double> v) {
  if (v.empty()) throw DataError("series is empty");
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kSsm: return "ssm";
    case Method::kGasf: return "gasf";
    case Method::kGadf: return "gadf";
    case Method::kMtf: return "mtf";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "ssm") return Method::kSsm;
  if (name == "gasf") return Method::kGasf;
  if (name == "gadf") return Method::kGadf;
  if (name == "mtf") return Method::kMtf;
  throw UsageError("unknown encoding method '" + std::string(name) +
                   "' (valid: ssm, gasf, gadf, mtf)");
}

EncodedImage ssm_encode(std::span<const double> v) {
  require_non_empty(v);
  require_finite(v);
  const auto n = static_cast<Eigen::Index>(v.size());
  EncodedImage img{Eigen::MatrixXd(n, n), Method::kSsm};
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      img.pixels(i, j) = std::abs(v[i] - v[j]);
    }
  }
  return img;
}

std::vector<double> rescale_minmax(std::span<const double> v) {
  require_non_empty(v);
  require_finite(v);
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double range = hi - lo;
  std::vector<double> out(v.size(), 0.0);
  if (range < kDegenerateRange) return out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::clamp(((v[i] - hi) + (v[i] - lo)) / range, -1.0, 1.0);
  }
  return out;
}

PolarSeries to_polar(std::span<const double> rescaled) {
  PolarSeries polar;
  const auto n = static_cast<double>(rescaled.size());
  polar.theta.reserve(rescaled.size());
  polar.radius.reserve(rescaled.size());
  for (std::size_t i = 0; i < rescaled.size(); ++i) {
    polar.theta.push_back(std::acos(std::clamp(rescaled[i], -1.0, 1.0)));
    polar.radius.push_back(static_cast<double>(i + 1) / n);
  }
  return polar;
}

namespace {

struct AngleTable {
  std::vector<double> cos;
  std::vector<double> sin;
};

AngleTable angle_table(std::span<const double> v) {
  const PolarSeries polar = to_polar(rescale_minmax(v));
  AngleTable t;
  t.cos.reserve(polar.theta.size());
  t.sin.reserve(polar.theta.size());
  for (double theta : polar.theta) {
    t.cos.push_back(std::cos(theta));
    t.sin.push_back(std::sin(theta));
  }
  return t;
}

}  // namespace

// The angle identities cos(a + b) = cos a cos b - sin a sin b and
// sin(a - b) = sin a cos b - cos a sin b avoid N^2 trig calls.
EncodedImage gasf_encode(std::span<const double> v) {
  const AngleTable t = angle_table(v);
  const auto n = static_cast<Eigen::Index>(v.size());
  EncodedImage img{Eigen::MatrixXd(n, n), Method::kGasf};
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      img.pixels(i, j) = t.cos[i] * t.cos[j] - t.sin[i] * t.sin[j];
    }
  }
  return img;
}

EncodedImage gadf_encode(std::span<const double> v) {
  const AngleTable t = angle_table(v);
  const auto n = static_cast<Eigen::Index>(v.size());
  EncodedImage img{Eigen::MatrixXd(n, n), Method::kGadf};
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      img.pixels(i, j) = t.sin[i] * t.cos[j] - t.cos[i] * t.sin[j];
    }
  }
  return img;
}

BinAssignment assign_bins(std::span<const double> v, int bins) {
  if (bins < 2) throw UsageError("number of bins must be >= 2, got " + std::to_string(bins));
  if (v.size() < 2) throw DataError("binning needs a series of length >= 2");
  require_finite(v);

  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  const auto last = static_cast<double>(sorted.size() - 1);

  BinAssignment out;
  out.bins = bins;
  out.boundaries.reserve(bins - 1);
  for (int k = 1; k < bins; ++k) {
    const double pos = last * static_cast<double>(k) / static_cast<double>(bins);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    double q = sorted[lo];
    if (frac > 0.0 && lo + 1 < sorted.size()) q += frac * (sorted[lo + 1] - sorted[lo]);
    out.boundaries.push_back(q);
  }
  // Interpolation cannot break monotonicity mathematically; guard rounding.
  for (std::size_t k = 1; k < out.boundaries.size(); ++k) {
    out.boundaries[k] = std::max(out.boundaries[k], out.boundaries[k - 1]);
  }

  out.bin_of.reserve(v.size());
  for (double x : v) {
    const auto it = std::lower_bound(out.boundaries.begin(), out.boundaries.end(), x);
    out.bin_of.push_back(static_cast<int>(it - out.boundaries.begin()));
  }
  return out;
}

TransitionMatrix transition_matrix(const BinAssignment& assignment) {
  const int q = assignment.bins;
  if (q < 2) throw UsageError("number of bins must be >= 2");
  if (assignment.bin_of.size() < 2) throw DataError("transition matrix needs >= 2 samples");

  TransitionMatrix tm;
  tm.counts = Eigen::MatrixXi::Zero(q, q);
  for (std::size_t t = 0; t + 1 < assignment.bin_of.size(); ++t) {
    const int from = assignment.bin_of[t];
    const int to = assignment.bin_of[t + 1];
    if (from < 0 || from >= q || to < 0 || to >= q) throw DataError("bin index out of range");
    ++tm.counts(to, from);
  }
  tm.w = Eigen::MatrixXd::Zero(q, q);
  for (int j = 0; j < q; ++j) {
    const int total = tm.counts.col(j).sum();
    if (total == 0) continue;
    for (int i = 0; i < q; ++i) {
      tm.w(i, j) = static_cast<double>(tm.counts(i, j)) / static_cast<double>(total);
    }
  }
  return tm;
}

EncodedImage mtf_encode(std::span<const double> v, int bins) {
  const BinAssignment assignment = assign_bins(v, bins);
  const TransitionMatrix tm = transition_matrix(assignment);
  const auto n = static_cast<Eigen::Index>(v.size());
  EncodedImage img{Eigen::MatrixXd(n, n), Method::kMtf};
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index k = 0; k < n; ++k) {
      img.pixels(k, l) = tm.w(assignment.bin_of[k], assignment.bin_of[l]);
    }
  }
  return img;
}

EncodedImage encode(std::span<const double> v, Method method, int bins) {
  switch (method) {
    case Method::kSsm: return ssm_encode(v);
    case Method::kGasf: return gasf_encode(v);
    case Method::kGadf: return gadf_encode(v);
    case Method::kMtf: return mtf_encode(v, bins);
  }
  throw UsageError("unknown encoding method");
}

ImageStack encode_stack(const SensorChannels& channels, Method method, int bins) {
  if (channels.values.cols() != kAxesPerSensor) {
    throw DataError("sensor channels must have 3 columns");
  }
  ImageStack stack;
  stack.kind = channels.kind;
  for (int c = 0; c < kAxesPerSensor; ++c) {
    const Eigen::VectorXd column = channels.values.col(c);
    stack.channels[c] = encode(std::span<const double>(column.data(), column.size()), method, bins);
  }
  return stack;
}

}  // namespace imair
