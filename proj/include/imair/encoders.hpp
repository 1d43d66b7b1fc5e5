#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imair/common.hpp"
#include "imair/signal.hpp"

namespace imair {

enum class Method { kSsm, kGasf, kGadf, kMtf };

std::string_view to_string(Method method);
/// Accepts "ssm", "gasf", "gadf", "mtf"; throws UsageError otherwise.
Method parse_method(std::string_view name);

inline constexpr int kDefaultBins = 8;

/// N x N image of one series.
struct EncodedImage {
  Eigen::MatrixXd pixels;
  Method method = Method::kSsm;
};

/// Three same-size images encoded with one method from one sensor.
struct ImageStack {
  std::array<EncodedImage, kAxesPerSensor> channels;
  SensorKind kind = SensorKind::kAccelerometer;

  Eigen::Index size() const { return channels[0].pixels.rows(); }
  Method method() const { return channels[0].method; }
};

/// Angles theta_i = arccos(v_i) in [0, pi] and radii r_i = i / N (1-based i).
/// The radii are kept for completeness; no encoder reads them.
struct PolarSeries {
  std::vector<double> theta;
  std::vector<double> radius;
};

/// Quantile bins. Bin indices are 0-based (0..Q-1); `boundaries` holds the
/// Q-1 empirical quantiles at levels k/Q.
struct BinAssignment {
  std::vector<int> bin_of;
  std::vector<double> boundaries;
  int bins = 0;
};

/// counts(i, j) = number of steps from bin j to bin i; w is counts with every
/// non-empty column normalized to sum 1.
struct TransitionMatrix {
  Eigen::MatrixXd w;
  Eigen::MatrixXi counts;
};

/// |v_i - v_j|.
EncodedImage ssm_encode(std::span<const double> v);

/// Min-max rescale to [-1, 1]. A series whose range is below 1e-12 maps to
/// all zeros.
std::vector<double> rescale_minmax(std::span<const double> v);

PolarSeries to_polar(std::span<const double> rescaled);

/// cos(theta_i + theta_j)
EncodedImage gasf_encode(std::span<const double> v);

/// sin(theta_i - theta_j)
EncodedImage gadf_encode(std::span<const double> v);

/// Empirical quantiles use linear interpolation between order statistics
/// (position p * (N - 1) in the sorted series). Sample i goes to the lowest
/// bin whose boundary is >= v_i, or to the last bin.
BinAssignment assign_bins(std::span<const double> v, int bins);

TransitionMatrix transition_matrix(const BinAssignment& assignment);

/// pixels(k, l) = w(bin(v_k), bin(v_l)).
EncodedImage mtf_encode(std::span<const double> v, int bins = kDefaultBins);

EncodedImage encode(std::span<const double> v, Method method, int bins = kDefaultBins);

/// Channel c is `method` applied to column c of `channels`.
ImageStack encode_stack(const SensorChannels& channels, Method method, int bins = kDefaultBins);

}  // namespace imair
