#include "imair/signal.hpp"

#include <cmath>

namespace imair {

namespace {

constexpr double kDegenerateStd = 1e-12;

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw DataError(std::string(what) + ": samples contain non-finite values");
  }
}

}  // namespace

void validate(const RawRecording& rec) {
  if (rec.samples.rows() < 1) throw DataError("recording has no samples");
  if (rec.samples.cols() != kNumAxes) {
    throw DataError("expected 6 data columns, got " + std::to_string(rec.samples.cols()));
  }
  require_finite(rec.samples, "recording");
  if (!(rec.info.sample_rate_hz > 0.0) || !std::isfinite(rec.info.sample_rate_hz)) {
    throw DataError("sample rate must be positive");
  }
  letter_index(rec.info.label);
}

RawRecording resample(const RawRecording& rec, double target_hz) {
  validate(rec);
  const double source_hz = rec.info.sample_rate_hz;
  if (!(target_hz > 0.0) || !std::isfinite(target_hz)) {
    throw UsageError("target rate must be positive");
  }
  if (target_hz > source_hz) {
    throw UsageError("upsampling is not supported: " + std::to_string(source_hz) + " Hz -> " +
                     std::to_string(target_hz) + " Hz");
  }
  const Eigen::Index in_len = rec.samples.rows();
  if (in_len < 2) throw DataError("resampling needs at least 2 samples");

  const auto out_len = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(in_len) * target_hz / source_hz));
  RawRecording out;
  out.info = rec.info;
  out.info.sample_rate_hz = target_hz;
  out.samples.resize(std::max<Eigen::Index>(out_len, 1), kNumAxes);

  const double ratio = source_hz / target_hz;
  const double last = static_cast<double>(in_len - 1);
  for (Eigen::Index k = 0; k < out.samples.rows(); ++k) {
    const double pos = std::min(static_cast<double>(k) * ratio, last);
    const auto lo = static_cast<Eigen::Index>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) {
      out.samples.row(k) = rec.samples.row(lo);
    } else {
      out.samples.row(k) =
          rec.samples.row(lo) + frac * (rec.samples.row(lo + 1) - rec.samples.row(lo));
    }
  }
  return out;
}

FixedSignal fix_length(const RawRecording& rec, int target_len) {
  validate(rec);
  if (target_len < 1) throw UsageError("target length must be positive");
  FixedSignal out;
  out.info = rec.info;
  out.samples = Eigen::MatrixXd::Zero(target_len, kNumAxes);
  const Eigen::Index keep = std::min<Eigen::Index>(rec.samples.rows(), target_len);
  out.samples.topRows(keep) = rec.samples.topRows(keep);
  return out;
}

FixedSignal z_normalize(const FixedSignal& sig) {
  require_finite(sig.samples, "z_normalize");
  FixedSignal out = sig;
  const auto n = static_cast<double>(sig.samples.rows());
  for (Eigen::Index c = 0; c < sig.samples.cols(); ++c) {
    auto col = out.samples.col(c);
    const double mean = col.sum() / n;
    const double var = (col.array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd < kDegenerateStd) {
      col.setZero();
    } else {
      col = (col.array() - mean) / sd;
    }
  }
  out.normalized = true;
  return out;
}

std::pair<SensorChannels, SensorChannels> split_channels(const FixedSignal& sig) {
  if (sig.samples.cols() != kNumAxes) {
    throw DataError("expected 6 data columns, got " + std::to_string(sig.samples.cols()));
  }
  SensorChannels accel{sig.samples.leftCols(kAxesPerSensor), SensorKind::kAccelerometer};
  SensorChannels gyro{sig.samples.rightCols(kAxesPerSensor), SensorKind::kGyroscope};
  return {std::move(accel), std::move(gyro)};
}

FixedSignal preprocess(const RawRecording& rec, const PreprocessConfig& config) {
  if (rec.info.sample_rate_hz > config.target_hz) {
    return z_normalize(fix_length(resample(rec, config.target_hz), config.length));
  }
  return z_normalize(fix_length(rec, config.length));
}

}  // namespace imair
