#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "imair/common.hpp"

namespace imair {

struct RecordingInfo {
  std::string subject_id;
  char label = 'A';
  int repetition = 0;
  double sample_rate_hz = kTargetRateHz;

  bool operator==(const RecordingInfo&) const = default;
};

/// One airwriting recording: L rows x 6 columns (ax, ay, az, gx, gy, gz).
struct RawRecording {
  Eigen::MatrixXd samples;
  RecordingInfo info;
};

/// Throws DataError unless the recording has >= 1 row, exactly 6 columns,
/// finite samples, a positive sample rate and a label in A..Z.
void validate(const RawRecording& rec);

/// Fixed-length recording. `normalized` records whether z_normalize ran.
struct FixedSignal {
  Eigen::MatrixXd samples;
  RecordingInfo info;
  bool normalized = false;
};

/// Three columns of one sensor, column order preserved.
struct SensorChannels {
  Eigen::MatrixXd values;
  SensorKind kind = SensorKind::kAccelerometer;
};

/// Linear-interpolation resampling to `target_hz`. Output sample k sits at
/// time k / target_hz; its input position k * source_hz / target_hz is
/// clamped to the last sample. Output length is round(L * target / source).
/// Upsampling is rejected.
RawRecording resample(const RawRecording& rec, double target_hz);

/// Keeps the first `target_len` rows or appends zero rows at the end.
FixedSignal fix_length(const RawRecording& rec, int target_len = kFixedLength);

/// Per-column (x - mean) / std with the population standard deviation.
/// Columns whose std is below 1e-12 become all zeros.
FixedSignal z_normalize(const FixedSignal& sig);

/// Columns 0-2 are the accelerometer, 3-5 the gyroscope.
std::pair<SensorChannels, SensorChannels> split_channels(const FixedSignal& sig);

struct PreprocessConfig {
  double target_hz = kTargetRateHz;
  int length = kFixedLength;
};

/// The full chain in its fixed order: resample (only when the recording is
/// faster than target_hz), fix_length, z_normalize.
FixedSignal preprocess(const RawRecording& rec, const PreprocessConfig& config = {});

}  // namespace imair
