#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace imair {

inline constexpr int kNumClasses = 26;
inline constexpr int kNumAxes = 6;
inline constexpr int kAxesPerSensor = 3;
inline constexpr int kFixedLength = 155;
inline constexpr double kTargetRateHz = 62.0;

/// Thrown for malformed or inconsistent input data (files, manifests,
/// recordings). The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for invalid parameters supplied by the caller (exit code 1).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SensorKind { kAccelerometer, kGyroscope };

inline std::string_view to_string(SensorKind kind) {
  return kind == SensorKind::kAccelerometer ? "accel" : "gyro";
}

/// Letters map to class indices 0..25 (A..Z).
inline int letter_index(char letter) {
  if (letter < 'A' || letter > 'Z') {
    throw DataError(std::string("label must be an uppercase letter A-Z, got '") + letter + "'");
  }
  return letter - 'A';
}

inline char index_letter(int index) {
  if (index < 0 || index >= kNumClasses) {
    throw std::out_of_range("class index out of range: " + std::to_string(index));
  }
  return static_cast<char>('A' + index);
}

}  // namespace imair
