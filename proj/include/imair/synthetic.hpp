#pragma once

#include <cstdint>
#include <filesystem>

#include "imair/manifest.hpp"

namespace imair {

/// Parameters of a synthetic 26-class airwriting-like dataset.
///
/// Each class owns a 6-channel template; every channel is a sum of three
/// sinusoids with class-specific frequency, amplitude and phase. A recording
/// is the template scaled by `class_separation`, distorted per subject, plus
/// white noise with standard deviation `noise_scale`. With jitter j a subject
/// writes at speed 1 +- 0.2j, scales each axis by 1 +- 0.5j and adds a slow
/// sinusoidal drift of amplitude j * [0.5, 1.5].
/// Lengths are uniform in [min_length, max_length].
struct SyntheticSpec {
  int n_subjects = 20;
  int n_repetitions = 10;
  std::uint64_t seed = 7;
  double class_separation = 1.0;
  double noise_scale = 4.0;
  double subject_jitter = 1.0;
  double sample_rate_hz = 62.0;
  int min_length = 120;
  int max_length = 190;
};

void validate(const SyntheticSpec& spec);

/// Subject ids are "S01", "S02", ... (zero-padded to sort numerically).
std::string synthetic_subject_id(const SyntheticSpec& spec, int subject);

/// Samples are quantized to 1e-6 so the CSV text is short and reloads exactly.
RawRecording synthesize_recording(const SyntheticSpec& spec, int subject, int label, int repetition);

/// Writes manifest.csv plus one CSV per recording under `out_dir` and returns
/// the manifest. Output bytes depend only on `spec`.
Manifest generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace imair
