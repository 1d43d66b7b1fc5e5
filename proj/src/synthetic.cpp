#include "imair/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <system_error>

#include "imair/rng.hpp"

namespace imair {

namespace fs = std::filesystem;

namespace {

constexpr int kComponents = 3;
constexpr double kMinFreqHz = 0.2;
constexpr double kMaxFreqHz = 2.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Sinusoid {
  double amplitude;
  double freq_hz;
  double phase;
};

struct ClassTemplate {
  std::array<std::array<Sinusoid, kComponents>, kNumAxes> axes;
};

struct SubjectStyle {
  double speed;
  std::array<double, kNumAxes> gain;
  std::array<Sinusoid, kNumAxes> drift;
};

ClassTemplate class_template(const SyntheticSpec& spec, int label) {
  Rng rng(mix_seed(spec.seed, 1000 + static_cast<std::uint64_t>(label)));
  ClassTemplate t;
  for (auto& axis : t.axes) {
    for (auto& s : axis) {
      s.amplitude = rng.uniform(0.5, 1.5);
      s.freq_hz = rng.uniform(kMinFreqHz, kMaxFreqHz);
      s.phase = rng.uniform(0.0, kTwoPi);
    }
  }
  return t;
}

SubjectStyle subject_style(const SyntheticSpec& spec, int subject) {
  Rng rng(mix_seed(spec.seed, 2000 + static_cast<std::uint64_t>(subject)));
  SubjectStyle style;
  style.speed = 1.0 + 0.2 * spec.subject_jitter * rng.uniform(-1.0, 1.0);
  for (int a = 0; a < kNumAxes; ++a) {
    style.gain[a] = 1.0 + 0.5 * spec.subject_jitter * rng.uniform(-1.0, 1.0);
    style.drift[a] = {spec.subject_jitter * rng.uniform(0.5, 1.5),
                      rng.uniform(kMinFreqHz, kMaxFreqHz), rng.uniform(0.0, kTwoPi)};
  }
  return style;
}

double evaluate(const Sinusoid& s, double t) {
  return s.amplitude * std::sin(kTwoPi * s.freq_hz * t + s.phase);
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.n_subjects < 2) throw UsageError("synthetic dataset needs at least 2 subjects");
  if (spec.n_repetitions < 1) throw UsageError("synthetic dataset needs at least 1 repetition");
  if (!(spec.class_separation > 0.0)) throw UsageError("class separation must be positive");
  if (!(spec.noise_scale >= 0.0)) throw UsageError("noise scale must be non-negative");
  if (!(spec.subject_jitter >= 0.0)) throw UsageError("subject jitter must be non-negative");
  if (!(spec.sample_rate_hz > 0.0)) throw UsageError("sample rate must be positive");
  if (spec.min_length < 2 || spec.max_length < spec.min_length) {
    throw UsageError("synthetic length range must satisfy 2 <= min <= max");
  }
}

std::string synthetic_subject_id(const SyntheticSpec& spec, int subject) {
  const int width = std::max<int>(2, static_cast<int>(std::to_string(spec.n_subjects).size()));
  std::string digits = std::to_string(subject + 1);
  return "S" + std::string(static_cast<std::size_t>(std::max<int>(0, width - static_cast<int>(digits.size()))), '0') + digits;
}

RawRecording synthesize_recording(const SyntheticSpec& spec, int subject, int label,
                                  int repetition) {
  const ClassTemplate tmpl = class_template(spec, label);
  const SubjectStyle style = subject_style(spec, subject);
  const std::uint64_t key = (static_cast<std::uint64_t>(subject) << 32) |
                            (static_cast<std::uint64_t>(label) << 16) |
                            static_cast<std::uint64_t>(repetition);
  Rng rng(mix_seed(spec.seed, 0x5eedULL ^ (key << 8)));

  const auto span = static_cast<std::uint64_t>(spec.max_length - spec.min_length + 1);
  const int length = spec.min_length + static_cast<int>(rng.below(span));

  RawRecording rec;
  rec.info = {synthetic_subject_id(spec, subject), index_letter(label), repetition,
              spec.sample_rate_hz};
  rec.samples.resize(length, kNumAxes);
  for (int i = 0; i < length; ++i) {
    const double t = static_cast<double>(i) / spec.sample_rate_hz;
    for (int a = 0; a < kNumAxes; ++a) {
      double value = 0.0;
      for (const auto& s : tmpl.axes[a]) value += evaluate(s, t * style.speed);
      value = spec.class_separation * style.gain[a] * value + evaluate(style.drift[a], t);
      if (spec.noise_scale > 0.0) value += spec.noise_scale * rng.normal();
      rec.samples(i, a) = std::round(value * 1e6) / 1e6;
    }
  }
  return rec;
}

Manifest generate_synthetic(const SyntheticSpec& spec, const fs::path& out_dir) {
  validate(spec);
  std::error_code ec;
  fs::create_directories(out_dir / "recordings", ec);
  if (ec) throw DataError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  Manifest manifest;
  manifest.root = out_dir;
  manifest.dataset_name = fs::absolute(out_dir).filename().string();
  for (int subject = 0; subject < spec.n_subjects; ++subject) {
    const std::string sid = synthetic_subject_id(spec, subject);
    fs::create_directories(out_dir / "recordings" / sid, ec);
    if (ec) throw DataError("cannot create directory for subject " + sid + ": " + ec.message());
    for (int label = 0; label < kNumClasses; ++label) {
      for (int rep = 0; rep < spec.n_repetitions; ++rep) {
        const RawRecording rec = synthesize_recording(spec, subject, label, rep);
        const fs::path rel = fs::path("recordings") / sid /
                             (std::string(1, index_letter(label)) + "_" + std::to_string(rep) + ".csv");
        save_recording(rec, out_dir / rel);
        manifest.entries.push_back({rec.info, rel});
      }
    }
  }
  save_manifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

}  // namespace imair
