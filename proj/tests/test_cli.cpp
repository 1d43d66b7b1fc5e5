#include <gtest/gtest.h>

#include "imair/cli.hpp"
#include "imair/evaluation.hpp"
#include "imair/image_io.hpp"
#include "imair/synthetic.hpp"
#include "test_util.hpp"

using namespace imair;
using testutil::TempDir;

namespace {

std::size_t count_files(const std::filesystem::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    n += e.is_regular_file() && e.path().extension() == ext;
  return n;
}

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli({}), kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}), kExitUsage);
  EXPECT_EQ(run_cli({"synth"}), kExitUsage);
  TempDir dir("cli");
  EXPECT_EQ(run_cli({"synth", "--subjects", "1", "--out", (dir / "d").string()}), kExitUsage);
  EXPECT_EQ(run_cli({"synth", "--subjects", "two", "--out", (dir / "d").string()}), kExitUsage);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli({"--help"}), kExitOk); }

TEST(Cli, SynthCountsAndIsByteIdentical) {
  TempDir dir("cli");
  const auto a = dir / "a", b = dir / "b";
  ASSERT_EQ(run_cli({"synth", "--subjects", "3", "--reps", "2", "--seed", "7", "--out", a.string()}), kExitOk);
  ASSERT_EQ(run_cli({"synth", "--subjects", "3", "--reps", "2", "--seed", "7", "--out", b.string()}), kExitOk);
  EXPECT_EQ(count_files(a, ".csv"), 3u * 26u * 2u + 1u);
  for (const auto& e : std::filesystem::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), a);
    EXPECT_EQ(testutil::read_file(e.path()), testutil::read_file(b / rel.string())) << rel;
  }
  EXPECT_TRUE(std::filesystem::exists(a / "config.txt"));
}

TEST(Cli, EncodeMatchesLibrary) {
  TempDir dir("cli");
  SyntheticSpec spec;
  spec.n_subjects = 2;
  spec.n_repetitions = 1;
  const auto manifest = generate_synthetic(spec, dir / "data");
  const auto manifest_path = (dir / "data" / "manifest.csv").string();

  for (const char* method : {"gadf", "mtf"}) {
    const auto out = dir / (std::string("enc_") + method);
    ASSERT_EQ(run_cli({"encode", "--manifest", manifest_path, "--method", method, "--q", "8", "--index", "5",
                       "--out", out.string()}),
              kExitOk);
    EXPECT_EQ(count_files(out, ".imair"), 2u);
    EncodingConfig config;
    config.method = parse_method(method);
    const auto& entry = manifest.entries[5];
    const auto [accel, gyro] = encode_recording(load_recording(manifest, entry), config);
    const std::string stem = entry.info.subject_id + "_" + entry.info.label + "_" + std::to_string(entry.info.repetition);
    const auto got_a = import_image_raw(out / (stem + "_accel.imair"));
    const auto got_g = import_image_raw(out / (stem + "_gyro.imair"));
    ASSERT_EQ(got_a.size(), 3u);
    ASSERT_EQ(got_g.size(), 3u);
    for (int c = 0; c < 3; ++c) {
      EXPECT_EQ(got_a[c].rows(), 155);
      EXPECT_TRUE(got_a[c] == accel.channels[c].pixels);
      EXPECT_TRUE(got_g[c] == gyro.channels[c].pixels);
    }
    EXPECT_NE(testutil::read_file(out / "config.txt").find(std::string("method=") + method), std::string::npos);
  }
}

TEST(Cli, EncodeRejectsUnknownMethodAndBadIndex) {
  TempDir dir("cli");
  SyntheticSpec spec;
  spec.n_subjects = 2;
  spec.n_repetitions = 1;
  generate_synthetic(spec, dir / "data");
  const auto manifest_path = (dir / "data" / "manifest.csv").string();
  EXPECT_EQ(run_cli({"encode", "--manifest", manifest_path, "--method", "wavelet", "--out", (dir / "o").string()}),
            kExitUsage);
  EXPECT_EQ(run_cli({"encode", "--manifest", manifest_path, "--index", "9999", "--out", (dir / "o").string()}),
            kExitUsage);
  EXPECT_EQ(run_cli({"encode", "--manifest", (dir / "missing.csv").string(), "--out", (dir / "o").string()}),
            kExitData);
}

TEST(Cli, ExportPngWritesSixImagesWithSidecars) {
  TempDir dir("cli");
  SyntheticSpec spec;
  spec.n_subjects = 2;
  spec.n_repetitions = 1;
  generate_synthetic(spec, dir / "data");
  ASSERT_EQ(run_cli({"export-png", "--manifest", (dir / "data" / "manifest.csv").string(), "--method", "gasf",
                     "--out", (dir / "png").string()}),
            kExitOk);
  EXPECT_EQ(count_files(dir / "png", ".png"), 6u);
  EXPECT_TRUE(std::filesystem::exists(dir / "png" / "S01_A_0_gyro_2.png.txt"));
}

TEST(Cli, SplitWritesPlans) {
  TempDir dir("cli");
  SyntheticSpec spec;
  spec.n_subjects = 4;
  spec.n_repetitions = 1;
  generate_synthetic(spec, dir / "data");
  ASSERT_EQ(run_cli({"split", "--manifest", (dir / "data" / "manifest.csv").string(), "--mode", "loso", "--out",
                     (dir / "s").string()}),
            kExitOk);
  const auto text = testutil::read_file(dir / "s" / "splits.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 4 * 4);
  EXPECT_EQ(run_cli({"split", "--manifest", (dir / "data" / "manifest.csv").string(), "--mode", "fixed",
                     "--train-subjects", "4", "--out", (dir / "s2").string()}),
            kExitData);
}

TEST(Cli, EvalLosoMatchesLibrary) {
  TempDir dir("cli");
  SyntheticSpec spec;
  spec.n_subjects = 4;
  spec.n_repetitions = 1;
  const auto manifest = generate_synthetic(spec, dir / "data");
  ASSERT_EQ(run_cli({"eval", "--manifest", (dir / "data" / "manifest.csv").string(), "--mode", "loso",
                     "--classifier", "centroid", "--workers", "2", "--out", (dir / "e").string()}),
            kExitOk);
  const auto rows = read_summary_csv(dir / "e" / "summary.csv");
  ASSERT_EQ(rows.size(), 5u);

  EvaluationConfig config;
  config.classifier.kind = ClassifierKind::kCentroid;
  const auto report = loso_evaluate(manifest, config);
  TempDir lib("cli");
  emit_report(report, lib.path());
  for (const char* name : {"summary.csv", "confusion.csv", "records.csv", "aggregate.txt"}) {
    EXPECT_EQ(testutil::read_file(dir / "e" / name), testutil::read_file(lib / name)) << name;
  }
  const auto echo = testutil::read_file(dir / "e" / "config.txt");
  for (const char* key : {"method=gadf", "bins=8", "pooling=5", "classifier=centroid", "seed=0", "mode=loso"})
    EXPECT_NE(echo.find(key), std::string::npos) << key;
}

TEST(Cli, TrainSavesLoadableModels) {
  TempDir dir("cli");
  SyntheticSpec spec;
  spec.n_subjects = 3;
  spec.n_repetitions = 1;
  generate_synthetic(spec, dir / "data");
  ASSERT_EQ(run_cli({"train", "--manifest", (dir / "data" / "manifest.csv").string(), "--classifier", "centroid",
                     "--out", (dir / "m").string()}),
            kExitOk);
  for (const char* name : {"accel.model", "gyro.model"}) {
    std::ifstream in(dir / "m" / name);
    const auto model = load_classifier(in);
    EXPECT_EQ(model->kind(), "centroid");
    EXPECT_EQ(model->dimension(), 2883);
  }
}

TEST(Cli, EvalRejectsBadValues) {
  TempDir dir("cli");
  SyntheticSpec spec;
  spec.n_subjects = 2;
  spec.n_repetitions = 1;
  generate_synthetic(spec, dir / "data");
  const auto m = (dir / "data" / "manifest.csv").string();
  EXPECT_EQ(run_cli({"eval", "--manifest", m, "--mode", "kfold", "--out", (dir / "e").string()}), kExitUsage);
  EXPECT_EQ(run_cli({"eval", "--manifest", m, "--classifier", "svm", "--out", (dir / "e").string()}), kExitUsage);
  EXPECT_EQ(run_cli({"eval", "--manifest", m, "--q", "1", "--out", (dir / "e").string()}), kExitUsage);
}
