#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "imair/evaluation.hpp"
#include "text_util.hpp"

namespace imair {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string letters_header(std::string_view first) {
  std::string s(first);
  for (int c = 0; c < kNumClasses; ++c) {
    s += ',';
    s += index_letter(c);
  }
  return s + '\n';
}

}  // namespace

void write_key_values(const std::vector<std::pair<std::string, std::string>>& pairs, const fs::path& path) {
  std::string text;
  for (const auto& [k, v] : pairs) text += k + "=" + v + "\n";
  write_file(path, text);
}

void emit_report(const EvaluationReport& report, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());

  std::string summary = "fold_id,n_test,acc_accel,acc_gyro,acc_fused\n";
  std::size_t total = 0;
  for (const auto& f : report.folds) {
    if (f.failed) continue;
    summary += f.fold_id + "," + std::to_string(f.records.size()) + "," + fmt17(f.acc_accel) + "," +
               fmt17(f.acc_gyro) + "," + fmt17(f.acc_fused) + "\n";
    total += f.records.size();
  }
  summary += "mean," + std::to_string(total) + "," + fmt17(report.mean_accel) + "," + fmt17(report.mean_gyro) +
             "," + fmt17(report.mean_fused) + "\n";
  write_file(out_dir / "summary.csv", summary);

  std::string counts = letters_header("label");
  std::string normalized = letters_header("label");
  const auto norm = normalized_confusion(report.confusion);
  for (int i = 0; i < kNumClasses; ++i) {
    counts += index_letter(i);
    normalized += index_letter(i);
    for (int j = 0; j < kNumClasses; ++j) {
      counts += "," + std::to_string(report.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      normalized += "," + fmt17(norm[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
    counts += '\n';
    normalized += '\n';
  }
  write_file(out_dir / "confusion.csv", counts);
  write_file(out_dir / "confusion_normalized.csv", normalized);

  std::string records = "fold_id,manifest_row,subject_id,true_label,pred_accel,pred_gyro,pred_fused,p_fused_true\n";
  for (const auto& f : report.folds) {
    for (const auto& r : f.records) {
      records += f.fold_id + "," + std::to_string(r.entry) + "," + r.subject_id + "," + r.true_label + "," +
                 predict_label(r.accel) + "," + predict_label(r.gyro) + "," + r.predicted + "," +
                 fmt17(r.fused[letter_index(r.true_label)]) + "\n";
    }
  }
  write_file(out_dir / "records.csv", records);

  std::vector<std::pair<std::string, std::string>> aggregate = {
      {"folds", std::to_string(report.folds.size())},
      {"failed_folds", std::to_string(report.failed_folds())},
      {"test_records", std::to_string(total)},
      {"mean_acc_accel", fmt17(report.mean_accel)},
      {"mean_acc_gyro", fmt17(report.mean_gyro)},
      {"mean_acc_fused", fmt17(report.mean_fused)},
      {"std_acc_fused", fmt17(report.std_fused)},
      {"weighted_acc_fused", fmt17(report.weighted_fused)},
  };
  for (const auto& f : report.folds) {
    if (f.failed) aggregate.emplace_back("failed." + f.fold_id, f.error);
  }
  write_key_values(aggregate, out_dir / "aggregate.txt");
  write_key_values(report.config, out_dir / "config.txt");
}

std::vector<SummaryRow> read_summary_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "fold_id,n_test,acc_accel,acc_gyro,acc_fused") {
    throw DataError(path.string() + ": unexpected summary header");
  }
  std::vector<SummaryRow> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_row(line);
    const auto n = cells.size() == 5 ? detail::parse_int(cells[1]) : std::nullopt;
    const auto a = cells.size() == 5 ? detail::parse_double(cells[2]) : std::nullopt;
    const auto g = cells.size() == 5 ? detail::parse_double(cells[3]) : std::nullopt;
    const auto f = cells.size() == 5 ? detail::parse_double(cells[4]) : std::nullopt;
    if (!n || !a || !g || !f) throw DataError(path.string() + ": row " + std::to_string(row) + " is malformed");
    rows.push_back({std::string(cells[0]), static_cast<std::size_t>(*n), *a, *g, *f});
  }
  return rows;
}

}  // namespace imair
