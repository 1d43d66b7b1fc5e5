#include "imair/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "text_util.hpp"

namespace imair {

namespace fs = std::filesystem;
using detail::format_double;
using detail::parse_double;
using detail::parse_int;
using detail::split_csv_row;
using detail::trim;

namespace {

constexpr std::string_view kManifestHeader = "subject_id,label,repetition,sample_rate_hz,path";

[[noreturn]] void row_error(const fs::path& file, std::size_t row, const std::string& what) {
  throw DataError(file.string() + ": row " + std::to_string(row) + ": " + what);
}

}  // namespace

std::vector<std::string> Manifest::subjects() const {
  std::set<std::string> unique;
  for (const auto& e : entries) unique.insert(e.info.subject_id);
  return {unique.begin(), unique.end()};
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());

  Manifest manifest;
  manifest.root = path.parent_path();
  manifest.dataset_name = fs::absolute(path).parent_path().filename().string();

  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  std::set<std::tuple<std::string, char, int>> seen;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_row(line);
    if (!have_header) {
      std::string joined;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) joined += ',';
        joined += cells[i];
      }
      if (joined != kManifestHeader) {
        row_error(path, row, "expected header '" + std::string(kManifestHeader) + "'");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != 5) {
      row_error(path, row, "expected 5 columns, got " + std::to_string(cells.size()));
    }
    ManifestEntry entry;
    entry.info.subject_id = std::string(cells[0]);
    if (entry.info.subject_id.empty()) row_error(path, row, "empty subject_id");
    if (cells[1].size() != 1 || cells[1][0] < 'A' || cells[1][0] > 'Z') {
      row_error(path, row, "label must be a single letter A-Z");
    }
    entry.info.label = cells[1][0];
    const auto rep = parse_int(cells[2]);
    if (!rep || *rep < 0) row_error(path, row, "repetition must be a non-negative integer");
    entry.info.repetition = static_cast<int>(*rep);
    const auto rate = parse_double(cells[3]);
    if (!rate || !(*rate > 0.0) || !std::isfinite(*rate)) {
      row_error(path, row, "sample_rate_hz must be a positive number");
    }
    entry.info.sample_rate_hz = *rate;
    if (cells[4].empty()) row_error(path, row, "empty path");
    entry.path = fs::path(std::string(cells[4]));

    if (!seen.emplace(entry.info.subject_id, entry.info.label, entry.info.repetition).second) {
      row_error(path, row, "duplicate (subject_id, label, repetition) = (" +
                               entry.info.subject_id + ", " + entry.info.label + ", " +
                               std::to_string(entry.info.repetition) + ")");
    }
    const fs::path resolved = manifest.root / entry.path;
    if (!fs::is_regular_file(resolved)) {
      row_error(path, row, "recording file not found: " + resolved.string());
    }
    manifest.entries.push_back(std::move(entry));
  }
  if (!have_header) throw DataError(path.string() + ": no entries (empty manifest)");
  if (manifest.entries.empty()) throw DataError(path.string() + ": no entries");
  return manifest;
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << kManifestHeader << '\n';
  for (const auto& e : manifest.entries) {
    out << e.info.subject_id << ',' << e.info.label << ',' << e.info.repetition << ','
        << format_double(e.info.sample_rate_hz) << ',' << e.path.generic_string() << '\n';
  }
  if (!out) throw DataError("failed writing manifest " + path.string());
}

RawRecording load_recording(const fs::path& path, const RecordingInfo& info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open recording " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<double> values;
  std::size_t row = 0;
  std::size_t data_rows = 0;
  std::size_t pos = 0;
  bool first_line = true;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_row(line);
    const bool header_candidate = first_line;
    first_line = false;
    if (header_candidate && !parse_double(cells[0])) continue;
    if (cells.size() != kNumAxes) {
      throw DataError(path.string() + ": row " + std::to_string(row) +
                      ": expected 6 data columns, got " + std::to_string(cells.size()));
    }
    for (const auto cell : cells) {
      const auto v = parse_double(cell);
      if (!v) {
        throw DataError(path.string() + ": row " + std::to_string(row) + ": non-numeric cell '" +
                        std::string(cell) + "'");
      }
      if (!std::isfinite(*v)) {
        throw DataError(path.string() + ": row " + std::to_string(row) + ": non-finite value");
      }
      values.push_back(*v);
    }
    ++data_rows;
  }
  if (data_rows == 0) throw DataError(path.string() + ": empty recording");

  RawRecording rec;
  rec.info = info;
  rec.samples.resize(static_cast<Eigen::Index>(data_rows), kNumAxes);
  for (std::size_t r = 0; r < data_rows; ++r) {
    for (int c = 0; c < kNumAxes; ++c) rec.samples(r, c) = values[r * kNumAxes + c];
  }
  validate(rec);
  return rec;
}

RawRecording load_recording(const Manifest& manifest, const ManifestEntry& entry) {
  return load_recording(manifest.resolve(entry), entry.info);
}

void save_recording(const RawRecording& rec, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write recording " + path.string());
  std::string text = "ax,ay,az,gx,gy,gz\n";
  for (Eigen::Index r = 0; r < rec.samples.rows(); ++r) {
    for (Eigen::Index c = 0; c < rec.samples.cols(); ++c) {
      if (c) text += ',';
      text += format_double(rec.samples(r, c));
    }
    text += '\n';
  }
  out << text;
  if (!out) throw DataError("failed writing recording " + path.string());
}

}  // namespace imair
