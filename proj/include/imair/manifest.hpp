#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "imair/signal.hpp"

namespace imair {

struct ManifestEntry {
  RecordingInfo info;
  std::filesystem::path path;  ///< relative to Manifest::root
};

/// Index of a dataset: one row per recording. The CSV layout is
///   subject_id,label,repetition,sample_rate_hz,path
/// with the header row required and paths relative to the manifest file.
struct Manifest {
  std::string dataset_name;
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;

  /// Sorted, unique subject ids.
  std::vector<std::string> subjects() const;
  std::filesystem::path resolve(const ManifestEntry& entry) const { return root / entry.path; }
};

/// Parses and validates a manifest. Malformed rows, duplicate
/// (subject, label, repetition) triples and missing recording files raise
/// DataError naming the row.
Manifest load_manifest(const std::filesystem::path& path);

void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Reads one recording CSV: six numeric columns ax,ay,az,gx,gy,gz and an
/// optional header row, recognized by a non-numeric first cell.
RawRecording load_recording(const std::filesystem::path& path, const RecordingInfo& info);
RawRecording load_recording(const Manifest& manifest, const ManifestEntry& entry);

/// Writes the header "ax,ay,az,gx,gy,gz" and one row per sample using the
/// shortest round-trip decimal form.
void save_recording(const RawRecording& rec, const std::filesystem::path& path);

}  // namespace imair
