#pragma once

#include <filesystem>
#include <vector>

#include "imair/encoders.hpp"

namespace imair {

/// Raw image file layout (all integers and floats little-endian):
///
///   offset 0   8 bytes   magic "IMAIR1\0\0"
///   offset 8   uint32    N (image side)
///   offset 12  uint32    channel count C
///   offset 16  C*N*N     float64, channel-major, then row-major
///
/// Export followed by import reproduces every value bit for bit.
void export_image_raw(const EncodedImage& image, const std::filesystem::path& path);
void export_image_raw(const ImageStack& stack, const std::filesystem::path& path);

/// Returns one N x N matrix per channel.
std::vector<Eigen::MatrixXd> import_image_raw(const std::filesystem::path& path);

/// Path of the text sidecar written next to a PNG ("<png>.txt").
std::filesystem::path png_sidecar_path(const std::filesystem::path& png_path);

/// 8-bit grayscale PNG: pixel = floor((v - min) / (max - min) * 255 + 0.5),
/// or 0 for a constant image. The sidecar holds "min=", "max=" and "method="
/// lines.
void export_image_png(const EncodedImage& image, const std::filesystem::path& path);

/// Inverse of export_image_png up to quantization: v = min + p / 255 * (max - min).
EncodedImage import_image_png(const std::filesystem::path& path);

}  // namespace imair
