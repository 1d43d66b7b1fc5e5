#include "imair/image_io.hpp"

#include <png.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "text_util.hpp"

namespace imair {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 8> kMagic = {'I', 'M', 'A', 'I', 'R', '1', '\0', '\0'};
constexpr std::size_t kHeaderBytes = 16;

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <typename U>
U get_le(const unsigned char* p) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(p[i]) << (8 * i);
  return value;
}

void write_raw(const std::vector<const Eigen::MatrixXd*>& channels, const fs::path& path) {
  const auto n = static_cast<std::uint32_t>(channels.front()->rows());
  for (const auto* m : channels) {
    if (m->rows() != n || m->cols() != n) throw DataError("raw export needs square, equal-size channels");
  }
  std::string bytes(kMagic.begin(), kMagic.end());
  bytes.reserve(kHeaderBytes + channels.size() * n * n * 8);
  put_le<std::uint32_t>(bytes, n);
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(channels.size()));
  for (const auto* m : channels) {
    for (std::uint32_t r = 0; r < n; ++r) {
      for (std::uint32_t c = 0; c < n; ++c) put_le<std::uint64_t>(bytes, std::bit_cast<std::uint64_t>((*m)(r, c)));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace

void export_image_raw(const EncodedImage& image, const fs::path& path) {
  write_raw({&image.pixels}, path);
}

void export_image_raw(const ImageStack& stack, const fs::path& path) {
  write_raw({&stack.channels[0].pixels, &stack.channels[1].pixels, &stack.channels[2].pixels}, path);
}

std::vector<Eigen::MatrixXd> import_image_raw(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw DataError(path.string() + ": not an IMAIR file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto n = get_le<std::uint32_t>(p + 8);
  const auto channels = get_le<std::uint32_t>(p + 12);
  const std::uint64_t expected = kHeaderBytes + std::uint64_t{channels} * n * n * 8;
  if (bytes.size() != expected) {
    throw DataError(path.string() + ": size " + std::to_string(bytes.size()) +
                    " does not match header (expected " + std::to_string(expected) + ")");
  }
  std::vector<Eigen::MatrixXd> out(channels, Eigen::MatrixXd(n, n));
  const unsigned char* cursor = p + kHeaderBytes;
  for (auto& m : out) {
    for (std::uint32_t r = 0; r < n; ++r) {
      for (std::uint32_t c = 0; c < n; ++c) {
        m(r, c) = std::bit_cast<double>(get_le<std::uint64_t>(cursor));
        cursor += 8;
      }
    }
  }
  return out;
}

fs::path png_sidecar_path(const fs::path& png_path) {
  return fs::path(png_path.string() + ".txt");
}

void export_image_png(const EncodedImage& image, const fs::path& path) {
  const auto& px = image.pixels;
  if (px.size() == 0 || !px.allFinite()) throw DataError("PNG export needs a non-empty finite image");
  const double lo = px.minCoeff();
  const double hi = px.maxCoeff();
  const double range = hi - lo;

  std::vector<png_byte> buffer(static_cast<std::size_t>(px.size()));
  for (Eigen::Index r = 0; r < px.rows(); ++r) {
    for (Eigen::Index c = 0; c < px.cols(); ++c) {
      double level = 0.0;
      if (range > 0.0) level = std::floor((px(r, c) - lo) / range * 255.0 + 0.5);
      buffer[static_cast<std::size_t>(r * px.cols() + c)] =
          static_cast<png_byte>(std::clamp(level, 0.0, 255.0));
    }
  }

  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(px.cols());
  img.height = static_cast<png_uint_32>(px.rows());
  img.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    const std::string message = img.message;
    png_image_free(&img);
    throw DataError("cannot write PNG " + path.string() + ": " + message);
  }

  std::ofstream side(png_sidecar_path(path), std::ios::binary);
  if (!side) throw DataError("cannot write sidecar for " + path.string());
  side << "min=" << detail::format_double(lo) << '\n'
       << "max=" << detail::format_double(hi) << '\n'
       << "method=" << to_string(image.method) << '\n';
  if (!side) throw DataError("failed writing sidecar for " + path.string());
}

EncodedImage import_image_png(const fs::path& path) {
  std::ifstream side(png_sidecar_path(path));
  if (!side) throw DataError("missing sidecar " + png_sidecar_path(path).string());
  std::optional<double> lo, hi;
  std::optional<Method> method;
  std::string line;
  while (std::getline(side, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key(detail::trim(std::string_view(line).substr(0, eq)));
    const std::string_view value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key == "min") lo = detail::parse_double(value);
    else if (key == "max") hi = detail::parse_double(value);
    else if (key == "method") method = parse_method(value);
  }
  if (!lo || !hi || !method) throw DataError("sidecar for " + path.string() + " is incomplete");

  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = img.message;
    png_image_free(&img);
    throw DataError("cannot decode PNG " + path.string() + ": " + message);
  }

  EncodedImage out{Eigen::MatrixXd(img.height, img.width), *method};
  const double range = *hi - *lo;
  for (png_uint_32 r = 0; r < img.height; ++r) {
    for (png_uint_32 c = 0; c < img.width; ++c) {
      out.pixels(r, c) = *lo + static_cast<double>(buffer[r * img.width + c]) / 255.0 * range;
    }
  }
  return out;
}

}  // namespace imair
