#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace imair {

/// Seeded generator whose output is identical on every platform.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard library distributions are implementation-defined,
/// so every derived quantity (uniform reals, bounded integers, normals,
/// shuffles) is computed here from raw 64-bit draws:
///   - uniform01: top 53 bits scaled by 2^-53, range [0, 1)
///   - below(n): rejection sampling on the largest multiple of n
///   - normal: Box-Muller, one value per pair of uniforms
///   - shuffle: Fisher-Yates from the back
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t below(std::uint64_t n);
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// FNV-1a 64-bit hash, for deriving seeds from identifiers such as subject ids.
std::uint64_t hash_string(std::string_view text);

}  // namespace imair
