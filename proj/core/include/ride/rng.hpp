#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace ride {

/// xoshiro256** seeded through splitmix64. Every random draw in the project
/// goes through this engine so that streams are identical on every platform;
/// the uniform/normal transforms below are fixed as well (no std:: distributions).
class SeededRng {
 public:
  using result_type = std::uint64_t;
  static constexpr std::string_view kAlgorithm = "xoshiro256**";

  explicit SeededRng(std::uint64_t seed = 0);

  std::uint64_t next_u64();
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Unbiased integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
  std::optional<double> spare_normal_;
};

/// n i.i.d. N(0,1) draws. n == 0 is rejected.
std::vector<double> rng_gaussian(SeededRng& rng, std::size_t n);

/// Fixed derivation of a named sub-stream seed from a root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

/// Fisher-Yates shuffle driven by SeededRng::below (std::shuffle is not portable).
template <typename T>
void shuffle(std::vector<T>& items, SeededRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace ride
