#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace shapinf {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

__extension__ using uint128 = unsigned __int128;

}  // namespace detail

/// Names one independent random stream inside a run.
///
/// A run is driven by a single master seed; every sampling task derives its
/// own key by labeled or indexed splitting, so the stream a task sees depends
/// only on its position in the derivation tree and never on which worker
/// thread executes it or in which order.
class StreamKey {
 public:
  constexpr explicit StreamKey(std::uint64_t master_seed) noexcept
      : master_(master_seed), path_(detail::splitmix64(master_seed)) {}

  [[nodiscard]] constexpr StreamKey child(std::uint64_t index) const noexcept {
    StreamKey k = *this;
    k.path_ = detail::splitmix64(path_ ^ detail::splitmix64(index + 0x632be59bd9b4e019ULL));
    return k;
  }

  [[nodiscard]] constexpr StreamKey child(std::string_view label) const noexcept {
    return child(detail::fnv1a(label));
  }

  [[nodiscard]] constexpr std::uint64_t master_seed() const noexcept { return master_; }

  [[nodiscard]] Rng make_rng() const {
    std::seed_seq seq{static_cast<std::uint32_t>(master_), static_cast<std::uint32_t>(master_ >> 32),
                      static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)};
    return Rng(seq);
  }

  friend constexpr bool operator==(const StreamKey&, const StreamKey&) = default;

 private:
  std::uint64_t master_;
  std::uint64_t path_;
};

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Bernoulli(p) draw; consumes exactly one engine output, p >= 1 always succeeds.
inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Unbiased integer in [0, bound) (Lemire's multiply-shift with rejection).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  detail::uint128 m = static_cast<detail::uint128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<detail::uint128>(rng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Fisher-Yates shuffle driven by uniform_index, so the result is identical
/// across standard library implementations.
template <class RandomIt>
void shuffle(RandomIt first, RandomIt last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1), first + static_cast<std::ptrdiff_t>(j));
  }
}

}  // namespace shapinf
