#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace augbench {

namespace detail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Counter-based splittable random stream.
///
/// Output i of a stream with key k is mix64(k + (i + 1) * golden), i.e. the
/// SplitMix64 sequence started at k. derive(label) produces a child keyed by
/// mix64(k ^ mix64(fnv1a64(label))) with a fresh counter, so a child depends
/// only on the parent's key and the label, never on how many values the parent
/// has already produced. Uniform doubles take the top 53 bits; normals use the
/// cosine branch of Box-Muller (two uniforms per normal, no cached spare).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(detail::mix64(seed ^ detail::kGolden)) {}

  RngStream derive(std::string_view label) const {
    RngStream child(*this);
    child.key_ = detail::mix64(key_ ^ detail::mix64(detail::fnv1a64(label)));
    child.counter_ = 0;
    child.path_.emplace_back(label);
    return child;
  }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  // [0, 1)
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n) by rejection; n must be positive.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }
  const std::vector<std::string>& path() const noexcept { return path_; }

  std::string path_string() const {
    std::string out;
    for (const auto& p : path_) {
      if (!out.empty()) out += '/';
      out += p;
    }
    return out;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::vector<std::string> path_;
};

}  // namespace augbench
