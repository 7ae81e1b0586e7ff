#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scout {

// ISO-639-1 style code ("en", "zh"); benchgen also uses composite labels like "ru/uk".
using Language = std::string;

using NodeId = std::uint32_t;
inline constexpr NodeId kRootNode = 0;

class ScoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A record or store failed one of its structural invariants.
class InvariantViolation : public ScoutError {
 public:
  using ScoutError::ScoutError;
};

class DuplicateDirective : public ScoutError {
 public:
  using ScoutError::ScoutError;
};

class ConfigError : public ScoutError {
 public:
  using ScoutError::ScoutError;
};

class ParseError : public ScoutError {
 public:
  using ScoutError::ScoutError;
};

// FNV-1a, used to derive per-request seeds. Stable across platforms.
constexpr std::uint64_t fnv1a(std::string_view text,
                              std::uint64_t hash = 14695981039346656037ull) {
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t seed, std::string_view context) {
  return splitmix64(seed ^ fnv1a(context));
}

// Small deterministic generator. std::mt19937_64 is portable but the standard
// distributions are not, so bounded draws are done here.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return splitmix64(state_);
  }

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t draw = next();
    while (draw >= limit) draw = next();
    return draw % bound;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double probability) { return uniform() < probability; }

 private:
  std::uint64_t state_;
};

}  // namespace scout
