#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pcanatomy {

/// Deterministic random source: std::mt19937_64 bit stream with explicit
/// uniform and Box-Muller normal transforms. No system entropy is ever
/// consumed, and the draw order is part of each caller's contract, so a
/// given seed reproduces a byte-identical stream on any platform with IEEE
/// doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe under log().
  double uniform_pos() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; pairs are cached, so draw counts matter
  /// for reproducibility but not correctness.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Unit-exponential, for Dirichlet weights.
  double exponential() { return -std::log(uniform_pos()); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pcanatomy
