#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace dpart {

// splitmix64 step, used both for seed derivation and stream splitting.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Random source for every stochastic step in the library. All distributions
// are derived from raw uniform bits rather than <random> distribution
// objects, so a seeded stream produces identical values on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static Rng from_entropy() {
    std::random_device rd;
    std::uint64_t hi = rd();
    std::uint64_t lo = rd();
    return Rng((hi << 32) ^ lo);
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0, 1); safe to feed into log().
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on [a, b).
  double uniform(double a, double b) {
    double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    double v = a + u * (b - a);
    return v < b ? v : a;
  }

  // Uniform integer in [0, n), rejection sampled (no modulo bias).
  std::size_t uniform_index(std::size_t n) {
    if (n <= 1) return 0;
    std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= bound);
    return static_cast<std::size_t>(v % n);
  }

  // Standard normal via Box-Muller.
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Centered Laplace with the given scale, via inverse CDF.
  double laplace(double scale) {
    double t = uniform01() - 0.5;
    double sign = t < 0.0 ? -1.0 : 1.0;
    return -scale * sign * std::log(1.0 - 2.0 * std::fabs(t));
  }

  // Gamma with integer shape (sum of exponentials).
  double gamma_int(int shape, double scale) {
    double acc = 0.0;
    for (int i = 0; i < shape; ++i) acc -= std::log(uniform01());
    return scale * acc;
  }

  // Uniformly random direction on the unit sphere in R^dim.
  std::vector<double> unit_vector(int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& x : v) {
        x = gaussian();
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace dpart
