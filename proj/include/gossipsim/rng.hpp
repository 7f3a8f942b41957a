/**
 * Copyright The gossipsim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace gossipsim {

  /// splitmix64 step; used to derive independent per-node streams from the
  /// scenario seed.
  constexpr std::uint64_t derive_seed(std::uint64_t base,
                                      std::uint64_t stream) {
    std::uint64_t x = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  /// mt19937_64 with distributions written out by hand. The standard
  /// distribution objects are implementation-defined, which would make runs
  /// differ between standard libraries.
  class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() {
      return engine_();
    }

    /// Uniform in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
      const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
      std::uint64_t x;
      do {
        x = engine_();
      } while (x >= limit);
      return x % n;
    }

    /// Uniform in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
      return lo
           + static_cast<std::int64_t>(
                 below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Uniform in [0, 1).
    double uniform01() {
      return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
      double u1;
      do {
        u1 = uniform01();
      } while (u1 <= 0.0);
      const double u2 = uniform01();
      return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    template <class T>
    void shuffle(std::vector<T> &v) {
      for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[below(i)]);
      }
    }

    /// k elements drawn uniformly without replacement (partial Fisher-Yates);
    /// returns the whole pool, shuffled, when k >= pool.size().
    template <class T>
    std::vector<T> sample(std::vector<T> pool, std::size_t k) {
      const std::size_t n = pool.size();
      if (k > n) {
        k = n;
      }
      for (std::size_t i = 0; i < k; ++i) {
        std::swap(pool[i], pool[i + below(n - i)]);
      }
      pool.resize(k);
      return pool;
    }

   private:
    std::mt19937_64 engine_;
  };

}  // namespace gossipsim
