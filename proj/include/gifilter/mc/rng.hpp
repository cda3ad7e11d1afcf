// SPDX-License-Identifier: Apache-2.0
// Counter-based generator (Philox4x32-10). A stream is identified by
// (seed, stream id); draw k of a stream is a pure function of those and k, so
// paths can be simulated in any order on any thread.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "gifilter/core/types.hpp"

namespace gifilter {

using Philox4 = std::array<std::uint32_t, 4>;

inline Philox4 philox4x32_10(Philox4 ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

/// Sequential view of one counter stream: standard normals by Box-Muller,
/// two per Philox block.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t domain = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        domain_(domain) {}

  /// Uniform in (0, 1) from 53 random bits.
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const Philox4 b = next_block();
    const double u1 = to_unit(b[0], b[1]);
    const double u2 = to_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform in (0, 1); consumes a whole block and drops any spare normal.
  double uniform() {
    have_spare_ = false;
    const Philox4 b = next_block();
    return to_unit(b[0], b[1]);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Vec normal_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  Eigen::VectorXd normal_dyn(long n) {
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  std::uint64_t blocks_used() const { return counter_; }

 private:
  Philox4 next_block() {
    const Philox4 b = philox4x32_10(
        {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32) ^ (domain_ << 24)},
        key_);
    ++counter_;
    return b;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint32_t domain_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gifilter
