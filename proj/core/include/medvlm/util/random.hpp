// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace medvlm::util {

/// Platform-stable random source. std::mt19937_64 is bit-specified by the
/// standard but the std distributions are not, so the conversions live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal (Box-Muller).
  double normal();
  /// Normal(0, stddev) resampled until within +/- 2 stddev.
  double truncated_normal(double stddev);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Counter-based stream keyed by (seed, id): draw k is mix64(key + k * phi).
/// Pure integer arithmetic, so every platform sees the same draws and a key's
/// stream does not depend on what other keys were drawn before it.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view id);
  std::uint64_t next_u64();
  /// Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace medvlm::util
