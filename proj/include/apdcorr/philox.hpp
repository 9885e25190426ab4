// SPDX-License-Identifier: Apache-2.0
#pragma once

// Philox4x64-10 counter-based generator (Salmon et al., SC'11). Each (key, counter)
// pair maps to four independent 64-bit words, so a simulation can give every trial
// its own stream and stay bitwise reproducible under any thread schedule.

#include <array>
#include <cstdint>
#include <limits>

namespace apdcorr {

class Philox4x64 {
 public:
  using result_type = std::uint64_t;
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static constexpr int kRounds = 10;

  explicit Philox4x64(Key key, Counter counter = {}) : key_(key), counter_(counter) {}

  /// The raw bijection: ten rounds of the Philox S-box under `key`.
  static Counter block(Counter ctr, Key key) {
    for (int r = 0; r < kRounds; ++r) {
      if (r > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = round(ctr, key);
    }
    return ctr;
  }

  result_type operator()() {
    if (used_ == 4) {
      buffer_ = block(counter_, key_);
      increment();
      used_ = 0;
    }
    return buffer_[used_++];
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  const Counter& counter() const noexcept { return counter_; }
  const Key& key() const noexcept { return key_; }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  static void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    __extension__ using u128 = unsigned __int128;
    const u128 p = static_cast<u128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
  }

  static Counter round(const Counter& c, const Key& k) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  void increment() {
    for (auto& word : counter_) {
      if (++word != 0) break;
    }
  }

  Key key_;
  Counter counter_;
  Counter buffer_{};
  int used_ = 4;
};

/// Stream for one trial of a simulation: key (seed, trial), counter starting at zero.
inline Philox4x64 trial_stream(std::uint64_t seed, std::uint64_t trial) {
  return Philox4x64({seed, trial});
}

/// Uniform double in (0, 1], 53 random bits; never returns 0 so -log(u) stays finite.
inline double uniform_open_closed(Philox4x64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace apdcorr
