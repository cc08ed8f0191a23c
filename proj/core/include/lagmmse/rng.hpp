#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lagmmse {

// Philox4x32-10 counter-based generator. A stream is keyed by
// (seed, stream_id); draws depend only on the key and a running counter,
// so Monte Carlo paths reproduce bit-identically regardless of how work
// is scheduled across threads.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(stream_id)),
        ctr3_(static_cast<std::uint32_t>(stream_id >> 32)) {}

  std::uint64_t next_u64() noexcept {
    if (have_half_) {
      have_half_ = false;
      return spare_;
    }
    std::uint32_t c0 = static_cast<std::uint32_t>(block_);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
    ++block_;
    std::uint32_t c2 = ctr2_, c3 = ctr3_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = kMul0 * static_cast<std::uint64_t>(c0);
      const std::uint64_t p1 = kMul1 * static_cast<std::uint64_t>(c2);
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    spare_ = (static_cast<std::uint64_t>(c2) << 32) | c3;
    have_half_ = true;
    return (static_cast<std::uint64_t>(c0) << 32) | c1;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (explicit, so results do not depend on
  // the standard library's unspecified normal_distribution algorithm).
  double next_gaussian() noexcept {
    if (have_gauss_) {
      have_gauss_ = false;
      return gauss_spare_;
    }
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    gauss_spare_ = r * std::sin(theta);
    have_gauss_ = true;
    return r * std::cos(theta);
  }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2511F53ull;
  static constexpr std::uint64_t kMul1 = 0xCD9E8D57ull;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::uint32_t key0_, key1_;
  std::uint32_t ctr2_, ctr3_;
  std::uint64_t block_ = 0;
  std::uint64_t spare_ = 0;
  bool have_half_ = false;
  double gauss_spare_ = 0.0;
  bool have_gauss_ = false;
};

}  // namespace lagmmse
