#pragma once

// Counter-based coins: every draw is a pure function of (seed, agent, purpose),
// so one agent's report never shifts another agent's coins.

#include "dsm/market.hpp"

#include <cstdint>

namespace dsm {

enum class DrawPurpose : std::uint8_t { LowPriority = 1, Half = 2 };

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t coin_word(std::uint64_t seed, AgentId agent, DrawPurpose purpose) {
  std::uint64_t x = splitmix64(seed);
  x = splitmix64(x ^ ((static_cast<std::uint64_t>(agent.kind) << 32) | agent.ordinal));
  x = splitmix64(x ^ static_cast<std::uint64_t>(purpose));
  return x;
}

/// Exact test word / 2^64 < p for a fixed rational p.
class Bernoulli {
 public:
  explicit Bernoulli(const Rational& p) {
    if (sgn(p) <= 0) {
      never_ = true;
    } else if (cmp(p, 1) >= 0) {
      always_ = true;
    } else {
      // word < p * 2^64  <=>  word < ceil(p * 2^64) for integer word.
      mpz_class scaled = p.get_num();
      scaled <<= 64;
      mpz_class t;
      mpz_cdiv_q(t.get_mpz_t(), scaled.get_mpz_t(), p.get_den_mpz_t());
      if (mpz_sizeinbase(t.get_mpz_t(), 2) > 64) {
        always_ = true;
      } else {
        std::size_t count = 0;
        mpz_export(&threshold_, &count, -1, sizeof(threshold_), 0, 0, t.get_mpz_t());
      }
    }
  }

  bool operator()(std::uint64_t word) const {
    if (always_) return true;
    if (never_) return false;
    return word < threshold_;
  }

 private:
  std::uint64_t threshold_ = 0;
  bool always_ = false;
  bool never_ = false;
};

}  // namespace dsm
