#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace trialmsm {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: the output block is a pure function of (key, counter), so any
/// (seed, replication, patient, draw) coordinate can be evaluated directly
/// without advancing a stream. This is what makes simulation output
/// independent of thread count and scheduling.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Maps two 32-bit words to a double strictly inside (0, 1).
constexpr double open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Uniform draws addressed by (master seed, replication, patient, draw index).
///
/// Draw index i lives in Philox block i/2, half i%2. The purpose tag keeps
/// unrelated consumers (trial simulation, permutation tests, ...) on disjoint
/// counters under the same seed.
class PatientStream {
 public:
  PatientStream(std::uint64_t master_seed, std::uint32_t replication,
                std::uint32_t patient, std::uint32_t purpose = 0) noexcept
      : key_{static_cast<std::uint32_t>(master_seed),
             static_cast<std::uint32_t>(master_seed >> 32)},
        replication_(replication),
        patient_(patient),
        purpose_(purpose) {}

  double uniform(std::uint32_t draw) const noexcept {
    const auto out = Philox4x32::block({draw / 2, patient_, replication_, purpose_}, key_);
    return (draw % 2 == 0) ? open_unit(out[0], out[1]) : open_unit(out[2], out[3]);
  }

  /// Standard exponential variate, -log(U).
  double exponential(std::uint32_t draw) const noexcept { return -std::log(uniform(draw)); }

 private:
  Philox4x32::Key key_;
  std::uint32_t replication_;
  std::uint32_t patient_;
  std::uint32_t purpose_;
};

}  // namespace trialmsm
