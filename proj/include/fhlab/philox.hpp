#pragma once

// Counter-based random number generation (Philox4x64-10, Salmon et al.,
// "Parallel random numbers: as easy as 1, 2, 3", SC'11).
//
// Every deviate is a pure function of (seed, stream, replicate, cell), so
// ensembles are reproducible bit-for-bit under any work scheduling: worker
// threads never share generator state.

#include <cmath>
#include <cstdint>

namespace fhlab::rng {

struct Block {
  std::uint64_t w[4];
};

namespace detail {

inline constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
inline constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
inline constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
inline constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

}  // namespace detail

inline Block philox4x64(Block ctr, std::uint64_t k0, std::uint64_t k1) {
  using u128 = unsigned __int128;
  for (int round = 0; round < 10; ++round) {
    const u128 p0 = u128(detail::kMul0) * ctr.w[0];
    const u128 p1 = u128(detail::kMul1) * ctr.w[2];
    const Block next = {{std::uint64_t(p1 >> 64) ^ ctr.w[1] ^ k0,
                         std::uint64_t(p1),
                         std::uint64_t(p0 >> 64) ^ ctr.w[3] ^ k1,
                         std::uint64_t(p0)}};
    ctr = next;
    k0 += detail::kWeyl0;
    k1 += detail::kWeyl1;
  }
  return ctr;
}

// Distinct logical streams; baked into the key so different uses of the same
// (seed, replicate, cell) triple never collide.
enum class Stream : std::uint64_t {
  bm_increments = 1,
  stwn_increments = 2,
  pair_sampling = 3,
  rough_data = 4,
  fbm_path = 5,
  generic = 6,
};

inline double to_unit_interval(std::uint64_t bits) {
  // 52 significant bits, offset by half a step: result lies strictly in
  // (0,1).  (With 53 bits the top value would round up to exactly 1.0, since
  // the +0.5 offset is not representable beyond 2^52.)
  return (double(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Two independent U(0,1) draws for one (seed, stream, replicate, cell) tuple.
inline void uniform_pair(std::uint64_t seed, Stream stream,
                         std::uint64_t replicate, std::uint64_t cell,
                         double& u1, double& u2) {
  const Block out =
      philox4x64({{cell, replicate, 0, 0}}, seed, static_cast<std::uint64_t>(stream));
  u1 = to_unit_interval(out.w[0]);
  u2 = to_unit_interval(out.w[1]);
}

// One standard normal deviate (Box-Muller, cosine branch).
inline double normal(std::uint64_t seed, Stream stream, std::uint64_t replicate,
                     std::uint64_t cell) {
  double u1, u2;
  uniform_pair(seed, stream, replicate, cell, u1, u2);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline double uniform(std::uint64_t seed, Stream stream, std::uint64_t replicate,
                      std::uint64_t cell) {
  double u1, u2;
  uniform_pair(seed, stream, replicate, cell, u1, u2);
  return u1;
}

}  // namespace fhlab::rng
