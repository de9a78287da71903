#pragma once

#include <cstdint>

namespace relvar {

inline constexpr std::uint64_t kWeylStep = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer; bijective on 64-bit words
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

// Counter-based generator: the state walks a Weyl sequence and the output is
// the splitmix64 finalizer of the counter.  Distinct (seed, stream_id) pairs
// are hashed to distinct start counters, so replicate streams can be handed
// out deterministically under any parallel schedule and never depend on
// draw order across streams.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : state_(mix64(mix64(seed) ^ mix64(stream_id * kWeylStep + 0x5851f42d4c957f2dull))) {}

  std::uint64_t next_u64() {
    state_ += kWeylStep;
    return mix64(state_);
  }

  // uniform on [0,1), 53 random bits
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1)
  double next_unit_pos() {
    double u;
    do {
      u = next_unit();
    } while (u == 0.0);
    return u;
  }

  double next_normal();     // standard normal, 128-layer ziggurat
  double next_normal_bm();  // Box-Muller; slower, kept as an independent oracle

  std::uint64_t state() const { return state_; }

 private:
  double normal_tail(bool negative);

  std::uint64_t state_;
};

// Stream-id scheme for path simulation: each replicate owns a small block of
// channels (0 = driving noise, 1 = volatility noise).
inline RngStream path_stream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t channel = 0) {
  return RngStream(seed, replicate * 8 + channel);
}

}  // namespace relvar
