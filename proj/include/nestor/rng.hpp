#pragma once

#include <cstdint>

namespace nestor {

// Seedable, splittable pseudorandom stream (splitmix64 core).
//
// Every replication derives its own independent stream from
// (seed, replication index), so schedules and estimates are reproducible
// regardless of how replications are distributed across workers.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal, Box-Muller with the spare value cached.
  double normal();

  // Deterministic child stream; consumes one draw from this stream.
  RngStream split() { return RngStream(next_u64()); }

  static RngStream for_replication(std::uint64_t seed, std::uint64_t rep);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace nestor
