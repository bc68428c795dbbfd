#include "nestor/rng.hpp"

#include <cmath>

namespace nestor {

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

RngStream RngStream::for_replication(std::uint64_t seed, std::uint64_t rep) {
  // One splitmix step keyed by the replication index keeps streams
  // independent even for adjacent seeds.
  RngStream mixer(seed ^ (0x2545f4914f6cdd1dULL * (rep + 1)));
  return RngStream(mixer.next_u64());
}

}  // namespace nestor
