#pragma once

#include <cstdint>
#include <vector>

namespace deepiv {

// Counter-based splittable random stream. Draw k of stream (seed, id) is a
// pure function of (seed, id, k), so replication r of a Monte Carlo run can
// own stream_id = r and produce the same values no matter which thread
// executes it or in what order.
class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double uniform01();
    double uniform(double lo, double hi);

    // Standard normal via inverse-CDF; one draw consumes one counter step.
    double normal();

    // Uniform integer on [0, n), unbiased (rejection sampling).
    std::uint64_t below(std::uint64_t n);

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

    // Child stream derived deterministically from (seed, stream_id, tag);
    // independent of how many draws this stream has produced.
    RngStream substream(std::uint64_t tag) const;

  private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_;
};

// Deterministic scalar seed for a named sub-task of a seeded computation,
// for components that take a seed rather than a stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace deepiv
