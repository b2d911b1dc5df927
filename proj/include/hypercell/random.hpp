#pragma once

#include <cstdint>
#include <random>

namespace hypercell {

/// SplitMix64 finalizer; used to derive well-separated engine seeds.
std::uint64_t mix64(std::uint64_t x);

/// Random stream identified by (seed, stream_id).
///
/// The engine state is a pure function of the pair, so the same identifiers
/// reproduce the same draws no matter which worker consumes them.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Independent child stream for slot `slot` of this stream.
  RandomStream substream(std::uint64_t slot) const;

  double uniform();       // [0, 1)
  double uniform_open();  // (0, 1)
  double normal();
  double exponential(double rate);
  std::uint64_t poisson(double mean);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace hypercell
