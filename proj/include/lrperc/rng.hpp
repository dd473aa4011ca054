#pragma once

#include <array>
#include <cstdint>

namespace lrperc {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// A pure function of (counter, key); no hidden state.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// SplitMix64 finalizer, used to derive stream indices from structured ids.
std::uint64_t mix64(std::uint64_t x);

// Stream index derived from a parent index and a tag; distinct (parent, tag)
// pairs map to distinct streams with overwhelming probability.
std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t tag);

// Map 64 random bits to a double in [0, 1).
inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Value of the (seed, stream) sequence at position `counter`.
std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t counter);

inline double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter) {
  return to_unit(counter_bits(seed, stream, counter));
}

// Counter-based stream: the value at (master seed, stream index, counter) is
// fixed forever, so any draw can be replayed without generating its
// predecessors.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t index, std::uint64_t counter = 0)
      : seed_(seed), index_(index), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t index() const { return index_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() { return counter_bits(seed_, index_, counter_++); }
  double next_uniform() { return to_unit(next_u64()); }
  // Uniform on (0, 1]; safe as a log argument.
  double next_open_uniform() { return 1.0 - next_uniform(); }
  // Uniform integer in [0, bound).
  std::uint64_t next_below(std::uint64_t bound);

  RngStream substream(std::uint64_t tag) const {
    return RngStream(seed_, derive_stream(index_, tag));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t index_;
  std::uint64_t counter_;
};

}  // namespace lrperc
