#pragma once

#include <cstdint>
#include <limits>

namespace lcurve {

/// Counter-based 64-bit generator keyed by (base_seed, stream_id).
///
/// Draw n of a stream is a pure function of (base_seed, stream_id, n), so a
/// stream reproduces exactly regardless of which thread consumes it or what
/// other streams have done. Satisfies UniformRandomBitGenerator and works
/// with the boost::random distributions, whose algorithms are fixed across
/// platforms (unlike the <random> distributions).
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t base_seed, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() noexcept;

  std::uint64_t base_seed() const noexcept { return base_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  /// Number of 64-bit words drawn so far.
  std::uint64_t position() const noexcept { return counter_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t base_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key0_;
  std::uint64_t key1_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer; a bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derive a child seed from a parent seed and a tag (e.g. iteration index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

}  // namespace lcurve
