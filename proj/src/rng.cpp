#include "lcurve/rng.hpp"

namespace lcurve {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(mix64(seed + kGolden) ^ (tag * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

RngStream::RngStream(std::uint64_t base_seed, std::uint64_t stream_id) noexcept
    : base_seed_(base_seed),
      stream_id_(stream_id),
      key0_(mix64(base_seed ^ 0x6A09E667F3BCC909ULL)),
      key1_(mix64(mix64(stream_id + kGolden) ^ key0_)) {}

RngStream::result_type RngStream::operator()() noexcept {
  const std::uint64_t n = ++counter_;
  return mix64(mix64(n * kGolden + key0_) ^ key1_);
}

double RngStream::uniform01() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

}  // namespace lcurve
