#pragma once

#include <cstdint>

namespace probesched {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Counter-based stream keyed by up to three coordinates (e.g. seed, slot,
// user). Streams with distinct keys are independent regardless of how many
// draws each consumes, so paired policies see identical channels.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t key) : state_(key) {}

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a = 0,
                                    std::uint64_t b = 0, std::uint64_t c = 0) noexcept {
        std::uint64_t h = mix64(seed + kGolden);
        h = mix64(h ^ (a + kGolden + (h << 6) + (h >> 2)));
        h = mix64(h ^ (b + kGolden + (h << 6) + (h >> 2)));
        h = mix64(h ^ (c + kGolden + (h << 6) + (h >> 2)));
        return h;
    }

    static RandomStream keyed(std::uint64_t seed, std::uint64_t a = 0,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
        return RandomStream(derive_key(seed, a, b, c));
    }

    std::uint64_t next_u64() noexcept {
        state_ += kGolden;
        return mix64(state_);
    }

    // uniform draw in [0, 1)
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_;
};

}  // namespace probesched
