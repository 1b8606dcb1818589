#pragma once

#include <array>
#include <cstdint>

namespace mdalab {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// Output is a pure function of (counter, key).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            std::uint64_t p0 = std::uint64_t(kM0) * ctr[0];
            std::uint64_t p1 = std::uint64_t(kM1) * ctr[2];
            ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
                   std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

inline constexpr const char* kGeneratorId = "philox4x32-10";

/// 53-bit uniform double in [0, 1).
constexpr double to_unit_double(std::uint64_t bits) { return double(bits >> 11) * 0x1p-53; }

/// Uniform points in [0,1)^n keyed by (seed, sample index). Coordinates
/// 2b and 2b+1 come from counter (index_lo, index_hi, b, 0).
class PointStream {
public:
    explicit constexpr PointStream(std::uint64_t seed) : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)} {}

    template <class Out>
    constexpr void point(std::uint64_t index, Out& out, std::size_t n) const {
        for (std::size_t b = 0; 2 * b < n; ++b) {
            auto w = Philox4x32::generate({std::uint32_t(index), std::uint32_t(index >> 32), std::uint32_t(b), 0}, key_);
            out[2 * b] = to_unit_double((std::uint64_t(w[0]) << 32) | w[1]);
            if (2 * b + 1 < n) out[2 * b + 1] = to_unit_double((std::uint64_t(w[2]) << 32) | w[3]);
        }
    }

private:
    Philox4x32::Key key_;
};

}  // namespace mdalab
