#pragma once

// Philox4x64-10 counter-based generator (Salmon et al., Random123).
//
// Output is a pure function of (key, counter), so any stream position can be
// computed directly without stepping through earlier draws. Streams for
// independent simulation runs are addressed by putting the run index into
// the counter.

#include <array>
#include <cstdint>
#include <limits>

namespace qsafe {

class Philox4x64 {
public:
    using Counter = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    static constexpr int kRounds = 10;
    static constexpr std::uint64_t kMultiplier0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t kMultiplier1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL; // golden ratio
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL; // sqrt(3) - 1

    /// One block: 4 x 64 random bits.
    [[nodiscard]] static constexpr Counter block(Counter ctr, Key key) noexcept {
        for (int round = 0; round < kRounds; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const auto [hi0, lo0] = mulhilo(kMultiplier0, ctr[0]);
            const auto [hi1, lo1] = mulhilo(kMultiplier1, ctr[2]);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    struct HiLo {
        std::uint64_t hi;
        std::uint64_t lo;
    };

    static constexpr HiLo mulhilo(std::uint64_t a, std::uint64_t b) noexcept {
        __extension__ using Wide = unsigned __int128;
        const Wide product = static_cast<Wide>(a) * b;
        return {static_cast<std::uint64_t>(product >> 64), static_cast<std::uint64_t>(product)};
    }
};

/// A stream of 64-bit values keyed by (seed, stream) and addressed by a
/// block counter. Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) noexcept
        : key_{seed, 0x5145'4146'4553'4146ULL}, ctr_{0, stream, substream, 0} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (used_ == 4) {
            buffer_ = Philox4x64::block(ctr_, key_);
            ++ctr_[0];
            used_ = 0;
        }
        return buffer_[used_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    Philox4x64::Key key_;
    Philox4x64::Counter ctr_;
    Philox4x64::Counter buffer_{};
    int used_ = 4;
};

/// Seed for run `index` of an experiment seeded with `seed`: the first output
/// of the run's own stream, so runs can be computed in any order.
[[nodiscard]] inline std::uint64_t derive_run_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return Philox4x64::block({index, 0x52554E53ULL /* "RUNS" */, 0, 0}, {seed, 0x5350'4C49'5431'3233ULL})[0];
}

} // namespace qsafe
