#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every random
// number is a pure function of (key, counter), so a draw keyed by
// (seed, replicate, time, urn) is the same no matter which thread makes it
// or in what order.

#include <array>
#include <cstdint>
#include <limits>

namespace ipcn {

struct Philox4x32 {
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0 = 0xD2511F53;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
    static constexpr int kRounds = 10;

    static constexpr counter_type generate(counter_type ctr, key_type key) noexcept {
        for (int r = 0; r < kRounds; ++r) {
            if (r > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

/// 53-bit uniform in [0,1) from the top bits of a 64-bit word.
constexpr double to_unit_double(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr Philox4x32::key_type seed_key(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Random stream for one simulation replicate: uniform(time, urn) is
/// deterministic in (seed, replicate, time, urn).
class ReplicateStream {
public:
    constexpr ReplicateStream(std::uint64_t seed, std::uint64_t replicate) noexcept
        : key_(seed_key(seed)), replicate_(replicate) {}

    constexpr double uniform(std::uint64_t time, std::uint32_t urn) const noexcept {
        const Philox4x32::counter_type ctr{static_cast<std::uint32_t>(time),
                                           static_cast<std::uint32_t>(time >> 32), urn,
                                           static_cast<std::uint32_t>(replicate_)};
        const auto out = Philox4x32::generate(ctr, key_);
        return to_unit_double((std::uint64_t{out[0]} << 32) | out[1]);
    }

    constexpr std::uint64_t replicate() const noexcept { return replicate_; }

private:
    Philox4x32::key_type key_;
    std::uint64_t replicate_;
};

/// Sequential engine over a Philox counter. Satisfies UniformRandomBitGenerator;
/// used where a plain stream of draws is enough (graph generation, parameter
/// sampling). The helpers below avoid std distributions, whose output is
/// implementation-defined.
class PhiloxEngine {
public:
    using result_type = std::uint64_t;

    explicit constexpr PhiloxEngine(std::uint64_t seed, std::uint32_t stream = 0) noexcept
        : key_(seed_key(seed)), stream_(stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        if (have_ == 0) refill();
        --have_;
        const auto hi = block_[2 * have_];
        const auto lo = block_[2 * have_ + 1];
        return (std::uint64_t{hi} << 32) | lo;
    }

    constexpr double uniform() noexcept { return to_unit_double((*this)()); }

    /// Integer uniform on [lo, hi] by rejection, exact for any range.
    constexpr std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>((*this)());
        const std::uint64_t limit = max() - max() % span;
        std::uint64_t x = (*this)();
        while (x >= limit) x = (*this)();
        return lo + static_cast<std::int64_t>(x % span);
    }

private:
    constexpr void refill() noexcept {
        block_ = Philox4x32::generate({static_cast<std::uint32_t>(counter_),
                                       static_cast<std::uint32_t>(counter_ >> 32), stream_, 0},
                                      key_);
        ++counter_;
        have_ = 2;
    }

    Philox4x32::key_type key_;
    std::uint32_t stream_;
    std::uint64_t counter_ = 0;
    Philox4x32::counter_type block_{};
    int have_ = 0;
};

}  // namespace ipcn
