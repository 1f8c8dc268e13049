#pragma once

#include <cstdint>
#include <span>

namespace seqcast {

/// Portable seeded generator: xoshiro256** (Blackman & Vigna, 2018) whose
/// 256-bit state is expanded from a 64-bit seed with SplitMix64. Every draw
/// is defined in terms of 64-bit integer arithmetic, so sequences are
/// identical across compilers and platforms. The standard library
/// distributions are not used anywhere because their outputs are
/// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    /// Independent stream for a (seed, stream id) pair. Stream ids used by the
    /// library: 0 parameter init, 1 dropout masks, 2 epoch shuffling.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t next() noexcept;

    /// Uniform on [0, 1) with 53 random bits: (next() >> 11) * 2^-53.
    double uniform01() noexcept;
    /// Uniform on [lo, hi): lo + (hi - lo) * uniform01().
    double uniform(double lo, double hi) noexcept;
    /// Uniform integer on [0, bound), bound > 0. Lemire's multiply-shift
    /// with rejection, so the result is unbiased.
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Fisher-Yates, iterating from the last element down.
    template <typename T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

} // namespace seqcast
