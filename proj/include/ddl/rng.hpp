#pragma once

#include <cstdint>
#include <limits>

namespace ddl {

/// Counter-based 64-bit generator.
///
/// The i-th output of a stream is a pure function of (key, i):
///
///     out(i) = mix(mix(i + k0) ^ k1)
///
/// where mix is the SplitMix64 finalizer and (k0, k1) are derived from
/// (seed, stream). Streams are split with `split(id)`, which derives a new
/// key from the parent key and `id` only, so a worker that owns stream
/// `split(t)` produces the same numbers no matter which thread runs it or
/// in what order. Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : k0_(mix(seed ^ 0x6a09e667f3bcc909ULL)),
          k1_(mix(k0_ + mix(stream + 0xbb67ae8584caa73bULL))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix(mix(counter_++ + k0_) ^ k1_); }

    /// Child stream; independent of how many numbers the parent has drawn.
    [[nodiscard]] CounterRng split(std::uint64_t id) const noexcept { return CounterRng(k1_, id); }

    void discard(std::uint64_t n) noexcept { counter_ += n; }
    [[nodiscard]] std::uint64_t position() const noexcept { return counter_; }

    /// Uniform double on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t k0_;
    std::uint64_t k1_;
    std::uint64_t counter_ = 0;
};

} // namespace ddl
