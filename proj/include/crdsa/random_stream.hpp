#pragma once

#include <cstdint>
#include <random>

namespace crdsa {

/// Deterministic source of random draws keyed by (seed, stream_id).
///
/// Two streams built from the same pair yield the same sequence of draws no
/// matter which thread owns them or in what order streams are created. A
/// stream is owned by one worker at a time.
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    RandomStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Seed for streams nested under this one: `RandomStream{derived_seed(), k}`
    /// is the k-th child stream.
    std::uint64_t derived_seed() const noexcept;

    RandomStream child(std::uint64_t index) const { return {derived_seed(), index}; }

    /// Uniform integer in [0, bound).
    std::uint32_t below(std::uint32_t bound);
    /// Uniform real in [0, 1).
    double uniform();
    bool bernoulli(double p);
    std::uint64_t binomial(std::uint64_t trials, double p);
    std::uint64_t poisson(double mean);

    engine_type& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    engine_type engine_;
};

/// SplitMix64 finalizer; used to decorrelate neighbouring seeds and ids.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace crdsa
