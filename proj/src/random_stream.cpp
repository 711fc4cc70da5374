#include "crdsa/random_stream.hpp"

namespace crdsa {

namespace {

std::uint64_t engine_seed(std::uint64_t seed, std::uint64_t stream_id)
{
    return mix64(mix64(seed) ^ (stream_id * 0xd1342543de82ef95ULL + 1));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(engine_seed(seed, stream_id))
{
}

std::uint64_t RandomStream::derived_seed() const noexcept
{
    return mix64(engine_seed(seed_, stream_id_) ^ 0x5851f42d4c957f2dULL);
}

std::uint32_t RandomStream::below(std::uint32_t bound)
{
    std::uniform_int_distribution<std::uint32_t> dist(0, bound - 1);
    return dist(engine_);
}

double RandomStream::uniform()
{
    return std::generate_canonical<double, 64>(engine_);
}

bool RandomStream::bernoulli(double p)
{
    if (p <= 0.0)
        return false;
    if (p >= 1.0)
        return true;
    return uniform() < p;
}

std::uint64_t RandomStream::binomial(std::uint64_t trials, double p)
{
    if (trials == 0 || p <= 0.0)
        return 0;
    if (p >= 1.0)
        return trials;
    std::binomial_distribution<std::uint64_t> dist(trials, p);
    return dist(engine_);
}

std::uint64_t RandomStream::poisson(double mean)
{
    if (mean <= 0.0)
        return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(engine_);
}

}  // namespace crdsa
