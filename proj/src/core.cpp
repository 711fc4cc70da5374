#include "crdsa/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crdsa/format.hpp"

namespace crdsa {

unsigned DegreeDistribution::max_degree() const noexcept
{
    unsigned result = 0;
    for (const auto& e : entries)
        result = std::max(result, e.degree);
    return result;
}

double DegreeDistribution::mean_degree() const noexcept
{
    double mean = 0.0;
    for (const auto& e : entries)
        mean += e.degree * e.probability;
    return mean;
}

std::string DegreeDistribution::to_string() const
{
    std::string out;
    for (const auto& e : entries) {
        if (!out.empty())
            out += ',';
        out += std::to_string(e.degree) + ':' + format_real(e.probability);
    }
    return out;
}

const char* policy_name(const Policy& policy) noexcept
{
    switch (policy.index()) {
    case 1:
        return "icp";
    case 2:
        return "rcp";
    default:
        return "none";
    }
}

std::optional<unsigned> policy_threshold(const Policy& policy) noexcept
{
    if (const auto* icp = std::get_if<InputControl>(&policy))
        return icp->threshold;
    if (const auto* rcp = std::get_if<RetransmissionControl>(&policy))
        return rcp->threshold;
    return std::nullopt;
}

std::vector<Violation> validate(const DegreeDistribution& dist)
{
    std::vector<Violation> out;
    if (dist.entries.empty()) {
        out.push_back({"degrees", "distribution has no entries"});
        return out;
    }
    double total = 0.0;
    unsigned previous = 0;
    for (const auto& e : dist.entries) {
        if (e.degree < 1)
            out.push_back({"degrees", "degree must be >= 1"});
        else if (e.degree <= previous)
            out.push_back({"degrees", "degrees must be strictly increasing"});
        previous = std::max(previous, e.degree);
        if (!(e.probability >= 0.0 && e.probability <= 1.0))
            out.push_back({"degrees", "probability of degree " + std::to_string(e.degree) +
                                          " outside [0,1]"});
        total += e.probability;
    }
    if (!(std::abs(total - 1.0) <= 1e-9))
        out.push_back({"degrees", "probabilities sum ≠ 1 (sum = " + format_real(total) + ")"});
    return out;
}

std::vector<Violation> validate(const ChannelConfig& config)
{
    std::vector<Violation> out;
    if (config.n_slots < 1)
        out.push_back({"n_slots", "must be a positive integer"});
    auto degree_issues = validate(config.degrees);
    out.insert(out.end(), degree_issues.begin(), degree_issues.end());
    if (config.degrees.max_degree() > config.n_slots)
        out.push_back({"degrees", "max degree exceeds N_s (" + std::to_string(config.degrees.max_degree()) +
                                      " > " + std::to_string(config.n_slots) + ")"});
    if (!(config.p_r > 0.0 && config.p_r <= 1.0))
        out.push_back({"p_r", "must lie in (0,1]"});

    if (const auto* finite = std::get_if<FinitePopulation>(&config.population)) {
        if (finite->users < 1)
            out.push_back({"M", "must be a positive integer"});
        if (!(finite->p0 >= 0.0 && finite->p0 <= 1.0))
            out.push_back({"p0", "must lie in [0,1]"});
    } else {
        const auto& infinite = std::get<InfinitePopulation>(config.population);
        if (!(infinite.lambda >= 0.0 && std::isfinite(infinite.lambda)))
            out.push_back({"lambda", "must be a finite non-negative real"});
    }
    return out;
}

std::vector<Violation> validate(const ChannelConfig& config, const Policy& policy)
{
    auto out = validate(config);
    if (const auto* rcp = std::get_if<RetransmissionControl>(&policy)) {
        if (!(rcp->p_c > 0.0 && rcp->p_c < 1.0))
            out.push_back({"p_c", "must lie in (0,1)"});
        if (!(rcp->p_c < config.p_r))
            out.push_back({"p_c", "must be smaller than p_r"});
    }
    return out;
}

namespace {

std::string join(const std::vector<Violation>& violations)
{
    std::string text = "invalid configuration";
    for (const auto& v : violations)
        text += "; " + v.to_string();
    return text;
}

}  // namespace

InvalidConfig::InvalidConfig(std::vector<Violation> violations)
    : std::invalid_argument(join(violations)), violations_(std::move(violations))
{
}

void require_valid(const ChannelConfig& config)
{
    if (auto violations = validate(config); !violations.empty())
        throw InvalidConfig(std::move(violations));
}

void require_valid(const ChannelConfig& config, const Policy& policy)
{
    if (auto violations = validate(config, policy); !violations.empty())
        throw InvalidConfig(std::move(violations));
}

unsigned sample_degree(const DegreeDistribution& dist, RandomStream& rng)
{
    if (dist.is_constant())
        return dist.entries.front().degree;
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (const auto& e : dist.entries) {
        cumulative += e.probability;
        if (u < cumulative)
            return e.degree;
    }
    // Rounding in the cumulative sum; fall back to the last degree with mass.
    for (auto it = dist.entries.rbegin(); it != dist.entries.rend(); ++it)
        if (it->probability > 0.0)
            return it->degree;
    return dist.entries.back().degree;
}

std::string plr_fingerprint(unsigned n_slots, const DegreeDistribution& degrees, unsigned i_max)
{
    return "n_slots=" + std::to_string(n_slots) + ";degrees=" + degrees.to_string() +
           ";i_max=" + std::to_string(i_max);
}

std::string plr_fingerprint(const ChannelConfig& config)
{
    return plr_fingerprint(config.n_slots, config.degrees, config.i_max);
}

std::string describe(const ChannelConfig& config, const Policy& policy)
{
    std::string text = plr_fingerprint(config) + ";p_r=" + format_real(config.p_r);
    if (const auto* finite = std::get_if<FinitePopulation>(&config.population))
        text += ";population=finite;M=" + std::to_string(finite->users) + ";p0=" + format_real(finite->p0);
    else
        text += ";population=infinite;lambda=" +
                format_real(std::get<InfinitePopulation>(config.population).lambda);
    text += std::string(";policy=") + policy_name(policy);
    if (auto threshold = policy_threshold(policy))
        text += ";n_hat=" + std::to_string(*threshold);
    if (const auto* rcp = std::get_if<RetransmissionControl>(&policy))
        text += ";p_c=" + format_real(rcp->p_c);
    return text;
}

std::string fingerprint_hash(const std::string& text)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, hash >>= 4)
        out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
    return out;
}

}  // namespace crdsa
