#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "crdsa/random_stream.hpp"

namespace crdsa {

/// Probability mass over replica counts. A single entry with probability 1 is
/// constant-replication CRDSA; {(1, 1.0)} is plain Slotted Aloha.
struct DegreeDistribution {
    struct Entry {
        unsigned degree = 1;
        double probability = 1.0;

        bool operator==(const Entry&) const = default;
    };

    std::vector<Entry> entries;

    static DegreeDistribution constant(unsigned degree) { return {{{degree, 1.0}}}; }

    bool is_constant() const noexcept { return entries.size() == 1; }
    unsigned max_degree() const noexcept;
    double mean_degree() const noexcept;

    /// Canonical `l:prob,l:prob` text, also used in config files.
    std::string to_string() const;

    bool operator==(const DegreeDistribution&) const = default;
};

struct FinitePopulation {
    unsigned users = 0;  // M
    double p0 = 0.0;     // per-frame arrival probability of a thinking user

    bool operator==(const FinitePopulation&) const = default;
};

/// Poisson arrivals with `lambda` expected new packets per frame.
struct InfinitePopulation {
    double lambda = 0.0;

    bool operator==(const InfinitePopulation&) const = default;
};

using Population = std::variant<FinitePopulation, InfinitePopulation>;

struct ChannelConfig {
    unsigned n_slots = 100;
    unsigned i_max = 20;
    DegreeDistribution degrees = DegreeDistribution::constant(3);
    Population population = FinitePopulation{};
    double p_r = 1.0;

    bool is_finite() const noexcept { return std::holds_alternative<FinitePopulation>(population); }

    bool operator==(const ChannelConfig&) const = default;
};

struct NoPolicy {
    bool operator==(const NoPolicy&) const = default;
};

/// Input control: new arrivals are denied while backlog exceeds the threshold.
struct InputControl {
    unsigned threshold = 0;

    bool operator==(const InputControl&) const = default;
};

/// Retransmission control: backlogged users transmit with `p_c` instead of
/// p_r while backlog exceeds the threshold.
struct RetransmissionControl {
    unsigned threshold = 0;
    double p_c = 0.5;

    bool operator==(const RetransmissionControl&) const = default;
};

using Policy = std::variant<NoPolicy, InputControl, RetransmissionControl>;

const char* policy_name(const Policy& policy) noexcept;

/// Backlog threshold of a control-limit policy; empty for NoPolicy.
std::optional<unsigned> policy_threshold(const Policy& policy) noexcept;

struct Violation {
    std::string field;
    std::string rule;

    std::string to_string() const { return field + ": " + rule; }
};

std::vector<Violation> validate(const DegreeDistribution& dist);
std::vector<Violation> validate(const ChannelConfig& config);
/// Channel violations plus policy rules that depend on the channel (p_c < p_r).
std::vector<Violation> validate(const ChannelConfig& config, const Policy& policy);

class InvalidConfig : public std::invalid_argument {
public:
    explicit InvalidConfig(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Throws InvalidConfig listing every violation. Entry points call this so no
/// computation ever runs on an invalid configuration.
void require_valid(const ChannelConfig& config);
void require_valid(const ChannelConfig& config, const Policy& policy);

unsigned sample_degree(const DegreeDistribution& dist, RandomStream& rng);

/// Stable text identity of the parameters a PLR curve depends on.
std::string plr_fingerprint(unsigned n_slots, const DegreeDistribution& degrees, unsigned i_max);
std::string plr_fingerprint(const ChannelConfig& config);

/// Full canonical description (channel and policy), and its FNV-1a hash.
std::string describe(const ChannelConfig& config, const Policy& policy);
std::string fingerprint_hash(const std::string& text);

}  // namespace crdsa
