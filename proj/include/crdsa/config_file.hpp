#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>

#include "crdsa/core.hpp"

namespace crdsa {

/// Contents of a `key = value` scenario file.
///
/// Recognised keys: n_slots, i_max, degrees (`l:prob,...`), population
/// (`finite` | `infinite`), M, p0, lambda, p_r, policy (`none` | `icp` |
/// `rcp`), n_hat, p_c, frames, seed. `#` starts a comment. Unset keys take
/// the defaults of ChannelConfig (i_max 20, p_r 1, no policy).
struct ScenarioFile {
    ChannelConfig channel;
    Policy policy = NoPolicy{};
    std::optional<std::uint64_t> frames;
    std::optional<std::uint64_t> seed;
};

/// Malformed syntax, unknown keys or unparsable values. Semantic rules are
/// left to validate().
class ConfigParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ScenarioFile parse_scenario(std::istream& in);
ScenarioFile load_scenario(const std::filesystem::path& path);

/// Parses `l:prob,l:prob`; a bare `l` means probability 1.
DegreeDistribution parse_degrees(const std::string& text);

/// Writes a file that parse_scenario() reads back to an equal ScenarioFile.
std::string format_scenario(const ScenarioFile& scenario);

}  // namespace crdsa
