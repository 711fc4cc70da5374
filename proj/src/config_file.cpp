#include "crdsa/config_file.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "crdsa/format.hpp"

namespace crdsa {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ConfigParseError("key '" + key + "': cannot parse '" + text + "' as a number");
    return value;
}

}  // namespace

DegreeDistribution parse_degrees(const std::string& text)
{
    DegreeDistribution dist;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ConfigParseError("key 'degrees': empty entry in '" + text + "'");
        const auto colon = item.find(':');
        DegreeDistribution::Entry entry;
        if (colon == std::string::npos) {
            entry.degree = parse_number<unsigned>("degrees", item);
        } else {
            entry.degree = parse_number<unsigned>("degrees", trim(item.substr(0, colon)));
            entry.probability = parse_number<double>("degrees", trim(item.substr(colon + 1)));
        }
        dist.entries.push_back(entry);
    }
    if (dist.entries.empty())
        throw ConfigParseError("key 'degrees': no entries");
    return dist;
}

ScenarioFile parse_scenario(std::istream& in)
{
    std::map<std::string, std::string> values;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigParseError("line " + std::to_string(line_no) + ": empty key or value");
        if (!values.emplace(key, value).second)
            throw ConfigParseError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }

    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = values.find(key);
        if (it == values.end())
            return std::nullopt;
        auto value = it->second;
        values.erase(it);
        return value;
    };
    auto require = [&](const std::string& key) {
        auto value = take(key);
        if (!value)
            throw ConfigParseError("missing required key '" + key + "'");
        return *value;
    };

    ScenarioFile out;
    auto& channel = out.channel;
    channel.n_slots = parse_number<unsigned>("n_slots", require("n_slots"));
    if (auto v = take("i_max"))
        channel.i_max = parse_number<unsigned>("i_max", *v);
    channel.degrees = parse_degrees(require("degrees"));
    if (auto v = take("p_r"))
        channel.p_r = parse_number<double>("p_r", *v);

    const auto population = require("population");
    if (population == "finite") {
        FinitePopulation finite;
        finite.users = parse_number<unsigned>("M", require("M"));
        finite.p0 = parse_number<double>("p0", require("p0"));
        channel.population = finite;
    } else if (population == "infinite") {
        channel.population = InfinitePopulation{parse_number<double>("lambda", require("lambda"))};
    } else {
        throw ConfigParseError("key 'population': expected 'finite' or 'infinite', got '" + population + "'");
    }

    const auto policy = take("policy").value_or("none");
    if (policy == "none") {
        out.policy = NoPolicy{};
    } else if (policy == "icp") {
        out.policy = InputControl{parse_number<unsigned>("n_hat", require("n_hat"))};
    } else if (policy == "rcp") {
        RetransmissionControl rcp;
        rcp.threshold = parse_number<unsigned>("n_hat", require("n_hat"));
        rcp.p_c = parse_number<double>("p_c", require("p_c"));
        out.policy = rcp;
    } else {
        throw ConfigParseError("key 'policy': expected none, icp or rcp, got '" + policy + "'");
    }
    // Thresholds are also accepted (and ignored) alongside policy = none so a
    // scenario can be toggled by editing one line.
    take("n_hat");
    take("p_c");

    if (auto v = take("frames"))
        out.frames = parse_number<std::uint64_t>("frames", *v);
    if (auto v = take("seed"))
        out.seed = parse_number<std::uint64_t>("seed", *v);

    // Population keys that do not apply to the chosen variant are harmless.
    take("M");
    take("p0");
    take("lambda");

    if (!values.empty())
        throw ConfigParseError("unknown key '" + values.begin()->first + "'");
    return out;
}

ScenarioFile load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigParseError("cannot open config file '" + path.string() + "'");
    return parse_scenario(in);
}

std::string format_scenario(const ScenarioFile& scenario)
{
    const auto& c = scenario.channel;
    std::ostringstream out;
    out << "n_slots = " << c.n_slots << '\n'
        << "i_max = " << c.i_max << '\n'
        << "degrees = " << c.degrees.to_string() << '\n'
        << "p_r = " << format_real(c.p_r) << '\n';
    if (const auto* finite = std::get_if<FinitePopulation>(&c.population))
        out << "population = finite\nM = " << finite->users << "\np0 = " << format_real(finite->p0) << '\n';
    else
        out << "population = infinite\nlambda = "
            << format_real(std::get<InfinitePopulation>(c.population).lambda) << '\n';
    out << "policy = " << policy_name(scenario.policy) << '\n';
    if (auto threshold = policy_threshold(scenario.policy))
        out << "n_hat = " << *threshold << '\n';
    if (const auto* rcp = std::get_if<RetransmissionControl>(&scenario.policy))
        out << "p_c = " << format_real(rcp->p_c) << '\n';
    if (scenario.frames)
        out << "frames = " << *scenario.frames << '\n';
    if (scenario.seed)
        out << "seed = " << *scenario.seed << '\n';
    return out.str();
}

}  // namespace crdsa
