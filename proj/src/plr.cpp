#include "crdsa/plr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "crdsa/decoder.hpp"
#include "crdsa/format.hpp"

namespace crdsa {

std::uint64_t packets_for_load(double g_in, unsigned n_slots)
{
    if (!(g_in > 0.0))
        return 0;
    return static_cast<std::uint64_t>(std::llround(g_in * n_slots));
}

PlrSample estimate_plr(double g_in, const ChannelConfig& config, std::uint64_t trials, const RandomStream& rng,
                       Parallelism parallelism)
{
    require_valid(config);
    if (trials == 0)
        throw std::invalid_argument("estimate_plr needs at least one trial");
    if (!(g_in >= 0.0) || !std::isfinite(g_in))
        throw std::invalid_argument("offered load must be a finite non-negative number");

    PlrSample sample;
    sample.g_in = g_in;
    sample.trials = trials;
    sample.n_packets_per_trial = packets_for_load(g_in, config.n_slots);
    if (sample.n_packets_per_trial == 0)
        return sample;

    const auto n = sample.n_packets_per_trial;
    const auto point_seed = rng.derived_seed();
    const auto workers = parallelism.resolved();
    std::vector<std::uint64_t> lost_per_worker(workers, 0);

    parallel_blocks(trials, parallelism, [&](std::size_t worker, std::size_t begin, std::size_t end) {
        FrameLayout layout;
        SicDecoder decoder;
        std::uint64_t lost = 0;
        for (std::size_t t = begin; t < end; ++t) {
            RandomStream trial_rng(point_seed, t);
            place_replicas_into(layout, n, config.degrees, config.n_slots, trial_rng);
            lost += n - decoder.count_decoded(layout, config.i_max);
        }
        lost_per_worker[worker] = lost;
    });

    std::uint64_t lost = 0;
    for (auto l : lost_per_worker)
        lost += l;
    const double transmitted = static_cast<double>(trials) * static_cast<double>(n);
    sample.plr = static_cast<double>(lost) / transmitted;
    sample.std_err = std::sqrt(sample.plr * (1.0 - sample.plr) / transmitted);
    return sample;
}

void PlrCurve::require_compatible(const ChannelConfig& config) const
{
    const auto expected = plr_fingerprint(config);
    if (fingerprint != expected)
        throw CurveMismatch("PLR curve built for '" + fingerprint + "' cannot be used with '" + expected + "'");
}

namespace {

std::size_t grid_points(double g_max, double grid_step)
{
    return static_cast<std::size_t>(std::floor(g_max / grid_step + 1e-9)) + 1;
}

void fill_points(PlrCurve& curve, const ChannelConfig& config, std::size_t first, std::size_t last,
                 std::uint64_t trials, Parallelism parallelism)
{
    for (std::size_t k = first; k < last; ++k) {
        const double g = static_cast<double>(k) * curve.grid_step;
        curve.samples.push_back(estimate_plr(g, config, trials, RandomStream(curve.seed, k), parallelism));
    }
}

}  // namespace

PlrCurve build_plr_curve(const ChannelConfig& config, double g_max, double grid_step, std::uint64_t trials,
                         std::uint64_t seed, Parallelism parallelism)
{
    require_valid(config);
    if (!(g_max > 0.0) || !(grid_step > 0.0))
        throw std::invalid_argument("PLR grid needs g_max > 0 and grid_step > 0");
    PlrCurve curve;
    curve.fingerprint = plr_fingerprint(config);
    curve.n_slots = config.n_slots;
    curve.grid_step = grid_step;
    curve.seed = seed;
    fill_points(curve, config, 0, grid_points(g_max, grid_step), trials, parallelism);
    return curve;
}

void extend_plr_curve(PlrCurve& curve, const ChannelConfig& config, double g_max, Parallelism parallelism)
{
    curve.require_compatible(config);
    if (curve.samples.empty())
        throw std::invalid_argument("cannot extend an empty PLR curve");
    const auto have = curve.samples.size();
    const auto want = grid_points(g_max, curve.grid_step);
    if (want > have)
        fill_points(curve, config, have, want, curve.samples.back().trials, parallelism);
}

double peak_throughput_load(const PlrCurve& curve)
{
    double best_load = 0.0;
    double best = -1.0;
    for (const auto& s : curve.samples) {
        const double throughput = s.g_in * (1.0 - s.plr);
        if (throughput > best) {
            best = throughput;
            best_load = s.g_in;
        }
    }
    return best_load;
}

double load_ceiling(const ChannelConfig& config)
{
    if (const auto* finite = std::get_if<FinitePopulation>(&config.population))
        return finite->users * std::max(finite->p0, config.p_r) / config.n_slots;
    return 0.0;
}

PlrCurve build_default_plr_curve(const ChannelConfig& config, std::uint64_t seed, std::uint64_t trials,
                                 double grid_step, Parallelism parallelism)
{
    // A grid step past the ceiling guards the last bracket against rounding.
    double g_max = std::max(1.0, load_ceiling(config) + grid_step);
    auto curve = build_plr_curve(config, g_max, grid_step, trials, seed, parallelism);
    for (int round = 0; round < 8 && curve.g_max() < 3.0 * peak_throughput_load(curve); ++round) {
        g_max = 3.0 * peak_throughput_load(curve) + grid_step;
        extend_plr_curve(curve, config, g_max, parallelism);
    }
    return curve;
}

double plr_at(const PlrCurve& curve, double g_in)
{
    if (curve.samples.empty())
        throw std::out_of_range("PLR curve has no samples");
    const double g_max = curve.g_max();
    if (!(g_in >= 0.0) || g_in > g_max)
        throw std::out_of_range("load " + format_real(g_in) + " outside curve range [0, " + format_real(g_max) + "]");
    const auto& s = curve.samples;
    auto upper = std::lower_bound(s.begin(), s.end(), g_in,
                                  [](const PlrSample& sample, double g) { return sample.g_in < g; });
    if (upper->g_in == g_in || upper == s.begin())
        return upper->plr;
    const auto lower = upper - 1;
    const double t = (g_in - lower->g_in) / (upper->g_in - lower->g_in);
    return lower->plr + t * (upper->plr - lower->plr);
}

void write_plr_csv(const PlrCurve& curve, std::ostream& out)
{
    out << "# plr_curve fingerprint=" << curve.fingerprint << " n_slots=" << curve.n_slots
        << " grid_step=" << format_real(curve.grid_step) << " seed=" << curve.seed << '\n';
    out << "g_in,n,plr,std_err,trials\n";
    for (const auto& s : curve.samples)
        out << format_real(s.g_in) << ',' << s.n_packets_per_trial << ',' << format_real(s.plr) << ','
            << format_real(s.std_err) << ',' << s.trials << '\n';
}

namespace {

template <typename T>
T parse_field(const std::string& text, const char* what)
{
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::runtime_error(std::string("PLR CSV: bad ") + what + " '" + text + "'");
    return value;
}

}  // namespace

PlrCurve read_plr_csv(std::istream& in)
{
    PlrCurve curve;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# plr_curve", 0) != 0)
        throw std::runtime_error("PLR CSV: missing '# plr_curve' header line");
    std::istringstream header(line.substr(11));
    std::string token;
    while (header >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            continue;
        const auto key = token.substr(0, eq);
        const auto value = token.substr(eq + 1);
        if (key == "fingerprint")
            curve.fingerprint = value;
        else if (key == "n_slots")
            curve.n_slots = parse_field<unsigned>(value, "n_slots");
        else if (key == "grid_step")
            curve.grid_step = parse_field<double>(value, "grid_step");
        else if (key == "seed")
            curve.seed = parse_field<std::uint64_t>(value, "seed");
    }
    if (curve.fingerprint.empty() || curve.n_slots == 0 || !(curve.grid_step > 0.0))
        throw std::runtime_error("PLR CSV: header lacks fingerprint, n_slots or grid_step");
    if (!std::getline(in, line) || line != "g_in,n,plr,std_err,trials")
        throw std::runtime_error("PLR CSV: unexpected column header");

    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream row(line);
        std::vector<std::string> cells;
        std::string cell;
        while (std::getline(row, cell, ','))
            cells.push_back(cell);
        if (cells.size() != 5)
            throw std::runtime_error("PLR CSV: expected 5 columns in '" + line + "'");
        PlrSample s;
        s.g_in = parse_field<double>(cells[0], "g_in");
        s.n_packets_per_trial = parse_field<std::uint64_t>(cells[1], "n");
        s.plr = parse_field<double>(cells[2], "plr");
        s.std_err = parse_field<double>(cells[3], "std_err");
        s.trials = parse_field<std::uint64_t>(cells[4], "trials");
        if (!curve.samples.empty() && !(s.g_in > curve.samples.back().g_in))
            throw std::runtime_error("PLR CSV: g_in must be strictly increasing");
        curve.samples.push_back(s);
    }
    if (curve.samples.empty() || curve.samples.front().g_in != 0.0)
        throw std::runtime_error("PLR CSV: curve must start at g_in = 0");
    return curve;
}

}  // namespace crdsa
