#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "crdsa/core.hpp"
#include "crdsa/parallel.hpp"
#include "crdsa/random_stream.hpp"

namespace crdsa {

/// Monte-Carlo packet loss ratio at one offered load.
struct PlrSample {
    double g_in = 0.0;  // packets per slot
    std::uint64_t n_packets_per_trial = 0;
    double plr = 0.0;
    double std_err = 0.0;
    std::uint64_t trials = 0;
};

/// Packets offered to a frame of `n_slots` slots at load `g_in`.
std::uint64_t packets_for_load(double g_in, unsigned n_slots);

/// Runs `trials` frames with exactly packets_for_load(g_in) packets each.
/// Trial t draws from `RandomStream{rng.derived_seed(), t}` and loss counts
/// are reduced as integers, so the result is independent of the worker count.
PlrSample estimate_plr(double g_in, const ChannelConfig& config, std::uint64_t trials, const RandomStream& rng,
                       Parallelism parallelism = {});

class CurveMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// PLR tabulated on the grid 0, step, 2 step, ... for one (N_s, degrees, I_max).
struct PlrCurve {
    std::string fingerprint;
    unsigned n_slots = 0;
    double grid_step = 0.0;
    std::uint64_t seed = 0;
    std::vector<PlrSample> samples;

    double g_max() const { return samples.empty() ? 0.0 : samples.back().g_in; }

    /// Throws CurveMismatch unless the curve was built for this channel.
    void require_compatible(const ChannelConfig& config) const;
};

inline constexpr double kDefaultGridStep = 0.02;
inline constexpr std::uint64_t kDefaultCurveTrials = 20'000;

/// Grid point k uses stream `RandomStream{seed, k}`.
PlrCurve build_plr_curve(const ChannelConfig& config, double g_max, double grid_step, std::uint64_t trials,
                         std::uint64_t seed, Parallelism parallelism = {});

/// Appends grid points up to `g_max`; the result equals a fresh build with
/// the larger range and the curve's original seed and trial count.
void extend_plr_curve(PlrCurve& curve, const ChannelConfig& config, double g_max, Parallelism parallelism = {});

/// Load at which g_in (1 - plr) peaks on the grid.
double peak_throughput_load(const PlrCurve& curve);

/// Highest total load the population can offer: M max(p0, p_r) / N_s for a
/// finite population, 0 (unbounded, no constraint) for an infinite one.
double load_ceiling(const ChannelConfig& config);

/// Curve on the default grid covering both the saturation branch
/// (g_max >= 3 x peak load) and the population's load ceiling.
PlrCurve build_default_plr_curve(const ChannelConfig& config, std::uint64_t seed,
                                 std::uint64_t trials = kDefaultCurveTrials, double grid_step = kDefaultGridStep,
                                 Parallelism parallelism = {});

/// Piecewise-linear interpolation; throws std::out_of_range outside [0, g_max].
double plr_at(const PlrCurve& curve, double g_in);

/// CSV with header `g_in,n,plr,std_err,trials` after one `#` line carrying
/// the fingerprint, grid step and seed.
void write_plr_csv(const PlrCurve& curve, std::ostream& out);
PlrCurve read_plr_csv(std::istream& in);

}  // namespace crdsa
