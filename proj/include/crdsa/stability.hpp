#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "crdsa/core.hpp"
#include "crdsa/plr.hpp"

namespace crdsa {

/// Point of the equilibrium contour, where new traffic equals throughput:
/// g_t = g_in (1 - plr) and n_b = g_in plr N_s / p_r.
struct ContourPoint {
    double g_in = 0.0;
    double g_t = 0.0;
    double n_b = 0.0;
};

/// Contour sampled on the PLR grid. `plr` keeps the curve's samples so the
/// contour can be evaluated between grid points with the same interpolant.
struct EquilibriumContour {
    double p_r = 1.0;
    unsigned n_slots = 0;
    double grid_step = 0.0;
    std::vector<ContourPoint> points;
    std::vector<double> plr;

    double g_max() const { return points.empty() ? 0.0 : points.back().g_in; }
    /// Linear PLR interpolation on [0, g_max], held constant above g_max.
    double plr_at(double g_in) const;
    ContourPoint at(double g_in) const;
    double throughput(double g_in) const { return g_in * (1.0 - plr_at(g_in)); }
};

EquilibriumContour equilibrium_contour(const PlrCurve& curve, double p_r, unsigned n_slots);

/// New-traffic load offered by thinking users as a function of backlog.
struct LoadLine {
    Population population;

    static LoadLine from(const ChannelConfig& config) { return {config.population}; }
    bool is_finite() const noexcept { return std::holds_alternative<FinitePopulation>(population); }
};

/// (M - n_b) p0 / N_s clamped at 0 for a finite population, lambda / N_s otherwise.
double load_line_gt(double n_b, const LoadLine& line, unsigned n_slots);

enum class EquilibriumKind { GloballyStable, LocallyStable, Unstable, Saturation };

const char* to_string(EquilibriumKind kind) noexcept;

struct EquilibriumPoint {
    double g_in = 0.0;
    double g_t = 0.0;
    double n_b = 0.0;
    EquilibriumKind kind = EquilibriumKind::GloballyStable;

    bool is_stable() const noexcept { return kind != EquilibriumKind::Unstable; }
    /// Packet loss at the point; 0 at the origin, 1 for the point at infinity.
    double plr() const noexcept;
};

/// Tolerance on |load line - contour| for a refined root.
inline constexpr double kRootTolerance = 1e-9;
/// A lone stable equilibrium losing more than this fraction is a saturation point.
inline constexpr double kSaturationPlr = 0.95;

/// Intersections of contour and load line, sorted by backlog.
///
/// Roots are located in g_in-parameter space (n_b(g_in) need not be
/// monotone) and refined by bisection. Each is labelled from the sign of the
/// backlog drift on the load line just below and above it: positive to
/// negative is a sink (stable), negative to positive is unstable. With more
/// than one equilibrium the highest stable one is the saturation point; for
/// an infinite population with crossings a saturation point at n_b = +inf is
/// appended.
std::vector<EquilibriumPoint> find_equilibria(const EquilibriumContour& contour, const LoadLine& line);

/// Backlog drift per slot on the load line: new traffic minus throughput.
double backlog_drift(double n_b, const EquilibriumContour& contour, const LoadLine& line);

enum class ChannelClassKind { Stable, UnstableFinite, UnstableInfinite, Overloaded };

const char* to_string(ChannelClassKind kind) noexcept;

struct ChannelClass {
    ChannelClassKind kind = ChannelClassKind::Stable;
    std::vector<EquilibriumPoint> equilibria;

    /// The unstable equilibrium, if any (the lowest one when several exist).
    const EquilibriumPoint* unstable_point() const noexcept;
    const EquilibriumPoint* operating_point() const noexcept;
};

ChannelClass classify_channel(std::vector<EquilibriumPoint> equilibria, const LoadLine& line);

/// Contour, equilibria and classification of `config` on `curve` in one call.
ChannelClass analyze_channel(const PlrCurve& curve, const ChannelConfig& config);

enum class SweepParameter { Users, ArrivalProbability, RetransmissionProbability };

SweepParameter parse_sweep_parameter(const std::string& name);

struct SweepPoint {
    double value = 0.0;
    ChannelClass channel;
};

/// Reclassifies `base` for each value of M, p0 or p_r. M and p0 move only the
/// load line; p_r rescales the contour backlog while reusing `curve`.
std::vector<SweepPoint> sweep_parameter(const PlrCurve& curve, const ChannelConfig& base, SweepParameter parameter,
                                        const std::vector<double>& values);

}  // namespace crdsa
