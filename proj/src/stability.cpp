#include "crdsa/stability.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace crdsa {

double EquilibriumContour::plr_at(double g_in) const
{
    if (points.empty() || !(g_in > 0.0))
        return plr.empty() ? 0.0 : plr.front();
    if (g_in >= g_max())
        return plr.back();
    auto upper = std::lower_bound(points.begin(), points.end(), g_in,
                                  [](const ContourPoint& p, double g) { return p.g_in < g; });
    const auto k = static_cast<std::size_t>(upper - points.begin());
    if (upper->g_in == g_in || k == 0)
        return plr[k];
    const double t = (g_in - points[k - 1].g_in) / (upper->g_in - points[k - 1].g_in);
    return plr[k - 1] + t * (plr[k] - plr[k - 1]);
}

ContourPoint EquilibriumContour::at(double g_in) const
{
    const double loss = plr_at(g_in);
    return {g_in, g_in * (1.0 - loss), g_in * loss * n_slots / p_r};
}

EquilibriumContour equilibrium_contour(const PlrCurve& curve, double p_r, unsigned n_slots)
{
    if (!(p_r > 0.0 && p_r <= 1.0))
        throw std::invalid_argument("p_r must lie in (0,1]");
    if (curve.n_slots != n_slots)
        throw CurveMismatch("PLR curve is for " + std::to_string(curve.n_slots) + " slots, not " +
                            std::to_string(n_slots));
    EquilibriumContour contour;
    contour.p_r = p_r;
    contour.n_slots = n_slots;
    contour.grid_step = curve.grid_step;
    contour.points.reserve(curve.samples.size());
    contour.plr.reserve(curve.samples.size());
    for (const auto& s : curve.samples) {
        contour.plr.push_back(s.plr);
        contour.points.push_back({s.g_in, s.g_in * (1.0 - s.plr), s.g_in * s.plr * n_slots / p_r});
    }
    return contour;
}

double load_line_gt(double n_b, const LoadLine& line, unsigned n_slots)
{
    if (const auto* finite = std::get_if<FinitePopulation>(&line.population))
        return std::max(0.0, (finite->users - n_b) * finite->p0 / n_slots);
    return std::get<InfinitePopulation>(line.population).lambda / n_slots;
}

const char* to_string(EquilibriumKind kind) noexcept
{
    switch (kind) {
    case EquilibriumKind::GloballyStable:
        return "GloballyStable";
    case EquilibriumKind::LocallyStable:
        return "LocallyStable";
    case EquilibriumKind::Unstable:
        return "Unstable";
    case EquilibriumKind::Saturation:
        return "Saturation";
    }
    return "?";
}

const char* to_string(ChannelClassKind kind) noexcept
{
    switch (kind) {
    case ChannelClassKind::Stable:
        return "Stable";
    case ChannelClassKind::UnstableFinite:
        return "UnstableFinite";
    case ChannelClassKind::UnstableInfinite:
        return "UnstableInfinite";
    case ChannelClassKind::Overloaded:
        return "Overloaded";
    }
    return "?";
}

double EquilibriumPoint::plr() const noexcept
{
    if (std::isinf(n_b))
        return 1.0;
    return g_in > 0.0 ? 1.0 - g_t / g_in : 0.0;
}

double backlog_drift(double n_b, const EquilibriumContour& contour, const LoadLine& line)
{
    const double new_traffic = load_line_gt(n_b, line, contour.n_slots);
    const double offered = new_traffic + n_b * contour.p_r / contour.n_slots;
    // Past the grid the throughput is taken as flat; beyond the peak it only falls.
    const double g = std::min(offered, contour.g_max());
    return new_traffic - contour.throughput(g);
}

namespace {

int sign(double x) noexcept
{
    return (x > 0.0) - (x < 0.0);
}

double mismatch(const EquilibriumContour& contour, const LoadLine& line, double g_in)
{
    const auto p = contour.at(g_in);
    return load_line_gt(p.n_b, line, contour.n_slots) - p.g_t;
}

double bisect(const EquilibriumContour& contour, const LoadLine& line, double lo, double hi)
{
    double d_lo = mismatch(contour, line, lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double d_mid = mismatch(contour, line, mid);
        if (std::abs(d_mid) < kRootTolerance || hi - lo < 1e-15)
            return mid;
        if (sign(d_mid) == sign(d_lo)) {
            lo = mid;
            d_lo = d_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> root_loads(const EquilibriumContour& contour, const LoadLine& line)
{
    const auto& pts = contour.points;
    std::vector<double> d(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        d[i] = load_line_gt(pts[i].n_b, line, contour.n_slots) - pts[i].g_t;

    std::vector<double> roots;
    const std::size_t last = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (d[i] == 0.0) {
            // Grid point exactly on the line: a root unless the line only touches.
            if (i == 0 || i == last || sign(d[i - 1]) != sign(d[i + 1]))
                roots.push_back(pts[i].g_in);
        } else if (i < last && d[i + 1] != 0.0 && sign(d[i]) != sign(d[i + 1])) {
            roots.push_back(bisect(contour, line, pts[i].g_in, pts[i + 1].g_in));
        }
    }
    return roots;
}

}  // namespace

std::vector<EquilibriumPoint> find_equilibria(const EquilibriumContour& contour, const LoadLine& line)
{
    if (contour.points.empty())
        throw std::invalid_argument("find_equilibria needs a non-empty contour");

    std::vector<EquilibriumPoint> roots;
    for (double g : root_loads(contour, line)) {
        const auto p = contour.at(g);
        roots.push_back({p.g_in, p.g_t, p.n_b, EquilibriumKind::Unstable});
    }
    std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) { return a.n_b < b.n_b; });

    const auto* finite = std::get_if<FinitePopulation>(&line.population);
    const double n_b_limit = finite ? static_cast<double>(finite->users) : std::numeric_limits<double>::infinity();

    // Drift sign on either side of each root, probed halfway to its neighbours.
    std::vector<EquilibriumPoint> labelled;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double here = roots[i].n_b;
        const double below = i == 0 ? 0.0 : roots[i - 1].n_b;
        double above;
        if (i + 1 < roots.size())
            above = roots[i + 1].n_b;
        else if (finite)
            above = n_b_limit;
        else
            above = here + 2.0 * std::max(1.0, here);

        std::optional<int> before, after;
        if (here - below > 1e-9)
            before = sign(backlog_drift(0.5 * (below + here), contour, line));
        if (above - here > 1e-9)
            after = sign(backlog_drift(0.5 * (here + above), contour, line));

        const bool sink = (!after || *after < 0) && (!before || *before > 0);
        const bool source = after && *after > 0 && (!before || *before < 0);
        if (!sink && !source)
            continue;  // tangency or a degenerate root
        roots[i].kind = sink ? EquilibriumKind::LocallyStable : EquilibriumKind::Unstable;
        labelled.push_back(roots[i]);
    }

    if (labelled.size() == 1 && labelled.front().is_stable()) {
        labelled.front().kind = labelled.front().plr() > kSaturationPlr ? EquilibriumKind::Saturation
                                                                         : EquilibriumKind::GloballyStable;
    } else if (labelled.size() > 1 && finite && labelled.back().is_stable()) {
        labelled.back().kind = EquilibriumKind::Saturation;
    }

    if (!finite && !labelled.empty() && labelled.back().kind == EquilibriumKind::Unstable) {
        const double inf = std::numeric_limits<double>::infinity();
        labelled.push_back({inf, load_line_gt(inf, line, contour.n_slots), inf, EquilibriumKind::Saturation});
    }
    return labelled;
}

const EquilibriumPoint* ChannelClass::unstable_point() const noexcept
{
    for (const auto& e : equilibria)
        if (e.kind == EquilibriumKind::Unstable)
            return &e;
    return nullptr;
}

const EquilibriumPoint* ChannelClass::operating_point() const noexcept
{
    for (const auto& e : equilibria)
        if (e.kind == EquilibriumKind::GloballyStable || e.kind == EquilibriumKind::LocallyStable)
            return &e;
    return nullptr;
}

ChannelClass classify_channel(std::vector<EquilibriumPoint> equilibria, const LoadLine& line)
{
    ChannelClass result;
    result.equilibria = std::move(equilibria);
    const auto& eq = result.equilibria;
    const bool has_unstable = std::any_of(eq.begin(), eq.end(),
                                          [](const auto& e) { return e.kind == EquilibriumKind::Unstable; });
    const auto saturated = [](const EquilibriumPoint& e) {
        return e.kind == EquilibriumKind::Saturation || e.plr() > kSaturationPlr;
    };

    if (has_unstable)
        result.kind = line.is_finite() ? ChannelClassKind::UnstableFinite : ChannelClassKind::UnstableInfinite;
    else if (eq.empty() || (eq.size() == 1 && saturated(eq.front())))
        result.kind = ChannelClassKind::Overloaded;
    else
        result.kind = ChannelClassKind::Stable;
    return result;
}

ChannelClass analyze_channel(const PlrCurve& curve, const ChannelConfig& config)
{
    require_valid(config);
    curve.require_compatible(config);
    const auto contour = equilibrium_contour(curve, config.p_r, config.n_slots);
    const auto line = LoadLine::from(config);
    return classify_channel(find_equilibria(contour, line), line);
}

SweepParameter parse_sweep_parameter(const std::string& name)
{
    if (name == "M")
        return SweepParameter::Users;
    if (name == "p0")
        return SweepParameter::ArrivalProbability;
    if (name == "p_r")
        return SweepParameter::RetransmissionProbability;
    throw std::invalid_argument("sweep parameter must be M, p0 or p_r, got '" + name + "'");
}

std::vector<SweepPoint> sweep_parameter(const PlrCurve& curve, const ChannelConfig& base, SweepParameter parameter,
                                        const std::vector<double>& values)
{
    if (values.empty())
        throw std::invalid_argument("sweep_parameter needs at least one value");
    std::vector<SweepPoint> out;
    out.reserve(values.size());
    for (double value : values) {
        ChannelConfig config = base;
        switch (parameter) {
        case SweepParameter::Users:
        case SweepParameter::ArrivalProbability: {
            auto* finite = std::get_if<FinitePopulation>(&config.population);
            if (!finite)
                throw std::invalid_argument("M and p0 sweeps need a finite population");
            if (parameter == SweepParameter::Users) {
                if (!(value >= 1.0) || value != std::floor(value))
                    throw std::invalid_argument("M must be a positive integer");
                finite->users = static_cast<unsigned>(value);
            } else {
                finite->p0 = value;
            }
            break;
        }
        case SweepParameter::RetransmissionProbability:
            config.p_r = value;
            break;
        }
        out.push_back({value, analyze_channel(curve, config)});
    }
    return out;
}

}  // namespace crdsa
