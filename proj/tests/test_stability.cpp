#include <doctest.h>

#include <cmath>
#include <functional>

#include "crdsa/stability.hpp"
#include "test_support.hpp"

using namespace crdsa;

namespace {

PlrCurve tabulate(const std::function<double(double)>& plr, double g_max, double step, unsigned n_slots = 100)
{
    PlrCurve curve;
    curve.fingerprint = plr_fingerprint(n_slots, DegreeDistribution::constant(1), 20);
    curve.n_slots = n_slots;
    curve.grid_step = step;
    const auto points = static_cast<std::size_t>(std::floor(g_max / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < points; ++k) {
        const double g = k * step;
        curve.samples.push_back({g, packets_for_load(g, n_slots), plr(g), 0.0, 1});
    }
    return curve;
}

/// Slotted Aloha in the large-frame limit: throughput g e^{-g}.
double aloha_plr(double g)
{
    return 1.0 - std::exp(-g);
}

struct OracleRoot {
    double n_b;
    bool stable;
};

/// Scans the backlog axis directly with the closed-form throughput and
/// reports sign changes of new traffic minus throughput.
std::vector<OracleRoot> scan_drift(unsigned users, double p0, double p_r, unsigned n_slots, double h)
{
    auto drift = [&](double n) {
        const double fresh = std::max(0.0, (users - n) * p0 / n_slots);
        const double g = fresh + n * p_r / n_slots;
        return fresh - g * std::exp(-g);
    };
    std::vector<OracleRoot> out;
    double prev = drift(0.0);
    for (double n = h; n <= users + 1e-12; n += h) {
        const double d = drift(n);
        if ((prev > 0) != (d > 0)) {
            double lo = n - h, hi = n;
            for (int i = 0; i < 100; ++i) {
                const double mid = 0.5 * (lo + hi);
                ((drift(mid) > 0) == (prev > 0) ? lo : hi) = mid;
            }
            out.push_back({0.5 * (lo + hi), prev > 0});
        }
        prev = d;
    }
    return out;
}

ChannelConfig aloha_config(unsigned users, double p0, double p_r)
{
    return testing::crdsa_channel(1, users, p0, p_r);
}

}  // namespace

TEST_CASE("contour points")
{
    PlrCurve curve;
    curve.n_slots = 100;
    curve.grid_step = 0.5;
    curve.samples = {{0.0, 0, 0.0, 0, 1}, {0.5, 50, 0.0, 0, 1}, {1.0, 100, 0.4, 0, 1}};
    const auto c = equilibrium_contour(curve, 1.0, 100);
    REQUIRE(c.points.size() == 3);
    CHECK(c.points[1].g_t == doctest::Approx(0.5));
    CHECK(c.points[1].n_b == doctest::Approx(0.0));
    CHECK(c.points[2].g_t == doctest::Approx(0.6));
    CHECK(c.points[2].n_b == doctest::Approx(40.0));
    const auto half = equilibrium_contour(curve, 0.5, 100);
    CHECK(half.points[2].n_b == doctest::Approx(80.0));
    CHECK(half.at(0.75).n_b == doctest::Approx(0.75 * 0.2 * 100 / 0.5));
    CHECK(half.plr_at(5.0) == doctest::Approx(0.4));
    CHECK_THROWS_AS(equilibrium_contour(curve, 1.0, 50), CurveMismatch);
    CHECK_THROWS(equilibrium_contour(curve, 0.0, 100));
}

TEST_CASE("load line")
{
    const LoadLine finite{FinitePopulation{100, 0.6}};
    CHECK(load_line_gt(0, finite, 100) == doctest::Approx(0.6));
    CHECK(load_line_gt(40, finite, 100) == doctest::Approx(0.36));
    CHECK(load_line_gt(100, finite, 100) == 0.0);
    CHECK(load_line_gt(150, finite, 100) == 0.0);
    const LoadLine infinite{InfinitePopulation{30}};
    CHECK(load_line_gt(0, infinite, 100) == doctest::Approx(0.3));
    CHECK(load_line_gt(1e6, infinite, 100) == doctest::Approx(0.3));
    CHECK(LoadLine::from(aloha_config(10, 0.1, 1)).is_finite());
}

TEST_CASE("silent population sits at the origin")
{
    const auto curve = tabulate(aloha_plr, 3.0, 0.02);
    const auto result = analyze_channel(curve, aloha_config(300, 0.0, 0.5));
    REQUIRE(result.equilibria.size() == 1);
    const auto& e = result.equilibria.front();
    CHECK(e.kind == EquilibriumKind::GloballyStable);
    CHECK(e.n_b == 0.0);
    CHECK(e.g_t == 0.0);
    CHECK(result.kind == ChannelClassKind::Stable);
}

TEST_CASE("loss-free channel: every point on the diagonal")
{
    const auto curve = tabulate([](double) { return 0.0; }, 4.0, 0.05);
    const auto contour = equilibrium_contour(curve, 0.3, 100);
    for (const auto& p : contour.points) {
        CHECK(p.g_t == p.g_in);
        CHECK(p.n_b == 0.0);
    }
    const auto config = aloha_config(300, 0.5, 0.3);
    const auto result = analyze_channel(curve, config);
    REQUIRE(result.equilibria.size() == 1);
    CHECK(result.equilibria[0].kind == EquilibriumKind::GloballyStable);
    CHECK(result.equilibria[0].g_t == doctest::Approx(1.5));
    CHECK(result.equilibria[0].n_b == doctest::Approx(0.0));
}

TEST_CASE("equilibria agree with a backlog-axis drift scan")
{
    const auto curve = tabulate(aloha_plr, 11.0, 0.005);
    int bistable = 0;
    for (unsigned users : {200u, 1000u})
        for (double p0 : {0.01, 0.02, 0.03, 0.1})
            for (double p_r : {0.05, 0.1, 0.3, 1.0}) {
                CAPTURE(users);
                CAPTURE(p0);
                CAPTURE(p_r);
                const auto config = aloha_config(users, p0, p_r);
                const auto expected = scan_drift(users, p0, p_r, 100, 0.01);
                const auto found = analyze_channel(curve, config).equilibria;
                REQUIRE(found.size() == expected.size());
                for (std::size_t i = 0; i < found.size(); ++i) {
                    CHECK(found[i].n_b == doctest::Approx(expected[i].n_b).epsilon(0.01).scale(50));
                    CHECK(found[i].is_stable() == expected[i].stable);
                }
                bistable += expected.size() == 3;
            }
    // The grid must exercise the multi-equilibrium case.
    CHECK(bistable > 0);
}

TEST_CASE("equilibrium invariants")
{
    const auto curve = tabulate(aloha_plr, 6.0, 0.01);
    RandomStream rng(31, 0);
    for (int i = 0; i < 300; ++i) {
        const unsigned users = 20 + rng.below(400);
        const double p0 = 0.5 * rng.uniform();
        const double p_r = 0.01 + 0.99 * rng.uniform();
        if (users * std::max(p0, p_r) / 100.0 > curve.g_max())
            continue;
        const auto config = aloha_config(users, p0, p_r);
        const auto contour = equilibrium_contour(curve, p_r, 100);
        const auto line = LoadLine::from(config);
        const auto eq = find_equilibria(contour, line);
        REQUIRE_FALSE(eq.empty());
        for (std::size_t k = 0; k < eq.size(); ++k) {
            CHECK(std::abs(load_line_gt(eq[k].n_b, line, 100) - eq[k].g_t) < 1e-6);
            if (k > 0) {
                CHECK(eq[k - 1].n_b <= eq[k].n_b);
                CHECK(eq[k - 1].is_stable() != eq[k].is_stable());
            }
        }
        CHECK(eq.front().is_stable());
        CHECK(eq.back().is_stable());
        const auto cls = classify_channel(eq, line);
        if (eq.size() == 1)
            CHECK(cls.kind != ChannelClassKind::UnstableFinite);
        else
            CHECK(cls.kind == ChannelClassKind::UnstableFinite);
        CHECK((cls.kind == ChannelClassKind::Overloaded) ==
              (eq.size() == 1 && eq.front().kind == EquilibriumKind::Saturation));
    }
}

TEST_CASE("bistable finite channel: labels")
{
    const auto curve = tabulate(aloha_plr, 11.0, 0.005);
    const auto result = analyze_channel(curve, aloha_config(1000, 0.02, 1.0));
    const auto expected = scan_drift(1000, 0.02, 1.0, 100, 0.01);
    REQUIRE(expected.size() == 3);
    REQUIRE(result.equilibria.size() == 3);
    CHECK(result.equilibria[0].kind == EquilibriumKind::LocallyStable);
    CHECK(result.equilibria[1].kind == EquilibriumKind::Unstable);
    CHECK(result.equilibria[2].kind == EquilibriumKind::Saturation);
    CHECK(result.kind == ChannelClassKind::UnstableFinite);
    REQUIRE(result.unstable_point() != nullptr);
    CHECK(result.unstable_point()->n_b == doctest::Approx(expected[1].n_b).epsilon(0.01));
    CHECK(result.operating_point() == &result.equilibria[0]);
}

TEST_CASE("infinite population")
{
    const auto curve = tabulate(aloha_plr, 6.0, 0.01);
    auto config = aloha_config(1, 0.1, 0.1);

    config.population = InfinitePopulation{45.0};  // above the 1/e peak
    auto result = analyze_channel(curve, config);
    CHECK(result.kind == ChannelClassKind::Overloaded);
    CHECK(result.equilibria.empty());

    config.population = InfinitePopulation{20.0};
    result = analyze_channel(curve, config);
    CHECK(result.kind == ChannelClassKind::UnstableInfinite);
    REQUIRE(result.equilibria.size() == 3);
    CHECK(result.equilibria[0].is_stable());
    CHECK(result.equilibria[1].kind == EquilibriumKind::Unstable);
    CHECK(result.equilibria[2].kind == EquilibriumKind::Saturation);
    CHECK(std::isinf(result.equilibria[2].n_b));
    CHECK(result.equilibria[2].plr() == 1.0);
    // g e^{-g} = 0.2 at g ~ 0.2592 and g ~ 2.5426; n_b = (g - 0.2) N_s / p_r.
    CHECK(result.equilibria[0].n_b == doctest::Approx((0.259171 - 0.2) * 1000).epsilon(0.01));
    CHECK(result.equilibria[1].n_b == doctest::Approx((2.542641 - 0.2) * 1000).epsilon(0.01));
}

TEST_CASE("classify_channel on hand-made lists")
{
    const LoadLine finite{FinitePopulation{100, 0.1}};
    using K = EquilibriumKind;
    CHECK(classify_channel({}, finite).kind == ChannelClassKind::Overloaded);
    CHECK(classify_channel({{1.0, 0.02, 98, K::Saturation}}, finite).kind == ChannelClassKind::Overloaded);
    CHECK(classify_channel({{0.1, 0.1, 0, K::GloballyStable}}, finite).kind == ChannelClassKind::Stable);
    const std::vector<EquilibriumPoint> three{
        {0.1, 0.1, 1, K::LocallyStable}, {0.9, 0.08, 20, K::Unstable}, {3, 0.01, 90, K::Saturation}};
    CHECK(classify_channel(three, finite).kind == ChannelClassKind::UnstableFinite);
    CHECK(classify_channel(three, LoadLine{InfinitePopulation{5}}).kind == ChannelClassKind::UnstableInfinite);
}

TEST_CASE("sweep_parameter reclassifies per value")
{
    const auto curve = tabulate(aloha_plr, 11.0, 0.005);
    const auto base = aloha_config(1000, 0.02, 1.0);
    const auto p0 = sweep_parameter(curve, base, SweepParameter::ArrivalProbability, {0.02, 0.0005});
    REQUIRE(p0.size() == 2);
    CHECK(p0[0].value == 0.02);
    CHECK(p0[0].channel.kind == ChannelClassKind::UnstableFinite);
    CHECK(p0[1].channel.kind == ChannelClassKind::Stable);
    const auto users = sweep_parameter(curve, base, SweepParameter::Users, {1000, 100});
    CHECK(users[0].channel.kind == ChannelClassKind::UnstableFinite);
    CHECK(users[1].channel.kind == ChannelClassKind::Stable);
    const auto p_r = sweep_parameter(curve, base, SweepParameter::RetransmissionProbability, {0.1});
    CHECK(p_r[0].channel.kind == ChannelClassKind::Stable);
    CHECK_THROWS(sweep_parameter(curve, base, SweepParameter::Users, {2.5}));
    CHECK_THROWS(sweep_parameter(curve, base, SweepParameter::Users, {}));
    CHECK(parse_sweep_parameter("p_r") == SweepParameter::RetransmissionProbability);
    CHECK_THROWS(parse_sweep_parameter("q"));
}
