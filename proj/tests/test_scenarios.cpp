#include <doctest.h>

#include <cmath>

#include "crdsa/stability.hpp"
#include "test_support.hpp"

using namespace crdsa;

namespace {

/// CRDSA-3 curve at reduced Monte-Carlo effort, shared by the cases below.
const PlrCurve& crdsa3_curve()
{
    static const PlrCurve curve =
        build_plr_curve(testing::crdsa_channel(3, 300, 0.2), 3.02, kDefaultGridStep, 4000, 2024);
    return curve;
}

}  // namespace

TEST_CASE("CRDSA-3 curve shape")
{
    const auto& curve = crdsa3_curve();
    const double peak = peak_throughput_load(curve);
    CHECK(peak > 0.6);
    CHECK(peak < 0.9);
    CHECK(plr_at(curve, 0.3) < 1e-3);
    CHECK(plr_at(curve, 2.5) > 0.9);
}

TEST_CASE("300 users at p0 = 0.2: unstable with N_B^U near 25")
{
    const auto result = analyze_channel(crdsa3_curve(), testing::crdsa_channel(3, 300, 0.2));
    CHECK(result.kind == ChannelClassKind::UnstableFinite);
    REQUIRE(result.equilibria.size() == 3);
    CHECK(result.equilibria[0].kind == EquilibriumKind::LocallyStable);
    CHECK(result.equilibria[2].kind == EquilibriumKind::Saturation);
    REQUIRE(result.unstable_point());
    CHECK(std::abs(result.unstable_point()->n_b - 25) <= 3);
}

TEST_CASE("200 users at p0 = 0.34: N_B^U near 12")
{
    const auto result = analyze_channel(crdsa3_curve(), testing::crdsa_channel(3, 200, 0.34));
    CHECK(result.kind == ChannelClassKind::UnstableFinite);
    REQUIRE(result.unstable_point());
    CHECK(std::abs(result.unstable_point()->n_b - 12) <= 3);
}

TEST_CASE("stability boundary lies near 170 users")
{
    const auto below = analyze_channel(crdsa3_curve(), testing::crdsa_channel(3, 160, 0.2));
    CHECK(below.kind == ChannelClassKind::Stable);
    REQUIRE(below.operating_point());
    CHECK(below.operating_point()->g_t == doctest::Approx(0.32).epsilon(0.05));
    const auto above = analyze_channel(crdsa3_curve(), testing::crdsa_channel(3, 180, 0.2));
    CHECK(above.kind == ChannelClassKind::UnstableFinite);
    // The far crossing sits deep in the loss floor.
    CHECK(above.equilibria.back().plr() > 0.9);
}

TEST_CASE("static redesign of the 300-user channel")
{
    const auto& curve = crdsa3_curve();
    const auto base = testing::crdsa_channel(3, 300, 0.2);
    const auto p0 = sweep_parameter(curve, base, SweepParameter::ArrivalProbability, {0.2, 0.05, 0.005});
    CHECK(p0[0].channel.kind == ChannelClassKind::UnstableFinite);
    CHECK(p0.back().channel.kind == ChannelClassKind::Stable);
    const auto users = sweep_parameter(curve, base, SweepParameter::Users, {300, 250, 150});
    CHECK(users[0].channel.kind == ChannelClassKind::UnstableFinite);
    CHECK(users.back().channel.kind == ChannelClassKind::Stable);
    const auto p_r = sweep_parameter(curve, base, SweepParameter::RetransmissionProbability, {1.0, 0.39});
    CHECK(p_r[0].channel.kind == ChannelClassKind::UnstableFinite);
    CHECK(p_r[1].channel.kind == ChannelClassKind::Stable);
}

TEST_CASE("infinite population above the peak is overloaded")
{
    auto config = testing::crdsa_channel(3, 1, 0.0);
    config.population = InfinitePopulation{80.0};
    CHECK(analyze_channel(crdsa3_curve(), config).kind == ChannelClassKind::Overloaded);
    config.population = InfinitePopulation{30.0};
    CHECK(analyze_channel(crdsa3_curve(), config).kind == ChannelClassKind::UnstableInfinite);
}
