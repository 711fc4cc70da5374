#include <doctest.h>

#include <cmath>
#include <sstream>

#include "crdsa/plr.hpp"
#include "test_support.hpp"

using namespace crdsa;

namespace {

ChannelConfig sa_channel(unsigned n_slots = 100)
{
    return testing::crdsa_channel(1, 100, 0.1, 1.0, n_slots);
}

}  // namespace

TEST_CASE("packets_for_load rounds g_in N_s")
{
    CHECK(packets_for_load(0.0, 100) == 0);
    CHECK(packets_for_load(0.72, 100) == 72);
    CHECK(packets_for_load(2.0 / 3.0, 3) == 2);
    CHECK(packets_for_load(0.005, 100) == 1);
    CHECK(packets_for_load(0.5, 3) == 2);
}

TEST_CASE("estimate_plr: empty frame loses nothing")
{
    const auto s = estimate_plr(0.0, testing::crdsa_channel(3, 10, 0.1), 100, RandomStream(1, 0));
    CHECK(s.plr == 0.0);
    CHECK(s.std_err == 0.0);
    CHECK(s.n_packets_per_trial == 0);
    CHECK(s.trials == 100);
}

TEST_CASE("estimate_plr: two degree-2 packets on three slots")
{
    const auto config = testing::crdsa_channel(2, 10, 0.1, 1.0, 3);
    const std::uint64_t trials = 100'000;
    const auto s = estimate_plr(2.0 / 3.0, config, trials, RandomStream(5, 0));
    CHECK(s.n_packets_per_trial == 2);
    // Both packets are lost together, so frames are the independent draws.
    CHECK(testing::within_sigma(s.plr, 1.0 / 3.0, double(trials)));
    CHECK(s.std_err == doctest::Approx(std::sqrt(s.plr * (1 - s.plr) / (2.0 * trials))));
}

TEST_CASE("estimate_plr: slotted aloha at unit load")
{
    const std::uint64_t trials = 20'000;
    const auto s = estimate_plr(1.0, sa_channel(), trials, RandomStream(6, 0));
    const double exact = 1.0 - std::pow(0.99, 99);
    CHECK(std::abs(s.plr - exact) <= 3 * testing::aloha_success_sigma(100, 100, trials));
}

TEST_CASE("estimate_plr: worker count does not change the sample")
{
    const auto config = testing::crdsa_channel(3, 10, 0.1);
    const RandomStream rng(77, 3);
    const auto a = estimate_plr(0.8, config, 3000, rng, Parallelism{1});
    const auto b = estimate_plr(0.8, config, 3000, rng, Parallelism{4});
    const auto c = estimate_plr(0.8, config, 3000, rng, Parallelism{7});
    CHECK(a.plr == b.plr);
    CHECK(a.plr == c.plr);
    CHECK(a.std_err == b.std_err);
    CHECK(estimate_plr(0.8, config, 3000, RandomStream(78, 3)).plr != a.plr);
}

TEST_CASE("build_plr_curve: grid")
{
    const auto curve = build_plr_curve(sa_channel(), 1.5, 0.5, 200, 1);
    REQUIRE(curve.samples.size() == 4);
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(curve.samples[k].g_in == doctest::Approx(0.5 * k));
    CHECK(curve.g_max() == doctest::Approx(1.5));
    CHECK(curve.fingerprint == plr_fingerprint(sa_channel()));
    CHECK(build_plr_curve(sa_channel(), 1.0, 0.3, 10, 1).samples.size() == 4);
    CHECK(build_plr_curve(sa_channel(), 0.9, 0.3, 10, 1).samples.size() == 4);
}

TEST_CASE("build_plr_curve: slotted aloha agrees with the closed form")
{
    const std::uint64_t trials = 4000;
    const auto curve = build_plr_curve(sa_channel(), 2.0, 0.1, trials, 9);
    double previous = -1.0;
    for (const auto& s : curve.samples) {
        const auto n = s.n_packets_per_trial;
        const double exact = n == 0 ? 0.0 : 1.0 - std::pow(0.99, double(n - 1));
        CHECK(std::abs(s.plr - exact) <= 4 * testing::aloha_success_sigma(double(n), 100, trials));
        // The closed form grows by about 0.01 per step, far above the noise.
        CHECK(s.plr > previous);
        previous = s.plr;
    }
}

TEST_CASE("extend_plr_curve matches a fresh build")
{
    const auto config = testing::crdsa_channel(3, 10, 0.1);
    auto curve = build_plr_curve(config, 0.4, 0.1, 300, 12);
    extend_plr_curve(curve, config, 1.0, Parallelism{3});
    const auto fresh = build_plr_curve(config, 1.0, 0.1, 300, 12, Parallelism{1});
    REQUIRE(curve.samples.size() == fresh.samples.size());
    for (std::size_t k = 0; k < fresh.samples.size(); ++k) {
        CHECK(curve.samples[k].g_in == fresh.samples[k].g_in);
        CHECK(curve.samples[k].plr == fresh.samples[k].plr);
    }
    CHECK_NOTHROW(extend_plr_curve(curve, config, 0.5));
    CHECK(curve.samples.size() == fresh.samples.size());
}

TEST_CASE("curves refuse other channels")
{
    const auto config = testing::crdsa_channel(3, 10, 0.1);
    auto curve = build_plr_curve(config, 0.2, 0.1, 10, 1);
    CHECK_NOTHROW(curve.require_compatible(testing::crdsa_channel(3, 500, 0.9, 0.3)));
    CHECK_THROWS_AS(curve.require_compatible(testing::crdsa_channel(2, 10, 0.1)), CurveMismatch);
    CHECK_THROWS_AS(curve.require_compatible(testing::crdsa_channel(3, 10, 0.1, 1.0, 100, 5)), CurveMismatch);
    CHECK_THROWS_AS(extend_plr_curve(curve, testing::crdsa_channel(3, 10, 0.1, 1.0, 50), 0.5), CurveMismatch);
}

TEST_CASE("plr_at interpolates linearly")
{
    PlrCurve curve;
    curve.n_slots = 100;
    curve.grid_step = 0.5;
    curve.samples = {{0.0, 0, 0.0, 0.0, 1}, {0.5, 50, 0.1, 0.0, 1}, {1.0, 100, 0.3, 0.0, 1}};
    CHECK(plr_at(curve, 0.0) == 0.0);
    CHECK(plr_at(curve, 0.5) == doctest::Approx(0.1));
    CHECK(plr_at(curve, 1.0) == doctest::Approx(0.3));
    CHECK(plr_at(curve, 0.75) == doctest::Approx(0.2));
    CHECK(plr_at(curve, 0.25) == doctest::Approx(0.05));
    CHECK_THROWS_AS(plr_at(curve, 1.01), std::out_of_range);
    CHECK_THROWS_AS(plr_at(curve, -0.01), std::out_of_range);
}

TEST_CASE("peak load and load ceiling")
{
    PlrCurve curve;
    curve.samples = {{0.0, 0, 0.0, 0, 1}, {0.5, 0, 0.0, 0, 1}, {1.0, 0, 0.6, 0, 1}, {1.5, 0, 0.9, 0, 1}};
    CHECK(peak_throughput_load(curve) == doctest::Approx(0.5));
    CHECK(load_ceiling(testing::crdsa_channel(3, 300, 0.2)) == doctest::Approx(3.0));
    CHECK(load_ceiling(testing::crdsa_channel(3, 300, 0.2, 0.1)) == doctest::Approx(0.6));
    auto inf = testing::crdsa_channel(3, 300, 0.2);
    inf.population = InfinitePopulation{30};
    CHECK(load_ceiling(inf) == 0.0);
}

TEST_CASE("build_default_plr_curve covers three times the peak")
{
    auto config = testing::crdsa_channel(2, 20, 0.1, 1.0, 20);
    const auto curve = build_default_plr_curve(config, 3, 300, 0.05, Parallelism{2});
    CHECK(curve.g_max() >= 3 * peak_throughput_load(curve) - 1e-9);
    CHECK(curve.g_max() >= load_ceiling(config));
    CHECK(curve.grid_step == 0.05);
}

TEST_CASE("PLR CSV round trip")
{
    const auto config = testing::crdsa_channel(3, 10, 0.1);
    const auto curve = build_plr_curve(config, 1.0, 0.1, 200, 99);
    std::stringstream io;
    write_plr_csv(curve, io);
    const auto back = read_plr_csv(io);
    CHECK(back.fingerprint == curve.fingerprint);
    CHECK(back.n_slots == curve.n_slots);
    CHECK(back.grid_step == curve.grid_step);
    CHECK(back.seed == curve.seed);
    REQUIRE(back.samples.size() == curve.samples.size());
    for (std::size_t k = 0; k < curve.samples.size(); ++k) {
        CHECK(back.samples[k].g_in == curve.samples[k].g_in);
        CHECK(back.samples[k].plr == curve.samples[k].plr);
        CHECK(back.samples[k].std_err == curve.samples[k].std_err);
        CHECK(back.samples[k].trials == curve.samples[k].trials);
        CHECK(back.samples[k].n_packets_per_trial == curve.samples[k].n_packets_per_trial);
    }
    std::stringstream bad("g_in,n,plr,std_err,trials\n0.1,10,0,0,5\n");
    CHECK_THROWS(read_plr_csv(bad));
}
