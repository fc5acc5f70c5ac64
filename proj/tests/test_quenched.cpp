#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pincor/annealed.hpp"
#include "pincor/mathutil.hpp"
#include "pincor/quenched.hpp"
#include "pincor/rng.hpp"

using namespace pincor;

namespace {

EnvSample make_env(const CorrelationSpec& spec, std::int64_t l, std::uint64_t seed) {
    const ToeplitzCov cov(spec, l);
    return sample_environment(cov, seed);
}

}  // namespace

TEST_CASE("quenched partition against exhaustive enumeration") {
    Rng rng(404);
    for (int inst = 0; inst < 100; ++inst) {
        const double alpha = 0.2 + 1.6 * rng.next_uniform();
        const double beta = 1.2 * rng.next_uniform();
        const double h = -1.5 + 3.0 * rng.next_uniform();
        const std::int64_t n = 8 + static_cast<std::int64_t>(rng.next_u64() % 7);
        auto law = build_law(alpha, SlowVar::constant(), 1024);
        const EnvSample env = make_env(CorrelationSpec::shifted_power(1.0), n, rng.next_u64());

        std::vector<double> rewards(env.values.size());
        for (std::size_t i = 0; i < rewards.size(); ++i) rewards[i] = h + beta * env.values[i];
        const auto oracle = oracles::enumerate_pinned(*law, rewards, n);

        const PartitionTrace tr = quenched_partition(law, ModelParams{beta, h}, env);
        CAPTURE(inst);
        REQUIRE(std::abs(tr.logz[static_cast<std::size_t>(n)] - oracle.logz) <= 1e-10);
    }
}

TEST_CASE("quenched partition basics") {
    auto law = build_law(0.5, SlowVar::constant(), 2048);
    const auto spec = CorrelationSpec::shifted_power(2.0);
    const EnvSample env = make_env(spec, 256, 31);

    // beta = 0 is the homogeneous chain
    const PartitionTrace a = quenched_partition(law, ModelParams{0.0, 0.4}, env);
    const PartitionTrace b = homogeneous_partition_dp(law, 0.4, 256);
    for (std::size_t n = 0; n <= 256; ++n) CHECK(std::abs(a.logz[n] - b.logz[n]) <= 1e-12);

    // single step
    const EnvSample env1 = make_env(spec, 1, 77);
    const PartitionTrace t1 = quenched_partition(law, ModelParams{0.8, -0.2}, env1);
    CHECK(t1.logz[1] ==
          doctest::Approx(std::log(law->k(1)) - 0.2 + 0.8 * env1.values[0]).epsilon(1e-14));
    CHECK(t1.logz[0] == 0.0);

    // log Z is pointwise increasing in h
    const PartitionTrace lo = quenched_partition(law, ModelParams{0.7, -0.1}, env);
    const PartitionTrace hi = quenched_partition(law, ModelParams{0.7, -0.1 + 0.01}, env);
    for (std::size_t n = 1; n <= 256; ++n) CHECK(hi.logz[n] > lo.logz[n]);
}

TEST_CASE("contact fraction") {
    auto law = build_law(0.5, SlowVar::constant(), 2048);
    const auto spec = CorrelationSpec::iid();

    EnvSample flat;
    flat.spec = spec;
    flat.values.assign(256, 0.0);
    CHECK(contact_fraction(law, ModelParams{0.0, 20.0}, flat) >= 0.99);

    EnvSample flat1024;
    flat1024.spec = spec;
    flat1024.values.assign(1024, 0.0);
    CHECK(contact_fraction(law, ModelParams{0.0, -20.0}, flat1024) <= 0.05);

    // finite difference equals the enumeration expectation of contacts/N
    Rng rng(505);
    for (int inst = 0; inst < 10; ++inst) {
        const std::int64_t n = 8 + static_cast<std::int64_t>(rng.next_u64() % 5);
        const double beta = rng.next_uniform(), h = -1.0 + 2.0 * rng.next_uniform();
        const EnvSample env = make_env(CorrelationSpec::shifted_power(1.5), n, rng.next_u64());
        std::vector<double> rewards(env.values.size());
        for (std::size_t i = 0; i < rewards.size(); ++i) rewards[i] = h + beta * env.values[i];
        const auto oracle = oracles::enumerate_pinned(*law, rewards, n);
        const double fd = contact_fraction(law, ModelParams{beta, h}, env);
        CHECK(std::abs(fd - oracle.mean_contacts / static_cast<double>(n)) <= 1e-6);
    }
}

TEST_CASE("quenched free energy estimator") {
    auto law = build_law(0.5, SlowVar::constant(), 2048);
    const auto spec = CorrelationSpec::shifted_power(2.0);

    CHECK_THROWS_AS(quenched_free_energy(law, ModelParams{0.5, 0.0}, spec, 128, 4, 1),
                    usage_error);

    // beta = 0: matches the root of the homogeneous equation within 2/N + tol
    const std::int64_t n = 1024;
    const FreeEnergyEstimate est0 =
        quenched_free_energy(law, ModelParams{0.0, 0.5}, spec, n, 8, 99);
    const RenewalMass um = renewal_mass(law, 2048);
    const double f = homogeneous_free_energy(um, 0.5);
    CHECK(std::abs(est0.value - f) <= 2.0 / static_cast<double>(n) + 5e-3);
    CHECK(est0.std_err == 0.0);  // no disorder: replicas identical
    CHECK(est0.bias == "lower");

    // determinism: same seed, different thread counts
    const FreeEnergyEstimate e1 =
        quenched_free_energy(law, ModelParams{0.9, 0.2}, spec, 512, 16, 1234, 1);
    const FreeEnergyEstimate e8 =
        quenched_free_energy(law, ModelParams{0.9, 0.2}, spec, 512, 16, 1234, 8);
    CHECK(e1.value == e8.value);
    CHECK(e1.std_err == e8.std_err);
}

TEST_CASE("pointwise jensen against the matched annealed model") {
    auto law = build_law(0.5, SlowVar::constant(), 2048);
    const auto spec = CorrelationSpec::truncated_power(2.0, 8);
    const std::int64_t n = 512;
    const ModelParams p{0.8, 0.3};

    AnnealedConfig cfg{law, spec, p, 8};
    const double log_za = annealed_transfer(cfg, n).logz[static_cast<std::size_t>(n)];

    const FreeEnergyEstimate est = quenched_free_energy(law, p, spec, n, 32, 2718);
    CHECK(est.value <= log_za / static_cast<double>(n) + 3.0 * est.std_err);
}

TEST_CASE("deep delocalized estimates stay at noise level") {
    auto law = build_law(1.5, SlowVar::constant(), 2048);
    const auto spec = CorrelationSpec::truncated_power(2.0, 12);
    AnnealedConfig cfg{law, spec, ModelParams{1.0, 0.0}, 12};
    HcOptions ho;
    ho.n = 2048;
    const double hca = annealed_critical_point(cfg, 1e-3, ho).h_c;

    const ModelParams deep{1.0, hca - 1.0};
    double prev = -std::numeric_limits<double>::infinity();
    for (const std::int64_t n : {std::int64_t{512}, std::int64_t{1024}, std::int64_t{2048}}) {
        const FreeEnergyEstimate est = quenched_free_energy(law, deep, spec, n, 16, 5150);
        CAPTURE(n);
        CHECK(est.value <= 3.0 * est.std_err);
        // superadditive in expectation: the estimates drift upward toward F
        CHECK(est.value >= prev - 3.0 * est.std_err);
        prev = est.value;
    }
}

TEST_CASE("critical point scan") {
    // beta = 0: the bracket contains the exact critical point 0
    auto law = build_law(1.5, SlowVar::constant(), 2048);
    const auto spec = CorrelationSpec::iid();
    std::vector<double> grid;
    for (double h = -0.3; h <= 0.301; h += 0.05) grid.push_back(h);
    const ScanResult scan0 =
        critical_point_scan(law, 0.0, spec, 1024, 8, grid, 3.0, 1);
    CHECK(scan0.h_lower <= 0.0);
    CHECK(scan0.h_upper >= 0.0);
    CHECK(scan0.monotone);

    // iid beta=0.5: annealed bound places the bracket no lower than
    // h_c^a - grid step (Jensen: F <= F^a)
    std::vector<double> grid2;
    for (double h = -0.3; h <= 0.001; h += 0.02) grid2.push_back(h);
    const ScanResult scan =
        critical_point_scan(law, 0.5, spec, 2048, 24, grid2, 3.0, 77);
    CHECK(scan.h_lower >= -0.125 - 0.02 - 1e-12);

    // a < 1: always localized; the scan over a deep-negative grid never
    // crosses, so the critical point is outside the grid
    auto law05 = build_law(0.5, SlowVar::constant(), 1024);
    std::vector<double> deep_grid{-8.0, -7.0, -6.0, -5.0, -4.0};
    CHECK_THROWS_WITH_AS(critical_point_scan(law05, 1.0, CorrelationSpec::shifted_power(0.5),
                                             512, 8, deep_grid, 3.0, 5),
                         "h_c outside grid (no localized point found)", error);

    CHECK_THROWS_AS(critical_point_scan(law, 0.5, spec, 512, 8, grid, 2.0, 5), usage_error);
}

TEST_CASE("strategy lower bound rules") {
    auto law = build_law(0.5, SlowVar::constant(), 4096);

    // degenerate all-good rule: the bound is the block average gain
    {
        const auto spec = CorrelationSpec::truncated_power(2.0, 8);
        const StrategyBound sb =
            strategy_lower_bound(law, ModelParams{0.5, 0.5}, spec, 64, 200,
                                 GoodBlockRule::partition_floor(kNegInf), 7);
        CHECK(sb.log_p == 0.0);
        CHECK(sb.cost_per_site == 0.0);
        CHECK(sb.bound == doctest::Approx(sb.gain).epsilon(1e-12));
        CHECK(sb.status == "ok");
    }

    // no good blocks: -inf sentinel
    {
        const auto spec = CorrelationSpec::truncated_power(2.0, 8);
        const StrategyBound sb =
            strategy_lower_bound(law, ModelParams{0.5, -3.0}, spec, 64, 100,
                                 GoodBlockRule::partition_floor(10.0), 7);
        CHECK(sb.status == "no good blocks observed");
        CHECK(sb.bound == kNegInf);
    }

    // reward-floor rule at a=0.5: rare good blocks, positive bound
    {
        const auto spec = CorrelationSpec::shifted_power(0.5);
        const StrategyBound sb = strategy_lower_bound(law, ModelParams{1.0, -2.0}, spec, 256,
                                                      4000, GoodBlockRule::reward_floor(), 33);
        CHECK(sb.positive_with_ci());
        CHECK(sb.log_p < -50.0);  // far beyond naive Monte Carlo
        CHECK(sb.log_bound > kNegInf);
    }

    // the bound never beats a direct estimate on a matched instance
    {
        const auto spec = CorrelationSpec::truncated_power(2.0, 8);
        const ModelParams p{0.5, 0.6};
        const StrategyBound sb = strategy_lower_bound(
            law, p, spec, 64, 400, GoodBlockRule::partition_floor(0.05), 11);
        const FreeEnergyEstimate direct = quenched_free_energy(law, p, spec, 1024, 16, 12);
        CHECK(sb.bound <= direct.value + 3.0 * direct.std_err);
    }
}
