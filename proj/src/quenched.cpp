#include "pincor/quenched.hpp"

#include <algorithm>
#include <cmath>

#include "pincor/mathutil.hpp"
#include "pincor/parallel.hpp"
#include "pincor/pinned_dp.hpp"
#include "pincor/rng.hpp"

namespace pincor {

PartitionTrace quenched_partition(const LawPtr& law, const ModelParams& params,
                                  const EnvSample& env) {
    params.validate();
    const std::int64_t n = static_cast<std::int64_t>(env.values.size());
    if (n > law->n_max) throw error("environment longer than law cache (n > n_max)");
    PartitionTrace tr;
    tr.logz = ScaledPinnedDp::run(law->mass, static_cast<std::size_t>(n), [&](std::size_t site) {
        return params.h + params.beta * env.values[site - 1];
    });
    tr.context = "quenched(" + law->label() + "," + env.spec.label() +
                 ",beta=" + std::to_string(params.beta) + ",h=" + std::to_string(params.h) +
                 ",env_seed=" + std::to_string(env.seed) + ")";
    return tr;
}

FreeEnergyEstimate quenched_free_energy_envs(const LawPtr& law, const ModelParams& params,
                                             const std::vector<EnvSample>& envs, std::int64_t n,
                                             int threads) {
    if (envs.size() < 8) throw usage_error("quenched estimator needs replicas >= 8");
    std::vector<double> rates(envs.size());
    parallel_for(
        envs.size(),
        [&](std::size_t i) {
            const PartitionTrace tr = quenched_partition(law, params, envs[i]);
            rates[i] = tr.logz[static_cast<std::size_t>(n)] / static_cast<double>(n);
        },
        threads);
    const MeanSe ms = mean_se(rates);
    FreeEnergyEstimate est;
    est.value = ms.mean;
    est.std_err = ms.se;
    est.n_sites = n;
    est.n_replicas = static_cast<int>(envs.size());
    est.mode = FreeEnergyMode::Quenched;
    est.bias = "lower";  // sup_N representation: finite N underestimates F
    return est;
}

FreeEnergyEstimate quenched_free_energy(const LawPtr& law, const ModelParams& params,
                                        const CorrelationSpec& spec, std::int64_t n, int replicas,
                                        std::uint64_t seed, int threads) {
    if (replicas < 8) throw usage_error("quenched estimator needs replicas >= 8");
    const ToeplitzCov cov(spec, n);
    std::vector<EnvSample> envs;
    envs.reserve(static_cast<std::size_t>(replicas));
    for (int i = 0; i < replicas; ++i)
        envs.push_back(sample_environment(cov, split_seed(seed, static_cast<std::uint64_t>(i))));
    return quenched_free_energy_envs(law, params, envs, n, threads);
}

double contact_fraction(const LawPtr& law, const ModelParams& params, const EnvSample& env,
                        double eps) {
    if (!(eps > 0.0)) throw usage_error("eps must be > 0");
    const std::int64_t n = static_cast<std::int64_t>(env.values.size());
    ModelParams up = params, dn = params;
    up.h += eps;
    dn.h -= eps;
    const double hi = quenched_partition(law, up, env).logz[static_cast<std::size_t>(n)];
    const double lo = quenched_partition(law, dn, env).logz[static_cast<std::size_t>(n)];
    return std::clamp((hi - lo) / (2.0 * eps * static_cast<double>(n)), 0.0, 1.0);
}

ScanResult critical_point_scan(const LawPtr& law, double beta, const CorrelationSpec& spec,
                               std::int64_t n, int replicas, std::vector<double> h_grid,
                               double threshold, std::uint64_t seed, int threads) {
    if (threshold < 3.0) throw usage_error("scan threshold must be >= 3 (std-error units)");
    if (h_grid.size() < 2) throw usage_error("h grid needs at least 2 points");
    if (!std::is_sorted(h_grid.begin(), h_grid.end()))
        throw usage_error("h grid must be sorted");
    if (replicas < 8) throw usage_error("quenched estimator needs replicas >= 8");

    const ToeplitzCov cov(spec, n);
    std::vector<EnvSample> envs;
    envs.reserve(static_cast<std::size_t>(replicas));
    for (int i = 0; i < replicas; ++i)
        envs.push_back(sample_environment(cov, split_seed(seed, static_cast<std::uint64_t>(i))));

    ScanResult res;
    res.points.resize(h_grid.size());
    parallel_for(
        h_grid.size(),
        [&](std::size_t gi) {
            ModelParams p{beta, h_grid[gi]};
            // serial inner estimate; the grid is the parallel axis
            const FreeEnergyEstimate est = quenched_free_energy_envs(law, p, envs, n, 1);
            res.points[gi] = {h_grid[gi], est.value, est.std_err};
        },
        threads);

    for (std::size_t i = 1; i < res.points.size(); ++i)
        if (res.points[i].estimate < res.points[i - 1].estimate) res.monotone = false;

    for (std::size_t i = 0; i < res.points.size(); ++i) {
        const auto& p = res.points[i];
        if (p.estimate > threshold * p.std_err) {
            if (i == 0) throw error("h_c outside grid (already localized at the grid start)");
            res.h_upper = p.h;
            res.h_lower = res.points[i - 1].h;
            return res;
        }
    }
    throw error("h_c outside grid (no localized point found)");
}

namespace {

// Per-block gap entropy at block density p = e^{log_p}: the Jensen worst
// case of equally spaced good blocks costs -log K(gap * l) per good block
// with gap = 1/p - 1. Everything stays in log scale so p ~ e^{-500} is
// fine. log_p >= 0 means every block is good and the cost vanishes
// (K(0) := 1 convention).
double gap_cost_per_block(const InterArrivalLaw& law, std::int64_t l, double log_p) {
    if (log_p >= -1e-12) return 0.0;
    // log(gap * l) with gap = e^{-log_p} - 1
    double log_gap_l;
    if (log_p < -30.0)
        log_gap_l = -log_p + std::log(static_cast<double>(l));
    else
        log_gap_l = std::log(std::expm1(-log_p) * static_cast<double>(l));
    log_gap_l = std::max(log_gap_l, 0.0);

    // -log K at that (possibly astronomically large) gap, analytically
    double log_phi;
    if (law.slow_var.kind == SlowVar::Kind::Constant)
        log_phi = 0.0;
    else if (log_gap_l > 30.0)
        log_phi = law.slow_var.gamma * std::log(log_gap_l);
    else
        log_phi = law.slow_var.log_phi(std::exp(log_gap_l));
    const double neg_log_k =
        (1.0 + law.alpha) * log_gap_l - std::log(law.normalization) - log_phi;
    return std::max(neg_log_k, 0.0);
}

}  // namespace

StrategyBound strategy_lower_bound(const LawPtr& law, const ModelParams& params,
                                   const CorrelationSpec& spec, std::int64_t l,
                                   std::int64_t budget, const GoodBlockRule& rule,
                                   std::uint64_t seed) {
    if (l < 2) throw usage_error("block length l must be >= 2");
    params.validate();

    StrategyBound sb;
    sb.l = l;

    if (rule.kind == GoodBlockRule::Kind::RewardFloor) {
        if (!(params.beta > 0.0)) throw usage_error("reward-floor rule needs beta > 0");
        const double floor_site = std::abs(params.h);
        const double a_level = (floor_site - params.h) / params.beta;
        const ToeplitzCov cov(spec, l);
        const ProbEstimate pe = prob_all_above(cov, a_level, budget, seed);
        sb.log_p = pe.log_p;
        sb.log_p_se = pe.log_se;
        sb.gain = homogeneous_partition_dp(law, floor_site, l).logz[static_cast<std::size_t>(l)] /
                  static_cast<double>(l);
    } else {
        const ToeplitzCov cov(spec, l);
        std::int64_t good = 0;
        double good_sum = 0.0;
        for (std::int64_t i = 0; i < budget; ++i) {
            const EnvSample env =
                sample_environment(cov, split_seed(seed, static_cast<std::uint64_t>(i)));
            const double score =
                quenched_partition(law, params, env).logz[static_cast<std::size_t>(l)] /
                static_cast<double>(l);
            if (score >= rule.threshold) {
                ++good;
                good_sum += score;
            }
        }
        if (good == 0) {
            sb.status = "no good blocks observed";
            sb.log_p = kNegInf;
            sb.log_bound = kNegInf;
            sb.log_bound_lo = kNegInf;
            sb.bound = kNegInf;  // sentinel
            return sb;
        }
        const double p = static_cast<double>(good) / static_cast<double>(budget);
        sb.log_p = std::log(p);
        sb.log_p_se =
            (good == budget)
                ? 0.0
                : std::sqrt((1.0 - p) / (p * static_cast<double>(budget)));  // delta method
        sb.gain = good_sum / static_cast<double>(good);
    }

    sb.cost_per_site = gap_cost_per_block(*law, l, sb.log_p) / static_cast<double>(l);
    sb.net = sb.gain - sb.cost_per_site;

    const double log_p_lo = sb.log_p - 3.0 * sb.log_p_se;
    const double cost_lo = gap_cost_per_block(*law, l, log_p_lo) / static_cast<double>(l);
    sb.net_lo = sb.gain - cost_lo;

    sb.log_bound = sb.net > 0.0 ? sb.log_p + std::log(sb.net) : kNegInf;
    sb.log_bound_lo = sb.net_lo > 0.0 ? log_p_lo + std::log(sb.net_lo) : kNegInf;
    sb.bound = std::exp(sb.log_bound);
    sb.status = sb.net > 0.0 ? "ok" : "nonpositive";
    return sb;
}

}  // namespace pincor
