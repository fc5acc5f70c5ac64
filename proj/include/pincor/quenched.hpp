#ifndef PINCOR_QUENCHED_HPP
#define PINCOR_QUENCHED_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pincor/gaussenv.hpp"
#include "pincor/renewal.hpp"
#include "pincor/types.hpp"

namespace pincor {

// log Z_n for a fixed environment, pinned at n (trailing contact), via the
// log-domain-safe recursion Z_n = e^{h + beta w_n} sum_k K(k) Z_{n-k}.
PartitionTrace quenched_partition(const LawPtr& law, const ModelParams& params,
                                  const EnvSample& env);

// Monte-Carlo estimate of F(beta, h): mean over replicas of (1/N) log Z_N,
// each replica drawing its environment from stream split_seed(seed, i).
FreeEnergyEstimate quenched_free_energy(const LawPtr& law, const ModelParams& params,
                                        const CorrelationSpec& spec, std::int64_t n, int replicas,
                                        std::uint64_t seed, int threads = 0);

// Same estimator over pre-drawn environments (shared across an h grid).
FreeEnergyEstimate quenched_free_energy_envs(const LawPtr& law, const ModelParams& params,
                                             const std::vector<EnvSample>& envs, std::int64_t n,
                                             int threads = 0);

// Contact density via the central finite difference of logZ_N in h
// (= polymer expectation of the contact fraction), clamped to [0,1].
double contact_fraction(const LawPtr& law, const ModelParams& params, const EnvSample& env,
                        double eps = 1e-4);

// Grid scan for the quenched critical point: the bracket is [the last grid h
// whose estimate stays below threshold std errors, the first that exceeds].
// Environments are shared across the grid, which makes the estimates exactly
// nondecreasing in h. Throws "h_c outside grid" without a crossing.
struct ScanPoint {
    double h = 0.0;
    double estimate = 0.0;
    double std_err = 0.0;
};
struct ScanResult {
    double h_lower = 0.0;  // bracket lower edge
    double h_upper = 0.0;  // first grid point declared localized
    std::vector<ScanPoint> points;
    bool monotone = true;
};
ScanResult critical_point_scan(const LawPtr& law, double beta, const CorrelationSpec& spec,
                               std::int64_t n, int replicas, std::vector<double> h_grid,
                               double threshold, std::uint64_t seed, int threads = 0);

// Good-block rule for the localization strategy:
//  - RewardFloor: a block is good when beta w_i + h >= |h| at every site;
//    the block probability comes from the importance sampler and the block
//    gain is the homogeneous partition at reward |h| (a pathwise floor).
//  - PartitionFloor: a block is good when its per-site log partition clears
//    `threshold`; estimated by direct Monte Carlo.
struct GoodBlockRule {
    enum class Kind { RewardFloor, PartitionFloor };
    Kind kind = Kind::RewardFloor;
    double threshold = 0.0;  // PartitionFloor only; -inf marks every block good

    static GoodBlockRule reward_floor() { return {Kind::RewardFloor, 0.0}; }
    static GoodBlockRule partition_floor(double t) { return {Kind::PartitionFloor, t}; }
};

// Free-energy lower bound from aiming only at good blocks of length l:
//   F >= p * gain - (p / l) * (-log K((1/p - 1) l))
// where the gap cost keeps the exact inter-arrival tail (the Jensen
// worst case of equally spaced good blocks). All p-dependence is carried in
// log scale so stretched-exponentially rare blocks stay representable.
struct StrategyBound {
    std::int64_t l = 0;
    double log_p = 0.0;
    double log_p_se = 0.0;
    double gain = 0.0;           // per-site gain on good blocks
    double cost_per_site = 0.0;  // gap entropy at p-hat
    double net = 0.0;            // gain - cost at p-hat
    double net_lo = 0.0;         // gain - cost at the 3-se-low p
    double log_bound = 0.0;      // log(p * net); -inf when net <= 0
    double log_bound_lo = 0.0;
    double bound = 0.0;          // exp(log_bound); may underflow to 0
    std::string status;          // ok | nonpositive | no good blocks observed
    bool positive_with_ci() const { return status == "ok" && net_lo > 0.0; }
};
StrategyBound strategy_lower_bound(const LawPtr& law, const ModelParams& params,
                                   const CorrelationSpec& spec, std::int64_t l,
                                   std::int64_t budget, const GoodBlockRule& rule,
                                   std::uint64_t seed);

}  // namespace pincor

#endif
