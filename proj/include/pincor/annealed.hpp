#ifndef PINCOR_ANNEALED_HPP
#define PINCOR_ANNEALED_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pincor/gaussenv.hpp"
#include "pincor/renewal.hpp"
#include "pincor/report.hpp"
#include "pincor/types.hpp"

namespace pincor {

// Disorder-averaged model: contacts carry a one-body reward beta^2/2 + h and
// a pairwise interaction beta^2 rho_k between contacts at distance k.
// Truncation m limits the interaction range (the effective correlation is
// the TruncatedPower view of `spec`); m = -1 means untruncated, which only
// the small-N brute force can evaluate.
struct AnnealedConfig {
    LawPtr law;
    CorrelationSpec spec;
    ModelParams params;
    std::int64_t m = 12;

    bool truncated() const { return m >= 0; }
    double rho_eff(std::int64_t k) const {
        if (k == 0) return 1.0;
        if (truncated() && k > m) return 0.0;
        return spec.rho(k);
    }
    // sums of |rho_eff| and k|rho_eff| over k >= 1 (exact for the evaluated
    // model; certified tails in the untruncated case)
    double sum_abs_rho_eff() const;
    double sum_k_abs_rho_eff() const;

    AnnealedConfig with_h(double h) const {
        AnnealedConfig c = *this;
        c.params.h = h;
        return c;
    }
};

// H(S) = (beta^2/2 + h)|S| + beta^2 sum_{i<j in S} rho_{j-i}; S must be a
// sorted subset of {1..n} whose largest element is n (pinned endpoint).
double annealed_hamiltonian(const AnnealedConfig& config, std::span<const std::int64_t> subset,
                            std::int64_t n);

// log Z^a_n by exhaustive enumeration over the 2^(n-1) contact sets (n <= 20).
double annealed_brute_force(const AnnealedConfig& config, std::int64_t n);

// Exact log Z^a_n for the truncated model, for all n = 0..N: a DP over the
// occupancy mask of the trailing m sites. Gaps beyond m reset the mask and
// are grouped through a renewal-style convolution, so the cost is
// O(N 2^(m-1) m + N^2). Optional `forced` positions restrict the expectation
// to paths containing them (used by the quasi-renewal checks).
PartitionTrace annealed_transfer(const AnnealedConfig& config, std::int64_t n,
                                 std::span<const std::int64_t> forced = {});

// Deterministic slope estimate (log Z_N - log Z_burn)/(N - burn).
FreeEnergyEstimate annealed_free_energy(const AnnealedConfig& config, std::int64_t n,
                                        std::int64_t burn);

enum class HcMethod {
    // Bisect on the finite-size decay statistic log Z_N - log Z_burn matched
    // to its beta = 0 critical value log u_N - log u_burn. Exact at beta = 0
    // and for the IID reduction by construction; the default.
    MatchedDecay,
    // Bisect on annealed_free_energy > 1e-6 (cruder near-critical resolution).
    SlopeThreshold,
};

struct HcEstimate {
    double h_c = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    HcMethod method = HcMethod::MatchedDecay;
};

struct HcOptions {
    HcMethod method = HcMethod::MatchedDecay;
    std::int64_t n = 8192;
    double slope_threshold = 1e-6;
};

HcEstimate annealed_critical_point(const AnnealedConfig& config, double tol,
                                   const HcOptions& opts = {});

// Quasi super-multiplicativity and the two-sided quasi-renewal sandwich,
// with the computable constants of the truncated model. Margins >= 0 pass.
CheckReport quasi_renewal_check(const AnnealedConfig& config, std::span<const std::int64_t> n_list,
                                std::uint64_t seed = 7);

// sup/inf over a lambda grid of hat Z_{h_c}(lambda) / hat P(lambda).
struct LaplaceRatioOptions {
    std::optional<double> h_c;
    double band_lo = 0.2;
    double band_hi = 5.0;
};
CheckReport laplace_ratio_check(const AnnealedConfig& config, std::span<const double> lambda_grid,
                                const LaplaceRatioOptions& opts = {});

// Least-squares slope of log F^a(h_c + u) vs log u. Each point uses a
// horizon N(u) scaled so N * F >= 30 (predicted from the homogeneous free
// energy, which the sandwich theorem makes the right yardstick).
struct ExponentFit {
    double slope = 0.0;
    double h_c = 0.0;
    std::vector<double> u;
    std::vector<double> f;
    double sandwich_c = 0.0;  // best constant with F(u/c) <= F^a <= F(cu)
};
struct ExponentFitOptions {
    std::optional<double> h_c;
    std::int64_t n_min = 4096;
    std::int64_t n_max = 131072;
    double target_nf = 30.0;
};
ExponentFit annealed_exponent_fit(const AnnealedConfig& config, std::span<const double> u_grid,
                                  const ExponentFitOptions& opts = {});

// Z^a_{N, h_c} / P(N in tau) over N_list, banded (alpha > 1 regime).
struct ProximityOptions {
    std::optional<double> h_c;
    double band_lo = 1.0 / 3.0;
    double band_hi = 3.0;
};
CheckReport renewal_measure_proximity(const AnnealedConfig& config,
                                      std::span<const std::int64_t> n_list,
                                      const ProximityOptions& opts = {});

}  // namespace pincor

#endif
