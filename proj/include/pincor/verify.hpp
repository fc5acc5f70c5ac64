#ifndef PINCOR_VERIFY_HPP
#define PINCOR_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pincor/annealed.hpp"
#include "pincor/gaussenv.hpp"
#include "pincor/quenched.hpp"
#include "pincor/renewal.hpp"
#include "pincor/report.hpp"

namespace pincor {

// Quadratic smoothing bound: above the estimated critical bracket, every
// grid point must satisfy F - 3 se <= (1+alpha)/(2 Y_inf beta^2) (h - hc_lo)^2,
// with hc_lo the conservative lower bracket edge.
struct SmoothingOptions {
    std::int64_t n = 2048;
    int replicas = 64;
    std::vector<double> h_grid;  // empty -> default grid
    std::uint64_t seed = 2024;
    int threads = 0;
};
CheckReport check_smoothing(const LawPtr& law, const CorrelationSpec& spec, double beta,
                            const SmoothingOptions& opts = {});

// Always-localized regime: the good-block strategy bound at block length
// l = (Cbar |h| / beta^2)^{1/(1-a)} must be positive with CI separation, and
// log(-log bound) must scale like |h|^{(2-a)/(1-a)}.
struct NoTransitionOptions {
    double c_bar = 16.0;
    std::int64_t budget = 20000;
    double slope_tol = 0.25;
    std::uint64_t seed = 2024;
    bool with_direct_estimates = true;
    // positivity is asserted for h <= this; weaker rewards are reported only
    // (the strategy needs |h| large enough for the block gain to beat the
    // gap entropy at feasible block sizes)
    double require_positive_from = -2.0;
};
CheckReport check_no_transition(const LawPtr& law, double beta, const CorrelationSpec& spec,
                                const std::vector<double>& h_list,
                                const NoTransitionOptions& opts = {});

// a > 2 annealed regime bundle: truncation convergence, critical exponent
// sandwich, critical-point asymptotics, quasi-renewal margins, Laplace
// ratio, and (alpha > 1) renewal-measure proximity.
struct AnnealedRegimeOptions {
    std::int64_t m = 12;
    double exponent_tol = 0.15;
    std::uint64_t seed = 2024;
    bool skip_asymptotics = false;  // the beta-sweep is the slow part
};
CheckReport check_annealed_regime(const LawPtr& law, const CorrelationSpec& spec, double beta,
                                  const AnnealedRegimeOptions& opts = {});

// Entropy/eigenvalue asymptotics of the covariance: <Y^-1 1,1>/l -> 1/Y_inf
// (a > 1, 5%) or Perron eigenvalue scaling mu ~ l^{1-a} (a < 1, 10%).
CheckReport check_entropy_asymptotics(const CorrelationSpec& spec,
                                      const std::vector<std::int64_t>& l_list);

// A named scenario: the resolved config snapshot plus the suite id. Rerunning
// an identical scenario reproduces the CheckReport bit-for-bit.
struct Scenario {
    std::string id;  // entropy | smoothing | no-transition | annealed-regime
    nlohmann::json inputs;
};

CheckReport run_scenario(const Scenario& scenario);

// All scenarios of a suite, merged; gate errors become "refused" reports.
struct SuiteResult {
    std::vector<CheckReport> reports;
    bool any_failed() const;
    nlohmann::json to_json() const;
};
SuiteResult run_suite(const std::vector<Scenario>& scenarios);

}  // namespace pincor

#endif
