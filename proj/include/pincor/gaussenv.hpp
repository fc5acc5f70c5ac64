#ifndef PINCOR_GAUSSENV_HPP
#define PINCOR_GAUSSENV_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pincor/errors.hpp"

namespace pincor {

// Correlation function rho_k of the stationary Gaussian environment.
// ShiftedPower is the exact family rho_k = (1+k)^(-a) (convex, hence a valid
// correlation function); TruncatedPower zeroes it beyond lag m so the
// environment matches the finite-memory annealed transfer model exactly.
struct CorrelationSpec {
    enum class Family { Iid, ShiftedPower, TruncatedPower };
    Family family = Family::Iid;
    double a = 0.0;
    std::int64_t m = 0;  // TruncatedPower only

    double rho(std::int64_t k) const;
    bool nonnegative() const { return true; }  // all three families
    bool absolutely_summable() const;

    // sum_{k>=1} rho_k, certified tail <= 1e-10; throws for a <= 1 untruncated.
    double sum_rho() const;
    // sum_{k>=1} k rho_k; throws when not summable (untruncated a <= 2).
    double sum_k_rho() const;

    std::string label() const;

    static CorrelationSpec iid() { return {}; }
    static CorrelationSpec shifted_power(double a);
    static CorrelationSpec truncated_power(double a, std::int64_t m);
};

// Upsilon_infty = 1 + 2 sum rho_k; infinite (throws) when a <= 1.
double upsilon_infty(const CorrelationSpec& spec);

// Minimum of the Szego symbol f(lambda) = 1 + 2 sum rho_k cos(k lambda) over
// a uniform grid, with the series-truncation tail subtracted to give a
// certified lower bound. The symbol minimum controls invertibility of the
// Toeplitz covariance.
struct SzegoMin {
    double grid_min = 0.0;
    double certified_lower = 0.0;  // grid_min - truncation tail
    double tail = 0.0;
    double grid_max = 0.0;
    double certified_upper = 0.0;
};
SzegoMin szego_symbol_min(const CorrelationSpec& spec, std::int64_t l_grid = 2048);

// Dense covariance restriction Upsilon_l with its cached Cholesky factor.
// Immutable after construction and shareable across threads.
class ToeplitzCov {
  public:
    ToeplitzCov(const CorrelationSpec& spec, std::int64_t l);

    const CorrelationSpec& spec() const { return spec_; }
    std::int64_t l() const { return l_; }
    const std::vector<double>& first_row() const { return first_row_; }
    const Eigen::MatrixXd& chol() const { return chol_; }

    Eigen::MatrixXd dense() const;  // reconstructs Upsilon_l (tests, diagnostics)

  private:
    CorrelationSpec spec_;
    std::int64_t l_;
    std::vector<double> first_row_;
    Eigen::MatrixXd chol_;  // lower triangular L with L L^T = Upsilon_l
};

// One environment realization with its seed provenance; regenerating from
// (seed, spec, l) reproduces the values bit-for-bit.
struct EnvSample {
    std::vector<double> values;
    std::uint64_t seed = 0;
    CorrelationSpec spec;
};

EnvSample sample_environment(const ToeplitzCov& cov, std::uint64_t seed);

// <Upsilon_l^{-1} 1_l, 1_l> via one triangular solve (= |L^{-1} 1|^2).
double inverse_quadratic_form(const ToeplitzCov& cov);

// Relative entropy of the environment shifted by a constant per site:
// H = shift^2 / 2 * <Upsilon^{-1} 1, 1>.
double shift_entropy(const ToeplitzCov& cov, double shift_per_site);

// Dominant eigenpair of Upsilon_l by power iteration, eigenvector normalized
// to min component 1 (requires nonnegative correlations).
struct PerronPair {
    double mu = 0.0;
    Eigen::VectorXd u;
};
PerronPair perron_eigen(const CorrelationSpec& spec, std::int64_t l);

// Importance-sampled estimate of log P(forall i, omega_i >= A): sampling is
// shifted by B*U along the Perron eigenvector and reweighted by the exact
// Gaussian likelihood ratio exp(-B <Y^-1 U, w> + B^2 <Y^-1 U, U>/2). The
// dominant-mode coordinate is stratified, and the CI comes from a delta
// method over independent batches on the log scale.
struct ProbAllAboveOptions {
    std::optional<double> shift;     // B; default auto-tunes a pilot
    int batches = 32;
    int strata = 64;
};
struct ProbEstimate {
    double log_p = 0.0;
    double log_se = 0.0;      // standard error on the log scale
    double shift = 0.0;       // B actually used
    double shifted_event_rate = 0.0;
    int batches = 0;
    std::int64_t samples = 0;
};
ProbEstimate prob_all_above(const ToeplitzCov& cov, double A, std::int64_t budget,
                            std::uint64_t seed, const ProbAllAboveOptions& opts = {});

}  // namespace pincor

#endif
