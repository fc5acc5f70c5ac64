#ifndef PINCOR_RENEWAL_HPP
#define PINCOR_RENEWAL_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pincor/types.hpp"

namespace pincor {

// Slowly varying factor of the inter-arrival law: phi(n) = 1 or log(e+n)^gamma.
struct SlowVar {
    enum class Kind { Constant, LogPower };
    Kind kind = Kind::Constant;
    double gamma = 0.0;

    double operator()(double x) const;
    double log_phi(double x) const;
    std::string label() const;

    static SlowVar constant() { return {}; }
    static SlowVar log_power(double g) { return {Kind::LogPower, g}; }
};

// Heavy-tailed inter-arrival distribution K(n) = A * phi(n) / n^(1+alpha),
// normalized so the renewal is recurrent (sum K = 1). `mass` caches K(n) for
// n = 1..n_max; `tail_bound` is an upper bound on the mass beyond the cache.
struct InterArrivalLaw {
    double alpha = 0.5;
    SlowVar slow_var;
    std::vector<double> mass;      // mass[0] unused (= 0)
    double normalization = 0.0;    // A above: K(n) * n^(1+alpha) / phi(n)
    std::int64_t n_max = 0;
    double tail_bound = 0.0;
    bool tail_warning = false;     // set when tail_bound >= 1e-9

    double k(std::int64_t n) const { return mass[static_cast<std::size_t>(n)]; }
    double log_k(std::int64_t n) const;
    // Analytic continuation of log K to real arguments; exact for this
    // parametric family, valid far beyond the cache horizon.
    double log_k_extended(double x) const;

    // hat K(b) = sum_n e^{-bn} K(n); `bound` covers truncation beyond n_max.
    struct Laplace {
        double value = 0.0;
        double truncation_bound = 0.0;
    };
    Laplace hat_k(double b) const;

    // E[tau_1] = sum n K(n), finite only for alpha > 1.
    double mean_gap() const;

    std::string label() const;
};

using LawPtr = std::shared_ptr<const InterArrivalLaw>;

// Builds the normalized law. Throws "law not normalizable" when the defining
// series diverges (alpha = 0 with phi constant, or log exponent >= -1).
LawPtr build_law(double alpha, SlowVar slow_var, std::int64_t n_max);

// Renewal mass function u[n] = P(n in tau), u[0] = 1, via the exact
// recursion u[n] = sum_{k<=n} K(k) u[n-k].
struct RenewalMass {
    std::vector<double> u;
    LawPtr law;

    std::size_t n() const { return u.size() - 1; }
};

RenewalMass renewal_mass(const LawPtr& law, std::int64_t n);

// hat P(b) = sum_{n>=0} e^{-bn} u[n], b > 0, truncated at the cached horizon
// with the geometric remainder bound e^{-bN}/(1-e^{-b}) reported.
InterArrivalLaw::Laplace laplace_renewal(const RenewalMass& mass, double b);

// Free energy of the homogeneous model: the root of hat P(b) = 1/(1-e^{-h})
// (equivalently hat K(b) = e^{-h}), and 0 for h <= 0. Bisection on a
// bracket located by doubling; tol is the relative residual target.
double homogeneous_free_energy(const RenewalMass& mass, double h, double tol = 1e-10);

// log Z_n for the homogeneous model (beta = 0), pinned at n.
PartitionTrace homogeneous_partition_dp(const LawPtr& law, double h, std::int64_t n);

// Partial sum of the renewal mass together with the predicted asymptote
// tilde_phi(N) N^{min(alpha,1)}; alpha = 0 and alpha = 1 are refused.
struct RenewalSum {
    double sum = 0.0;
    double asymptote = 0.0;
    double ratio() const { return sum / asymptote; }
};

RenewalSum renewal_sum_asymptote(const RenewalMass& mass, std::int64_t n);

}  // namespace pincor

#endif
