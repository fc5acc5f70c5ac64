#include "pincor/renewal.hpp"

#include <algorithm>
#include <cmath>

#include "pincor/mathutil.hpp"
#include "pincor/pinned_dp.hpp"

namespace pincor {

namespace {

constexpr double kE = 2.718281828459045235;
constexpr double kPi = 3.141592653589793238;

// Compensated sum of f(n) over n in [from, to].
template <typename F>
double kahan_sum(std::int64_t from, std::int64_t to, F&& f) {
    double total = 0.0, comp = 0.0;
    for (std::int64_t n = from; n <= to; ++n) {
        const double y = f(n) - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    return total;
}

// Tail sum_{n > m0} phi(n) n^{-s} by Euler-Maclaurin: integral + g/2 - g'/12,
// with the remainder bounded by a generous multiple of the next term.
TailEstimate law_tail(double alpha, const SlowVar& sv, std::int64_t m0) {
    const double s = 1.0 + alpha;
    const double m = static_cast<double>(m0) + 1.0;
    auto g = [&](double x) { return sv(x) * std::pow(x, -s); };

    double integral = 0.0, integral_err = 0.0;
    if (sv.kind == SlowVar::Kind::Constant) {
        integral = std::pow(m, 1.0 - s) / (s - 1.0);
    } else if (alpha > 0.0) {
        // x = m e^t  =>  int = m^{1-s} int_0^inf phi(m e^t) e^{-alpha t} dt
        const double t_hi = std::min(1e4, (45.0 + 12.0 * std::abs(sv.gamma)) / alpha);
        const double rough = sv(m) * std::pow(m, -alpha) / alpha;
        integral = std::pow(m, 1.0 - s) *
                   integrate([&](double t) { return sv(m * std::exp(t)) * std::exp(-alpha * t); },
                             0.0, t_hi, std::max(rough, 1e-300) * 1e-13);
        integral_err = rough * 1e-11;
    } else {
        // alpha = 0, phi = log^gamma with gamma < -1. Substituting
        // y = log(e+x) gives int y^gamma dy plus an exponentially small
        // correction int y^gamma e^{1-y}/(1-e^{1-y}) dy.
        const double y0 = std::log(kE + m);
        const double main = std::pow(y0, sv.gamma + 1.0) / (-1.0 - sv.gamma);
        const double corr =
            integrate([&](double y) { return std::pow(y, sv.gamma) * std::exp(1.0 - y) /
                                             (-std::expm1(1.0 - y)); },
                      y0, y0 + 60.0, std::max(main, 1e-300) * 1e-14);
        integral = main + corr;
        integral_err = main * 1e-13 + std::abs(corr) * 1e-6;
    }

    const double phi_m = sv(m);
    const double dphi_m = (sv.kind == SlowVar::Kind::LogPower)
                              ? sv.gamma * std::pow(std::log(kE + m), sv.gamma - 1.0) / (kE + m)
                              : 0.0;
    const double gp = dphi_m * std::pow(m, -s) - s * phi_m * std::pow(m, -s - 1.0);

    TailEstimate t;
    t.value = integral + 0.5 * g(m) - gp / 12.0;
    const double c3 = std::pow(s + 3.0 + std::abs(sv.gamma), 3.0);
    t.error_bound = integral_err + g(m) / (m * m * m) * c3 + 1e-300;
    return t;
}

}  // namespace

double SlowVar::operator()(double x) const {
    if (kind == Kind::Constant) return 1.0;
    return std::pow(std::log(kE + x), gamma);
}

double SlowVar::log_phi(double x) const {
    if (kind == Kind::Constant) return 0.0;
    return gamma * std::log(std::log(kE + x));
}

std::string SlowVar::label() const {
    if (kind == Kind::Constant) return "const";
    return "log^" + std::to_string(gamma);
}

double InterArrivalLaw::log_k(std::int64_t n) const {
    return std::log(mass[static_cast<std::size_t>(n)]);
}

double InterArrivalLaw::log_k_extended(double x) const {
    return std::log(normalization) + slow_var.log_phi(x) - (1.0 + alpha) * std::log(x);
}

InterArrivalLaw::Laplace InterArrivalLaw::hat_k(double b) const {
    if (!(b > 0.0)) throw usage_error("hat K requires b > 0");
    Laplace out;
    out.value = exp_weighted_sum(mass, b, n_max);
    out.truncation_bound = std::exp(-b * static_cast<double>(n_max)) * tail_bound;
    return out;
}

double InterArrivalLaw::mean_gap() const {
    if (!(alpha > 1.0)) throw error("mean gap infinite for alpha <= 1");
    const double partial = kahan_sum(1, n_max, [&](std::int64_t n) {
        return static_cast<double>(n) * mass[static_cast<std::size_t>(n)];
    });
    // tail of sum n K(n): n * phi(n) n^{-(1+alpha)} = phi(n) n^{-alpha}
    const TailEstimate t = law_tail(alpha - 1.0, slow_var, n_max);
    return partial + normalization * t.value;
}

std::string InterArrivalLaw::label() const {
    return "alpha=" + std::to_string(alpha) + ",phi=" + slow_var.label();
}

LawPtr build_law(double alpha, SlowVar slow_var, std::int64_t n_max) {
    if (!(alpha >= 0.0)) throw usage_error("alpha must be >= 0");
    if (n_max < 16) throw usage_error("n_max must be >= 16");
    const bool summable =
        alpha > 0.0 || (slow_var.kind == SlowVar::Kind::LogPower && slow_var.gamma < -1.0);
    if (!summable) throw error("law not normalizable");

    auto law = std::make_shared<InterArrivalLaw>();
    law->alpha = alpha;
    law->slow_var = slow_var;
    law->n_max = n_max;

    const double s = 1.0 + alpha;
    const std::int64_t m_norm = std::max<std::int64_t>(n_max, 1 << 20);
    auto g = [&](std::int64_t n) {
        const double x = static_cast<double>(n);
        return slow_var(x) * std::pow(x, -s);
    };

    // One compensated pass: raw masses up to n_max, partial sums at n_max
    // and at the normalization horizon.
    law->mass.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    double total = 0.0, comp = 0.0, sum_cache = 0.0;
    for (std::int64_t n = 1; n <= m_norm; ++n) {
        const double gn = g(n);
        if (n <= n_max) law->mass[static_cast<std::size_t>(n)] = gn;
        const double y = gn - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
        if (n == n_max) sum_cache = total;
    }

    const TailEstimate tail = law_tail(alpha, slow_var, m_norm);
    const double c = total + tail.value;
    law->normalization = 1.0 / c;
    for (auto& v : law->mass) v /= c;

    // Mass beyond the cache, by exact complement plus the certified slack of
    // the normalization constant.
    law->tail_bound = (c - sum_cache + 2.0 * tail.error_bound) / c;
    law->tail_warning = law->tail_bound >= 1e-9;
    return law;
}

RenewalMass renewal_mass(const LawPtr& law, std::int64_t n) {
    if (n > law->n_max) throw error("renewal mass horizon exceeds law cache (n > n_max)");
    RenewalMass out;
    out.law = law;
    out.u.assign(static_cast<std::size_t>(n) + 1, 0.0);
    out.u[0] = 1.0;
    for (std::int64_t j = 1; j <= n; ++j)
        out.u[static_cast<std::size_t>(j)] =
            pinned_conv(law->mass, out.u, static_cast<std::size_t>(j));
    return out;
}

InterArrivalLaw::Laplace laplace_renewal(const RenewalMass& mass, double b) {
    if (!(b > 0.0)) throw usage_error("hat P requires b > 0 (diverges at b = 0)");
    const std::int64_t n = static_cast<std::int64_t>(mass.n());
    InterArrivalLaw::Laplace out;
    out.value = exp_weighted_sum(mass.u, b, n);
    out.truncation_bound = std::exp(-b * static_cast<double>(n)) / (-std::expm1(-b));
    return out;
}

double homogeneous_free_energy(const RenewalMass& mass, double h, double tol) {
    if (!(tol > 0.0)) throw usage_error("tol must be > 0");
    if (h <= 0.0) return 0.0;

    const InterArrivalLaw& law = *mass.law;
    const double target = std::exp(-h);  // hat K(F) = e^{-h}

    double lo = 1e-12;
    if (law.hat_k(lo).value <= target) return lo;  // root below resolution
    double hi = 1e-3;
    while (law.hat_k(hi).value > target) {
        hi *= 2.0;
        if (hi > 1e4) throw error("free-energy bracket not found");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (law.hat_k(mid).value > target ? lo : hi) = mid;
    }
    const double b = 0.5 * (lo + hi);

    // Residual check against the hat P form of the same equation.
    const auto hp = laplace_renewal(mass, b);
    const double want = 1.0 / (-std::expm1(-h));
    if (std::abs(hp.value - want) > tol * want + hp.truncation_bound)
        throw error("free-energy root residual exceeds tolerance");
    return b;
}

PartitionTrace homogeneous_partition_dp(const LawPtr& law, double h, std::int64_t n) {
    if (n > law->n_max) throw error("partition horizon exceeds law cache (n > n_max)");
    PartitionTrace tr;
    tr.logz = ScaledPinnedDp::run(law->mass, static_cast<std::size_t>(n),
                                  [h](std::size_t) { return h; });
    tr.context = "homogeneous(" + law->label() + ",h=" + std::to_string(h) + ")";
    return tr;
}

RenewalSum renewal_sum_asymptote(const RenewalMass& mass, std::int64_t n) {
    const InterArrivalLaw& law = *mass.law;
    const double alpha = law.alpha;
    if (alpha == 0.0 || alpha == 1.0)
        throw error("renewal sum asymptote unsupported for alpha in {0, 1}");
    if (n > static_cast<std::int64_t>(mass.n())) throw error("n exceeds computed renewal mass");

    RenewalSum out;
    out.sum = kahan_sum(0, n, [&](std::int64_t j) { return mass.u[static_cast<std::size_t>(j)]; });
    const double x = static_cast<double>(n);
    if (alpha < 1.0) {
        // tilde_phi(n) = sin(pi alpha)/pi * 1/phi(n), phi the full tail factor
        const double phi_full = law.normalization * law.slow_var(x);
        out.asymptote = std::sin(kPi * alpha) / (kPi * phi_full) * std::pow(x, alpha);
    } else {
        out.asymptote = x / law.mean_gap();
    }
    return out;
}

}  // namespace pincor
