#include "pincor/gaussenv.hpp"

#include <algorithm>
#include <cmath>

#include "pincor/mathutil.hpp"
#include "pincor/rng.hpp"

namespace pincor {

namespace {
constexpr double kTwoPi = 6.283185307179586477;

double kahan_rho_sum(const CorrelationSpec& spec, std::int64_t hi,
                     const std::function<double(std::int64_t)>& weight) {
    double total = 0.0, comp = 0.0;
    for (std::int64_t k = 1; k <= hi; ++k) {
        const double y = weight(k) * spec.rho(k) - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    return total;
}
}  // namespace

CorrelationSpec CorrelationSpec::shifted_power(double a) {
    if (!(a > 0.0)) throw usage_error("correlation decay exponent a must be > 0");
    CorrelationSpec s;
    s.family = Family::ShiftedPower;
    s.a = a;
    return s;
}

CorrelationSpec CorrelationSpec::truncated_power(double a, std::int64_t m) {
    if (!(a > 0.0)) throw usage_error("correlation decay exponent a must be > 0");
    if (m < 0) throw usage_error("truncation lag m must be >= 0");
    CorrelationSpec s;
    s.family = Family::TruncatedPower;
    s.a = a;
    s.m = m;
    return s;
}

double CorrelationSpec::rho(std::int64_t k) const {
    if (k == 0) return 1.0;
    switch (family) {
        case Family::Iid: return 0.0;
        case Family::ShiftedPower: return std::pow(1.0 + static_cast<double>(k), -a);
        case Family::TruncatedPower:
            return k <= m ? std::pow(1.0 + static_cast<double>(k), -a) : 0.0;
    }
    return 0.0;
}

bool CorrelationSpec::absolutely_summable() const {
    if (family == Family::ShiftedPower) return a > 1.0;
    return true;
}

double CorrelationSpec::sum_rho() const {
    switch (family) {
        case Family::Iid: return 0.0;
        case Family::TruncatedPower:
            return kahan_rho_sum(*this, m, [](std::int64_t) { return 1.0; });
        case Family::ShiftedPower: {
            if (!(a > 1.0)) throw error("correlations not summable (a <= 1)");
            const std::int64_t cut = 100000;
            const double partial = kahan_rho_sum(*this, cut, [](std::int64_t) { return 1.0; });
            return partial + power_tail(a, static_cast<double>(cut)).value;
        }
    }
    return 0.0;
}

double CorrelationSpec::sum_k_rho() const {
    switch (family) {
        case Family::Iid: return 0.0;
        case Family::TruncatedPower:
            return kahan_rho_sum(*this, m,
                                 [](std::int64_t k) { return static_cast<double>(k); });
        case Family::ShiftedPower: {
            if (!(a > 2.0)) throw error("correlation tail not summable against k (needs a > 2)");
            const std::int64_t cut = 100000;
            const double partial =
                kahan_rho_sum(*this, cut, [](std::int64_t k) { return static_cast<double>(k); });
            return partial + power_tail_weighted(a, static_cast<double>(cut)).value;
        }
    }
    return 0.0;
}

std::string CorrelationSpec::label() const {
    switch (family) {
        case Family::Iid: return "iid";
        case Family::ShiftedPower: return "shifted_power(a=" + std::to_string(a) + ")";
        case Family::TruncatedPower:
            return "truncated_power(a=" + std::to_string(a) + ",m=" + std::to_string(m) + ")";
    }
    return "?";
}

double upsilon_infty(const CorrelationSpec& spec) {
    if (spec.family == CorrelationSpec::Family::ShiftedPower && !(spec.a > 1.0))
        throw error("Upsilon_infty infinite (correlations not summable)");
    return 1.0 + 2.0 * spec.sum_rho();
}

SzegoMin szego_symbol_min(const CorrelationSpec& spec, std::int64_t l_grid) {
    if (l_grid < 8) throw usage_error("symbol grid too coarse");
    std::int64_t terms = 0;
    double tail = 0.0;
    switch (spec.family) {
        case CorrelationSpec::Family::Iid: terms = 0; break;
        case CorrelationSpec::Family::TruncatedPower: terms = spec.m; break;
        case CorrelationSpec::Family::ShiftedPower: {
            if (!(spec.a > 1.0)) throw error("symbol not absolutely convergent (a <= 1)");
            terms = 100000;
            tail = 2.0 * power_tail(spec.a, static_cast<double>(terms)).upper();
            break;
        }
    }

    SzegoMin out;
    out.tail = tail;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    // f is even around pi, so scanning [0, pi] covers the full circle.
    for (std::int64_t j = 0; j <= l_grid / 2; ++j) {
        const double lambda = kTwoPi * static_cast<double>(j) / static_cast<double>(l_grid);
        // Chebyshev recurrence for cos(k lambda)
        const double c1 = std::cos(lambda);
        double ckm1 = 1.0, ck = c1, f = 1.0;
        for (std::int64_t k = 1; k <= terms; ++k) {
            f += 2.0 * spec.rho(k) * ck;
            const double next = 2.0 * c1 * ck - ckm1;
            ckm1 = ck;
            ck = next;
        }
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    out.grid_min = lo;
    out.grid_max = hi;
    out.certified_lower = lo - tail;
    out.certified_upper = hi + tail;
    return out;
}

ToeplitzCov::ToeplitzCov(const CorrelationSpec& spec, std::int64_t l) : spec_(spec), l_(l) {
    if (l < 1) throw usage_error("covariance dimension must be >= 1");
    first_row_.resize(static_cast<std::size_t>(l));
    for (std::int64_t k = 0; k < l; ++k) first_row_[static_cast<std::size_t>(k)] = spec.rho(k);

    chol_ = dense();
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(chol_);  // factors in place
    if (llt.info() != Eigen::Success)
        throw error("spec not positive definite at dimension l (Cholesky failed)");
    // only the lower triangle of chol_ is meaningful from here on
}

Eigen::MatrixXd ToeplitzCov::dense() const {
    Eigen::MatrixXd m(l_, l_);
    for (std::int64_t i = 0; i < l_; ++i)
        for (std::int64_t j = 0; j < l_; ++j)
            m(i, j) = first_row_[static_cast<std::size_t>(std::abs(i - j))];
    return m;
}

EnvSample sample_environment(const ToeplitzCov& cov, std::uint64_t seed) {
    NormalStream ns(seed);
    const std::int64_t l = cov.l();
    Eigen::VectorXd g(l);
    for (std::int64_t i = 0; i < l; ++i) g[i] = ns.next();
    Eigen::VectorXd w = cov.chol().triangularView<Eigen::Lower>() * g;
    EnvSample env;
    env.seed = seed;
    env.spec = cov.spec();
    env.values.assign(w.data(), w.data() + l);
    return env;
}

double inverse_quadratic_form(const ToeplitzCov& cov) {
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(cov.l());
    Eigen::VectorXd y = cov.chol().triangularView<Eigen::Lower>().solve(ones);
    return y.squaredNorm();
}

double shift_entropy(const ToeplitzCov& cov, double shift_per_site) {
    return 0.5 * shift_per_site * shift_per_site * inverse_quadratic_form(cov);
}

PerronPair perron_eigen(const CorrelationSpec& spec, std::int64_t l) {
    if (l < 1) throw usage_error("dimension must be >= 1");
    std::vector<double> row(static_cast<std::size_t>(l));
    for (std::int64_t k = 0; k < l; ++k) {
        row[static_cast<std::size_t>(k)] = spec.rho(k);
        if (row[static_cast<std::size_t>(k)] < 0.0)
            throw error("Perron-Frobenius requires nonnegative matrix");
    }

    auto matvec = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd w(l);
        for (std::int64_t i = 0; i < l; ++i) {
            double s = 0.0;
            for (std::int64_t j = 0; j < l; ++j)
                s += row[static_cast<std::size_t>(std::abs(i - j))] * v[j];
            w[i] = s;
        }
        return w;
    };

    Eigen::VectorXd v = Eigen::VectorXd::Ones(l);
    double mu = 1.0;
    for (int it = 0; it < 100000; ++it) {
        Eigen::VectorXd w = matvec(v);
        mu = v.dot(w) / v.squaredNorm();
        const double resid = (w - mu * v).lpNorm<Eigen::Infinity>();
        v = w / w.lpNorm<Eigen::Infinity>();
        if (resid <= 1e-10 * mu && it > 2) {
            PerronPair p;
            p.mu = mu;
            p.u = v / v.minCoeff();
            return p;
        }
    }
    throw error("power iteration did not converge");
}

ProbEstimate prob_all_above(const ToeplitzCov& cov, double A, std::int64_t budget,
                            std::uint64_t seed, const ProbAllAboveOptions& opts) {
    if (budget < 1000) throw usage_error("prob_all_above budget must be >= 1000");
    const std::int64_t l = cov.l();
    const PerronPair pp = perron_eigen(cov.spec(), l);

    // w = L^T Upsilon^{-1} U = (L^T U)/mu; |w|^2 = <Upsilon^{-1} U, U>.
    Eigen::VectorXd w = cov.chol().transpose().triangularView<Eigen::Upper>() * pp.u / pp.mu;
    const double q = w.squaredNorm();
    const Eigen::VectorXd vhat = w / w.norm();
    const double sq = std::sqrt(q);

    auto shifted_event_rate = [&](double B, std::uint64_t s, int n) {
        NormalStream ns(s);
        Eigen::MatrixXd g(l, n);
        for (int i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < l; ++j) g(j, i) = ns.next();
        Eigen::MatrixXd omega = cov.chol().triangularView<Eigen::Lower>() * g;
        int hits = 0;
        for (int i = 0; i < n; ++i)
            if ((omega.col(i) + B * pp.u).minCoeff() >= A) ++hits;
        return static_cast<double>(hits) / n;
    };

    // Shift selection: the proof recipe B = 2(A v C sqrt(log l)) oversamples
    // the event and blows up the weight variance, so by default a pilot tunes
    // B until the shifted measure hits the event at a moderate rate.
    double B;
    double rate = -1.0;
    if (opts.shift) {
        B = *opts.shift;
    } else {
        const int pilot_n = l > 1024 ? 160 : 320;
        B = std::max(A, 0.0) + 0.75;
        for (int it = 0; it < 24; ++it) {
            rate = shifted_event_rate(B, split_seed(seed, 0xfeed0000ULL + it), pilot_n);
            if (rate < 0.25)
                B *= (rate == 0.0) ? 1.6 : 1.2;
            else if (rate > 0.92)
                B /= 1.15;
            else
                break;
        }
    }

    const int R = std::max(8, opts.batches);
    const int S = std::max(1, opts.strata);
    const std::int64_t per_stratum =
        std::max<std::int64_t>(1, budget / (static_cast<std::int64_t>(R) * S));
    const std::int64_t per_batch = per_stratum * S;

    std::vector<double> batch_log(R, kNegInf);
    std::int64_t total_samples = 0;
    std::int64_t hits = 0;
    Eigen::MatrixXd g(l, per_batch);
    std::vector<double> tval(static_cast<std::size_t>(per_batch));
    for (int b = 0; b < R; ++b) {
        NormalStream ns(split_seed(seed, static_cast<std::uint64_t>(b) + 1));
        // One column per sample; the dominant-mode coordinate v^T g is pinned
        // to its stratified value t before the (batched) L g product.
        std::int64_t col = 0;
        for (int j = 0; j < S; ++j) {
            for (std::int64_t i = 0; i < per_stratum; ++i, ++col) {
                const double u = ns.raw().next_uniform();
                const double p = std::min((static_cast<double>(j) + u) / S, 1.0 - 1e-16);
                const double t = normal_quantile(p);
                for (std::int64_t k = 0; k < l; ++k) g(k, col) = ns.next();
                g.col(col) += (t - vhat.dot(g.col(col))) * vhat;
                tval[static_cast<std::size_t>(col)] = t;
            }
        }
        Eigen::MatrixXd omega = cov.chol().triangularView<Eigen::Lower>() * g;
        LogSumExp acc;
        for (col = 0; col < per_batch; ++col) {
            ++total_samples;
            if ((omega.col(col) + B * pp.u).minCoeff() >= A) {
                ++hits;
                acc.add(-0.5 * B * B * q - B * sq * tval[static_cast<std::size_t>(col)]);
            }
        }
        batch_log[b] = acc.value() - std::log(static_cast<double>(per_batch));
    }

    ProbEstimate est;
    est.shift = B;
    est.batches = R;
    est.samples = total_samples;
    est.shifted_event_rate = static_cast<double>(hits) / total_samples;

    const double m = *std::max_element(batch_log.begin(), batch_log.end());
    if (m == kNegInf) throw error("no successes in prob_all_above (shift too small?)");
    double sx = 0.0, sxx = 0.0;
    for (double bl : batch_log) {
        const double x = std::exp(bl - m);
        sx += x;
        sxx += x * x;
    }
    const double mean = sx / R;
    const double var = std::max(0.0, (sxx - R * mean * mean) / (R - 1.0));
    est.log_p = m + std::log(mean);
    est.log_se = std::sqrt(var / R) / mean;
    return est;
}

}  // namespace pincor
