#ifndef PINCOR_MATHUTIL_HPP
#define PINCOR_MATHUTIL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace pincor {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log(sum exp(t_i)), one exp per term.
class LogSumExp {
  public:
    void add(double t) {
        if (t == kNegInf) return;
        if (t <= max_) {
            sum_ += std::exp(t - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - t) + 1.0;
            max_ = t;
        }
    }
    double value() const {
        if (sum_ == 0.0) return kNegInf;
        return max_ + std::log(sum_);
    }

  private:
    double max_ = kNegInf;
    double sum_ = 0.0;
};

inline double log_sum_exp(std::span<const double> xs) {
    LogSumExp acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
    std::size_t n = 0;
};

inline MeanSe mean_se(std::span<const double> xs) {
    MeanSe r;
    r.n = xs.size();
    if (r.n == 0) return r;
    double s = 0.0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(r.n);
    if (r.n > 1) {
        double ss = 0.0;
        for (double x : xs) {
            const double d = x - r.mean;
            ss += d * d;
        }
        r.se = std::sqrt(ss / (static_cast<double>(r.n) * static_cast<double>(r.n - 1)));
    }
    return r;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double d = static_cast<double>(n) * sxx - sx * sx;
    LineFit f;
    f.slope = (static_cast<double>(n) * sxy - sx * sy) / d;
    f.intercept = (sy - f.slope * sx) / static_cast<double>(n);
    return f;
}

// Standard normal upper tail and its log.
inline double normal_upper_tail(double x) { return 0.5 * std::erfc(x * 0.7071067811865475244); }
inline double log_normal_upper_tail(double x) {
    // erfc underflows past ~ x = 37; asymptotic expansion takes over there.
    if (x < 36.0) return std::log(normal_upper_tail(x));
    return -0.5 * x * x - std::log(x) - 0.9189385332046727418;
}

// Inverse standard normal CDF (Acklam's rational approximation plus one
// Halley refinement; ~1e-15 relative over (0,1)).
inline double normal_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= phigh) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        const double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    // Halley step against erfc.
    const double e = 0.5 * std::erfc(-x * 0.7071067811865475244) - p;
    const double u = e * 2.5066282746310002 * std::exp(0.5 * x * x);
    x = x - u / (1 + 0.5 * x * u);
    return x;
}

// Adaptive Simpson quadrature.
namespace detail {
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// sum_{n=0..n_hi} values[n] e^{-bn}, compensated; the decay factor is rebuilt
// from exp() every 4096 steps so multiplicative drift stays below ~5e-13, and
// the sum is cut once the factor underflows past 1e-280.
inline double exp_weighted_sum(std::span<const double> values, double b, std::int64_t n_hi) {
    const double r = std::exp(-b);
    double total = 0.0, comp = 0.0;
    double factor = 1.0;
    for (std::int64_t n = 0; n <= n_hi; ++n) {
        if ((n & 4095) == 0) factor = std::exp(-b * static_cast<double>(n));
        const double y = values[static_cast<std::size_t>(n)] * factor - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
        if (factor < 1e-280) break;
        factor *= r;
    }
    return total;
}

// A series tail estimate carrying a certified error bound.
struct TailEstimate {
    double value = 0.0;
    double error_bound = 0.0;
    double upper() const { return value + error_bound; }
    double lower() const { return std::max(0.0, value - error_bound); }
};

// Euler-Maclaurin tail of sum_{k > K} (1+k)^(-a) for a > 1.
inline TailEstimate power_tail(double a, double K) {
    const double x = 1.0 + (K + 1.0);  // integrand variable at first omitted term
    const double g = std::pow(x, -a);
    TailEstimate t;
    t.value = std::pow(x, 1.0 - a) / (a - 1.0) + 0.5 * g + a * std::pow(x, -a - 1.0) / 12.0;
    t.error_bound = a * (a + 1.0) * (a + 2.0) * std::pow(x, -a - 3.0) / 720.0 + 1e-300;
    return t;
}

// Euler-Maclaurin tail of sum_{k > K} k * (1+k)^(-a) for a > 2.
inline TailEstimate power_tail_weighted(double a, double K) {
    const double m = K + 1.0;  // first omitted index
    auto g = [a](double x) { return x * std::pow(1.0 + x, -a); };
    // integral of x (1+x)^-a from m to infinity (substitute y = 1+x)
    const double y = 1.0 + m;
    const double integral =
        std::pow(y, 2.0 - a) / (a - 2.0) - std::pow(y, 1.0 - a) / (a - 1.0);
    const double gp = std::pow(1.0 + m, -a) - a * m * std::pow(1.0 + m, -a - 1.0);
    TailEstimate t;
    t.value = integral + 0.5 * g(m) - gp / 12.0;
    t.error_bound = std::abs(gp) / 60.0 + 1e-300;  // coarse bound on the next term
    return t;
}

}  // namespace pincor

#endif
