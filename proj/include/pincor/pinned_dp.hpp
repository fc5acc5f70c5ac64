#ifndef PINCOR_PINNED_DP_HPP
#define PINCOR_PINNED_DP_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pincor/errors.hpp"

namespace pincor {

// Convolution sum_{k=1}^{n} mass[k] * w[n-k], accumulated in blocks of 64
// with a compensated cross-block sum so the result is within a few ulp of
// the exact value (the renewal-recursion residual tests rely on this).
inline double pinned_conv(std::span<const double> mass, std::span<const double> w, std::size_t n,
                          std::size_t k_min = 1, std::size_t k_max = SIZE_MAX) {
    double total = 0.0, comp = 0.0;
    std::size_t k = k_min;
    const std::size_t k_hi = std::min(n, k_max);
    while (k <= k_hi) {
        const std::size_t stop = std::min(k_hi, k + 63);
        double block = 0.0;
        for (; k <= stop; ++k) block += mass[k] * w[n - k];
        const double y = block - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    return total;
}

// Pinned partition recursion Z_n = e^{s_n} sum_k K(k) Z_{n-k}, Z_0 = 1, in a
// scaled linear representation: the working array keeps Z_n * 2^{T}; when a
// freshly written entry leaves [2^-664, 2^664] every entry is rescaled by a
// power of two (exact) and T adjusted. log Z_n is recorded at write time,
// when its entry is guaranteed in range. Entries that later underflow to 0
// contribute less than 1e-190 relative to in-range ones, below double
// resolution of the sums they enter.
class ScaledPinnedDp {
  public:
    // site_log_weight(n) = log of the per-contact factor at site n (1-based).
    template <typename F>
    static std::vector<double> run(std::span<const double> mass, std::size_t n_sites,
                                   F&& site_log_weight) {
        std::vector<double> w(n_sites + 1), logz(n_sites + 1);
        w[0] = 1.0;
        logz[0] = 0.0;
        int t_bits = 0;
        for (std::size_t n = 1; n <= n_sites; ++n) {
            const double conv = pinned_conv(mass, w, n);
            const double s = site_log_weight(n);
            double z = conv * std::exp(s);
            if (!(z > 0.0) || !std::isfinite(z)) {
                if (z == 0.0 || !std::isfinite(s))
                    throw error("pinned partition underflowed to zero; site weights out of range");
                throw error("pinned partition overflowed; site weights out of range");
            }
            if (z > 0x1.0p664 || z < 0x1.0p-664) {
                const int shift = -std::ilogb(z);
                const double f = std::ldexp(1.0, shift);
                for (std::size_t j = 0; j < n; ++j) w[j] *= f;
                z *= f;
                t_bits += shift;
            }
            w[n] = z;
            logz[n] = std::log(z) - static_cast<double>(t_bits) * 0.6931471805599453094;
        }
        return logz;
    }
};

}  // namespace pincor

#endif
