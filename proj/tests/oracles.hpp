// Test-side oracles, independent of the library's partition recursions:
// exhaustive enumeration over contact subsets, and series constants from
// direct partial sums with integral tail brackets.
#ifndef PINCOR_TEST_ORACLES_HPP
#define PINCOR_TEST_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pincor/renewal.hpp"

namespace oracles {

// zeta(s) by partial sums plus the midpoint integral bracket.
inline double zeta(double s, std::int64_t cut = 2000000) {
    long double sum = 0.0L;
    for (std::int64_t n = cut; n >= 1; --n) sum += std::pow((long double)n, (long double)-s);
    const long double m = cut;
    const long double lo = std::pow(m + 1.0L, 1.0L - s) / (s - 1.0L);
    const long double hi = std::pow(m, 1.0L - s) / (s - 1.0L);
    return static_cast<double>(sum + 0.5L * (lo + hi));
}

struct EnumResult {
    double logz = 0.0;
    double mean_contacts = 0.0;  // polymer expectation of |S| (including N)
};

// Brute force over every contact set S with N in S: weight
// prod K(gaps) * exp(sum_{i in S} site_reward[i]).
inline EnumResult enumerate_pinned(const pincor::InterArrivalLaw& law,
                                   std::span<const double> site_reward, std::int64_t n) {
    std::vector<std::int64_t> contacts;
    long double zsum = 0.0L, csum = 0.0L;
    const std::uint64_t inner = 1ULL << (n - 1);
    for (std::uint64_t mask = 0; mask < inner; ++mask) {
        contacts.clear();
        for (std::int64_t s = 1; s < n; ++s)
            if (mask & (1ULL << (s - 1))) contacts.push_back(s);
        contacts.push_back(n);
        long double logw = 0.0L;
        std::int64_t prev = 0;
        for (const std::int64_t s : contacts) {
            logw += std::log((long double)law.k(s - prev));
            logw += site_reward[static_cast<std::size_t>(s - 1)];
            prev = s;
        }
        const long double w = std::exp(logw);
        zsum += w;
        csum += w * static_cast<long double>(contacts.size());
    }
    EnumResult r;
    r.logz = static_cast<double>(std::log(zsum));
    r.mean_contacts = static_cast<double>(csum / zsum);
    return r;
}

// Same enumeration for the disorder-averaged weights, with the pairwise
// interaction beta^2 rho evaluated term by term. `forced` restricts the sum
// to contact sets containing those positions.
inline double enumerate_annealed(const pincor::InterArrivalLaw& law,
                                 const std::function<double(std::int64_t)>& rho, double beta,
                                 double h, std::int64_t n,
                                 std::span<const std::int64_t> forced = {}) {
    std::vector<std::int64_t> contacts;
    const double b2 = beta * beta;
    long double zsum = 0.0L;
    const std::uint64_t inner = 1ULL << (n - 1);
    for (std::uint64_t mask = 0; mask < inner; ++mask) {
        contacts.clear();
        for (std::int64_t s = 1; s < n; ++s)
            if (mask & (1ULL << (s - 1))) contacts.push_back(s);
        contacts.push_back(n);
        bool ok = true;
        for (const std::int64_t f : forced)
            ok = ok && std::find(contacts.begin(), contacts.end(), f) != contacts.end();
        if (!ok) continue;
        long double logw = 0.0L;
        std::int64_t prev = 0;
        for (const std::int64_t s : contacts) {
            logw += std::log((long double)law.k(s - prev));
            prev = s;
        }
        logw += (0.5L * b2 + h) * static_cast<long double>(contacts.size());
        for (std::size_t i = 0; i < contacts.size(); ++i)
            for (std::size_t j = i + 1; j < contacts.size(); ++j)
                logw += b2 * rho(contacts[j] - contacts[i]);
        zsum += std::exp(logw);
    }
    return static_cast<double>(std::log(zsum));
}

}  // namespace oracles

#endif
