#include "pincor/annealed.hpp"

#include <algorithm>
#include <cmath>

#include "pincor/mathutil.hpp"
#include "pincor/pinned_dp.hpp"
#include "pincor/rng.hpp"

namespace pincor {

namespace {
constexpr double kLn2 = 0.6931471805599453094;

void check_transfer_pre(const AnnealedConfig& c) {
    if (!c.truncated()) throw error("transfer mode requires a finite truncation m");
    if (c.m > 20) throw error("state-space overflow: truncation m > 20");
    c.params.validate();
}
}  // namespace

double AnnealedConfig::sum_abs_rho_eff() const {
    if (truncated()) {
        double s = 0.0;
        for (std::int64_t k = 1; k <= m; ++k) s += std::abs(spec.rho(k));
        return s;
    }
    return spec.sum_rho();  // nonnegative families
}

double AnnealedConfig::sum_k_abs_rho_eff() const {
    if (truncated()) {
        double s = 0.0;
        for (std::int64_t k = 1; k <= m; ++k) s += static_cast<double>(k) * std::abs(spec.rho(k));
        return s;
    }
    return spec.sum_k_rho();
}

double annealed_hamiltonian(const AnnealedConfig& config, std::span<const std::int64_t> subset,
                            std::int64_t n) {
    if (subset.empty()) throw usage_error("subset must be nonempty");
    if (subset.back() != n) throw usage_error("pinned endpoint required: subset must contain N");
    const double beta2 = config.params.beta * config.params.beta;
    double h = (0.5 * beta2 + config.params.h) * static_cast<double>(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) {
        for (std::size_t j = i + 1; j < subset.size(); ++j) {
            if (subset[j] <= subset[i]) throw usage_error("subset must be strictly increasing");
            h += beta2 * config.rho_eff(subset[j] - subset[i]);
        }
    }
    return h;
}

double annealed_brute_force(const AnnealedConfig& config, std::int64_t n) {
    if (n < 1 || n > 20) throw error("brute force limited to 1 <= N <= 20");
    config.params.validate();
    const InterArrivalLaw& law = *config.law;

    std::vector<std::int64_t> contacts;
    contacts.reserve(static_cast<std::size_t>(n));
    LogSumExp acc;
    const std::uint64_t inner = 1ULL << (n - 1);
    for (std::uint64_t mask = 0; mask < inner; ++mask) {
        contacts.clear();
        for (std::int64_t s = 1; s < n; ++s)
            if (mask & (1ULL << (s - 1))) contacts.push_back(s);
        contacts.push_back(n);
        double logw = annealed_hamiltonian(config, contacts, n);
        std::int64_t prev = 0;
        for (const std::int64_t s : contacts) {
            logw += law.log_k(s - prev);
            prev = s;
        }
        acc.add(logw);
    }
    return acc.value();
}

PartitionTrace annealed_transfer(const AnnealedConfig& config, std::int64_t n_sites,
                                 std::span<const std::int64_t> forced) {
    check_transfer_pre(config);
    const InterArrivalLaw& law = *config.law;
    if (n_sites > law.n_max) throw error("transfer horizon exceeds law cache (n > n_max)");

    const std::int64_t m = config.m;
    const std::size_t nmask = std::size_t{1} << m;
    const std::size_t mask_all = nmask - 1;
    const double beta2 = config.params.beta * config.params.beta;
    const double one_body = std::exp(0.5 * beta2 + config.params.h);
    const std::size_t N = static_cast<std::size_t>(n_sites);

    // barrier lookup: nb[p] = least forced position > p, lb[n] = greatest < n
    std::vector<std::int64_t> barriers(forced.begin(), forced.end());
    std::sort(barriers.begin(), barriers.end());
    for (const std::int64_t b : barriers)
        if (b < 1 || b > n_sites) throw usage_error("forced positions must lie in [1, N]");
    auto next_barrier = [&](std::int64_t p) {
        auto it = std::upper_bound(barriers.begin(), barriers.end(), p);
        return it == barriers.end() ? n_sites + 1 : *it;
    };
    auto last_barrier_below = [&](std::int64_t p) {
        auto it = std::lower_bound(barriers.begin(), barriers.end(), p);
        return it == barriers.begin() ? 0 : *(it - 1);
    };

    std::vector<double> expb(static_cast<std::size_t>(m) + 1, 1.0);
    for (std::int64_t k = 1; k <= m; ++k) expb[static_cast<std::size_t>(k)] =
        std::exp(beta2 * config.rho_eff(k));

    // interaction factor of a new contact at distance g from mask M
    auto interact = [&](std::size_t M, std::int64_t g) {
        double w = 1.0;
        std::size_t bits = M;
        while (bits) {
            const int j = std::countr_zero(bits);
            bits &= bits - 1;
            const std::int64_t d = g + j;
            if (d > m) break;  // set bits are scanned in increasing j
            w *= expb[static_cast<std::size_t>(d)];
        }
        return w;
    };

    // weight tables over odd masks, tab[g][M>>1] = K(g) e^{b^2/2+h} I(M,g)
    const bool use_tables = m >= 1 && m <= 14;
    std::vector<std::vector<double>> tab;
    if (use_tables) {
        tab.assign(static_cast<std::size_t>(m) + 1, {});
        for (std::int64_t g = 1; g <= m; ++g) {
            auto& t = tab[static_cast<std::size_t>(g)];
            t.resize(nmask >> 1);
            for (std::size_t M = 1; M < nmask; M += 2)
                t[M >> 1] = law.k(g) * one_body * interact(M, g);
        }
    }

    const std::size_t n_slots = static_cast<std::size_t>(m) + 1;
    std::vector<double> ring(n_slots * nmask, 0.0);
    std::vector<double> w_total(N + 1, 0.0), logz(N + 1, 0.0);
    auto slot = [&](std::size_t p) { return ring.data() + (p % n_slots) * nmask; };

    int t_bits = 0;
    const std::size_t inflow_mask = m >= 1 ? 1 : 0;

    // position 0: a contact that carries no weight and no interactions
    slot(0)[0] = 1.0;
    w_total[0] = 1.0;
    logz[0] = 0.0;

    for (std::size_t n = 0; n <= N; ++n) {
        if (n > 0) {
            // long gaps (> m) arrive mask-free through the renewal convolution
            double* sn = slot(n);
            const std::int64_t lb = last_barrier_below(static_cast<std::int64_t>(n));
            const std::size_t g_max = static_cast<std::size_t>(static_cast<std::int64_t>(n) - lb);
            if (g_max >= static_cast<std::size_t>(m) + 1)
                sn[inflow_mask] +=
                    one_body *
                    pinned_conv(law.mass, w_total, n, static_cast<std::size_t>(m) + 1, g_max);

            double tot = 0.0;
            for (std::size_t M = 0; M < nmask; ++M) tot += sn[M];
            if (tot <= 0.0)
                throw error("transfer recursion underflowed to zero");
            if (tot > 0x1.0p400 || tot < 0x1.0p-400) {
                const int shift = -std::ilogb(tot);
                const double f = std::ldexp(1.0, shift);
                for (std::size_t j = 0; j <= n; ++j) w_total[j] *= f;
                for (auto& v : ring) v *= f;
                tot *= f;
                t_bits += shift;
            }
            w_total[n] = tot;
            logz[n] = std::log(tot) - static_cast<double>(t_bits) * kLn2;
        }

        // forward pushes over short gaps
        if (n < N && m >= 1) {
            const double* sn = slot(n);
            const std::int64_t nb = next_barrier(static_cast<std::int64_t>(n));
            const std::int64_t g_hi =
                std::min<std::int64_t>(m, static_cast<std::int64_t>(N) - static_cast<std::int64_t>(n));
            if (n == 0) {
                // source mask 0: no interactions
                for (std::int64_t g = 1; g <= g_hi; ++g) {
                    if (static_cast<std::int64_t>(n) + g > nb && nb <= n_sites) continue;
                    slot(n + static_cast<std::size_t>(g))[1] += law.k(g) * one_body;
                }
            } else {
                for (std::int64_t g = 1; g <= g_hi; ++g) {
                    if (static_cast<std::int64_t>(n) + g > nb && nb <= n_sites) continue;
                    double* st = slot(n + static_cast<std::size_t>(g));
                    if (use_tables) {
                        const double* tg = tab[static_cast<std::size_t>(g)].data();
                        for (std::size_t M = 1; M < nmask; M += 2) {
                            const double v = sn[M];
                            if (v != 0.0) st[((M << g) | 1) & mask_all] += v * tg[M >> 1];
                        }
                    } else {
                        const double kg = law.k(g) * one_body;
                        for (std::size_t M = 1; M < nmask; M += 2) {
                            const double v = sn[M];
                            if (v != 0.0)
                                st[((M << g) | 1) & mask_all] += v * kg * interact(M, g);
                        }
                    }
                }
            }
        }

        // the physical slot of n is next used by position n + m + 1
        std::fill(slot(n), slot(n) + nmask, 0.0);
    }

    PartitionTrace tr;
    tr.logz = std::move(logz);
    tr.context = "annealed(" + law.label() + "," + config.spec.label() +
                 ",m=" + std::to_string(m) + ",beta=" + std::to_string(config.params.beta) +
                 ",h=" + std::to_string(config.params.h) + ")";
    return tr;
}

FreeEnergyEstimate annealed_free_energy(const AnnealedConfig& config, std::int64_t n,
                                        std::int64_t burn) {
    if (!config.truncated()) {
        if (config.spec.family == CorrelationSpec::Family::ShiftedPower && config.spec.a <= 1.0)
            throw error("annealed free energy infinite for a<1 (non-summable correlations)");
        throw error("transfer mode requires a finite truncation m");
    }
    if (burn < 1 || n < 2 * burn) throw usage_error("need N >= 2*burn and burn >= 1");
    const PartitionTrace tr = annealed_transfer(config, n);
    FreeEnergyEstimate est;
    est.value = (tr.logz[static_cast<std::size_t>(n)] - tr.logz[static_cast<std::size_t>(burn)]) /
                static_cast<double>(n - burn);
    est.std_err = 0.0;
    est.n_sites = n;
    est.n_replicas = 1;
    est.mode = FreeEnergyMode::Annealed;
    est.bias = "deterministic";
    return est;
}

HcEstimate annealed_critical_point(const AnnealedConfig& config, double tol,
                                   const HcOptions& opts) {
    check_transfer_pre(config);
    if (!(tol > 0.0)) throw usage_error("tol must be > 0");
    const std::int64_t n = opts.n;
    const std::int64_t burn = n / 2;

    // small-beta location of the critical point, used to seed the bracket
    const RenewalMass um = renewal_mass(config.law, std::min<std::int64_t>(config.law->n_max, n));
    const double beta2 = config.params.beta * config.params.beta;
    double corr = 0.0;
    for (std::int64_t k = 1; k <= std::min<std::int64_t>(config.m, static_cast<std::int64_t>(um.n()));
         ++k)
        corr += config.rho_eff(k) * um.u[static_cast<std::size_t>(k)];
    const double guess = -0.5 * beta2 * (1.0 + 2.0 * corr);

    std::function<double(double)> excess;  // >0 in the localized phase
    if (opts.method == HcMethod::MatchedDecay) {
        const double d0 = std::log(um.u[static_cast<std::size_t>(n)]) -
                          std::log(um.u[static_cast<std::size_t>(burn)]);
        excess = [&, d0](double h) {
            const PartitionTrace tr = annealed_transfer(config.with_h(h), n);
            return tr.logz[static_cast<std::size_t>(n)] - tr.logz[static_cast<std::size_t>(burn)] -
                   d0;
        };
    } else {
        excess = [&](double h) {
            return annealed_free_energy(config.with_h(h), n, burn).value - opts.slope_threshold;
        };
    }

    double lo = guess - 0.01 - 0.5 * beta2;
    double hi = guess + 0.01 + 0.5 * beta2;
    double step = std::max(0.05, beta2);
    while (excess(lo) > 0.0) {
        lo -= step;
        step *= 2.0;
        if (lo < -10.0) throw error("annealed critical point bracket not found in [-10, 10]");
    }
    step = std::max(0.05, beta2);
    while (excess(hi) < 0.0) {
        hi += step;
        step *= 2.0;
        if (hi > 10.0) throw error("annealed critical point bracket not found in [-10, 10]");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? hi : lo) = mid;
    }

    HcEstimate est;
    est.lo = lo;
    est.hi = hi;
    est.h_c = 0.5 * (lo + hi);
    est.method = opts.method;
    return est;
}

namespace {

void gate_k_summable(const AnnealedConfig& config) {
    if (config.spec.family == CorrelationSpec::Family::ShiftedPower && !(config.spec.a > 2.0))
        throw error("correlation tail not summable against k (needs a > 2)");
}

}  // namespace

CheckReport quasi_renewal_check(const AnnealedConfig& config, std::span<const std::int64_t> n_list,
                                std::uint64_t seed) {
    gate_k_summable(config);
    check_transfer_pre(config);
    if (n_list.empty()) throw usage_error("n_list must be nonempty");

    const InterArrivalLaw& law = *config.law;
    const double beta2 = config.params.beta * config.params.beta;
    const double s0 = config.sum_abs_rho_eff();
    const double s1 = config.sum_k_abs_rho_eff();
    const std::int64_t n_top = *std::max_element(n_list.begin(), n_list.end());

    const PartitionTrace tr = annealed_transfer(config, n_top);
    const auto& lz = tr.logz;

    CheckReport rep;
    rep.check_id = "quasi-renewal";
    rep.params = {{"alpha", law.alpha},
                  {"a", config.spec.a},
                  {"beta", config.params.beta},
                  {"h", config.params.h},
                  {"m", config.m},
                  {"sum_abs_rho", s0},
                  {"sum_k_abs_rho", s1}};

    // (a) quasi super-multiplicativity over all splits
    double worst_split = std::numeric_limits<double>::infinity();
    for (const std::int64_t n : n_list)
        for (std::int64_t k = 1; k < n; ++k)
            worst_split = std::min(worst_split,
                                   lz[static_cast<std::size_t>(n)] + beta2 * s1 -
                                       lz[static_cast<std::size_t>(k)] -
                                       lz[static_cast<std::size_t>(n - k)]);
    rep.add_margin("supermultiplicative_worst", worst_split);

    // (b) two-sided renewal-style sandwich around the split at M
    const double log_l = 0.5 * beta2 + config.params.h - beta2 * (s0 + s1);
    const double log_u = 0.5 * beta2 + config.params.h + beta2 * (s0 + s1);
    double worst_lower = std::numeric_limits<double>::infinity();
    double worst_upper = std::numeric_limits<double>::infinity();
    for (const std::int64_t n : n_list) {
        for (const std::int64_t M : {n / 4, n / 2, (3 * n) / 4}) {
            if (M < 0 || M >= n) continue;
            LogSumExp acc;
            for (std::int64_t i = 0; i <= M; ++i)
                for (std::int64_t j = M + 1; j <= n; ++j)
                    acc.add(lz[static_cast<std::size_t>(i)] + law.log_k(j - i) +
                            lz[static_cast<std::size_t>(n - j)]);
            const double log_w = acc.value();
            worst_lower = std::min(worst_lower, lz[static_cast<std::size_t>(n)] - (log_l + log_w));
            worst_upper = std::min(worst_upper, (log_u + log_w) - lz[static_cast<std::size_t>(n)]);
        }
    }
    rep.add_margin("sandwich_lower_worst", worst_lower);
    rep.add_margin("sandwich_upper_worst", worst_upper);

    // (c) product sandwich over forced-contact subsets, one junction
    // constant e^{beta^2 sum k|rho_k|} per internal boundary
    Rng rng(seed);
    double worst_sub_lo = std::numeric_limits<double>::infinity();
    double worst_sub_hi = std::numeric_limits<double>::infinity();
    const std::int64_t n_sub = n_top;
    for (int rep_i = 0; rep_i < 8; ++rep_i) {
        const int m_count = 2 + static_cast<int>(rng.next_u64() % 4);
        std::vector<std::int64_t> subset;
        for (int j = 0; j + 1 < m_count; ++j)
            subset.push_back(1 + static_cast<std::int64_t>(rng.next_u64() %
                                                           static_cast<std::uint64_t>(n_sub - 1)));
        subset.push_back(n_sub);
        std::sort(subset.begin(), subset.end());
        subset.erase(std::unique(subset.begin(), subset.end()), subset.end());

        const PartitionTrace con = annealed_transfer(config, n_sub, subset);
        const double log_e = con.logz[static_cast<std::size_t>(n_sub)];
        double log_prod = 0.0;
        std::int64_t prev = 0;
        for (const std::int64_t i : subset) {
            log_prod += lz[static_cast<std::size_t>(i - prev)];
            prev = i;
        }
        const double c_joint = beta2 * s1 * static_cast<double>(subset.size() - 1);
        worst_sub_lo = std::min(worst_sub_lo, log_e - (log_prod - c_joint));
        worst_sub_hi = std::min(worst_sub_hi, (log_prod + c_joint) - log_e);
    }
    rep.add_margin("subset_lower_worst", worst_sub_lo);
    rep.add_margin("subset_upper_worst", worst_sub_hi);

    double worst = std::numeric_limits<double>::infinity();
    for (const auto& mg : rep.margins) worst = std::min(worst, mg.value);
    rep.add_margin("worst", worst);
    rep.set_status(worst >= -1e-9);
    return rep;
}

CheckReport laplace_ratio_check(const AnnealedConfig& config, std::span<const double> lambda_grid,
                                const LaplaceRatioOptions& opts) {
    gate_k_summable(config);
    check_transfer_pre(config);
    if (lambda_grid.empty()) throw usage_error("lambda grid must be nonempty");
    for (const double l : lambda_grid)
        if (!(l > 0.0 && l <= 1.0)) throw usage_error("lambda grid must lie in (0, 1]");

    const double lam_min = *std::min_element(lambda_grid.begin(), lambda_grid.end());
    const std::int64_t n_cap =
        std::min<std::int64_t>(config.law->n_max,
                               std::max<std::int64_t>(2048, static_cast<std::int64_t>(30.0 / lam_min)));

    const double h_c = opts.h_c ? *opts.h_c
                                : annealed_critical_point(config, 1e-4, {}).h_c;
    const PartitionTrace tr = annealed_transfer(config.with_h(h_c), n_cap);
    std::vector<double> z(tr.logz.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::exp(tr.logz[i]);
    const RenewalMass um = renewal_mass(config.law, n_cap);

    CheckReport rep;
    rep.check_id = "laplace-ratio";
    rep.params = {{"alpha", config.law->alpha}, {"a", config.spec.a},
                  {"beta", config.params.beta}, {"m", config.m},
                  {"h_c", h_c},                 {"n_cap", n_cap}};
    rep.set_band(opts.band_lo, opts.band_hi);

    double r_lo = std::numeric_limits<double>::infinity(), r_hi = 0.0;
    for (const double lam : lambda_grid) {
        const double hat_z = exp_weighted_sum(z, lam, n_cap);
        const double hat_p = laplace_renewal(um, lam).value;
        const double r = hat_z / hat_p;
        r_lo = std::min(r_lo, r);
        r_hi = std::max(r_hi, r);
    }
    rep.add_margin("ratio_inf", r_lo);
    rep.add_margin("ratio_sup", r_hi);

    bool ok = r_lo >= opts.band_lo && r_hi <= opts.band_hi;
    if (config.law->alpha > 1.0) {
        // bounded-partition witness in the alpha > 1 regime
        double z_min = std::numeric_limits<double>::infinity(), z_max = 0.0;
        for (std::int64_t n = 64; n <= std::min<std::int64_t>(2048, n_cap); ++n) {
            z_min = std::min(z_min, z[static_cast<std::size_t>(n)]);
            z_max = std::max(z_max, z[static_cast<std::size_t>(n)]);
        }
        rep.add_margin("z_range_ratio", z_max / z_min);
        ok = ok && z_max / z_min <= 10.0;
    }
    rep.set_status(ok);
    return rep;
}

ExponentFit annealed_exponent_fit(const AnnealedConfig& config, std::span<const double> u_grid,
                                  const ExponentFitOptions& opts) {
    gate_k_summable(config);
    check_transfer_pre(config);
    if (u_grid.empty()) throw usage_error("u grid must be nonempty");

    ExponentFit fit;
    fit.h_c = opts.h_c ? *opts.h_c : annealed_critical_point(config, 1e-5, {}).h_c;

    const RenewalMass um = renewal_mass(config.law, 4096);
    std::vector<double> lx, ly;
    for (const double u : u_grid) {
        if (!(u > 0.0)) throw usage_error("u grid must be positive");
        const double f_hom = homogeneous_free_energy(um, u, 1e-6);
        std::int64_t n = opts.n_min;
        while (n < opts.n_max && static_cast<double>(n) * f_hom < opts.target_nf) n *= 2;
        n = std::min(n, config.law->n_max);
        const double f = annealed_free_energy(config.with_h(fit.h_c + u), n, n / 2).value;
        fit.u.push_back(u);
        fit.f.push_back(f);
        if (f > 0.1) continue;  // outside the critical window
        if (f <= 0.0) continue;
        lx.push_back(std::log(u));
        ly.push_back(std::log(f));
    }
    if (lx.size() < 2) throw error("grid below resolution: free energy vanished on the u grid");
    fit.slope = fit_line(lx, ly).slope;

    // smallest constant making the two-sided homogeneous sandwich hold
    fit.sandwich_c = std::numeric_limits<double>::infinity();
    for (double c = 1.0; c <= 8.0; c *= 1.05) {
        bool ok = true;
        for (std::size_t i = 0; i < fit.u.size() && ok; ++i) {
            if (fit.f[i] <= 0.0 || fit.f[i] > 0.1) continue;
            const double lo = homogeneous_free_energy(um, fit.u[i] / c, 1e-6);
            const double hi = homogeneous_free_energy(um, fit.u[i] * c, 1e-6);
            ok = lo <= fit.f[i] && fit.f[i] <= hi;
        }
        if (ok) {
            fit.sandwich_c = c;
            break;
        }
    }
    return fit;
}

CheckReport renewal_measure_proximity(const AnnealedConfig& config,
                                      std::span<const std::int64_t> n_list,
                                      const ProximityOptions& opts) {
    gate_k_summable(config);
    check_transfer_pre(config);
    if (!(config.law->alpha > 1.0))
        throw error("renewal-measure proximity requires alpha > 1");
    if (n_list.empty()) throw usage_error("n_list must be nonempty");

    const std::int64_t n_top = *std::max_element(n_list.begin(), n_list.end());
    const double h_c = opts.h_c ? *opts.h_c : annealed_critical_point(config, 1e-4, {}).h_c;
    const PartitionTrace tr = annealed_transfer(config.with_h(h_c), n_top);
    const RenewalMass um = renewal_mass(config.law, n_top);

    CheckReport rep;
    rep.check_id = "renewal-measure-proximity";
    rep.params = {{"alpha", config.law->alpha}, {"a", config.spec.a},
                  {"beta", config.params.beta}, {"m", config.m},
                  {"h_c", h_c}};
    rep.set_band(opts.band_lo, opts.band_hi);

    double r_lo = std::numeric_limits<double>::infinity(), r_hi = 0.0;
    for (const std::int64_t n : n_list) {
        const double r = std::exp(tr.logz[static_cast<std::size_t>(n)] -
                                  std::log(um.u[static_cast<std::size_t>(n)]));
        r_lo = std::min(r_lo, r);
        r_hi = std::max(r_hi, r);
    }
    rep.add_margin("ratio_inf", r_lo);
    rep.add_margin("ratio_sup", r_hi);
    rep.set_status(r_lo >= opts.band_lo && r_hi <= opts.band_hi);
    return rep;
}

}  // namespace pincor
