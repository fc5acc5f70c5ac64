#ifndef PINCOR_TYPES_HPP
#define PINCOR_TYPES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pincor/errors.hpp"

namespace pincor {

// Disorder strength and pinning reward of the polymer measure.
struct ModelParams {
    double beta = 0.0;
    double h = 0.0;

    void validate() const {
        if (!(beta >= 0.0)) throw usage_error("beta must be >= 0");
    }
};

// log Z_n for n = 0..N plus a descriptor of how it was produced.
struct PartitionTrace {
    std::vector<double> logz;
    std::string context;

    std::size_t n() const { return logz.empty() ? 0 : logz.size() - 1; }
};

enum class FreeEnergyMode { Quenched, Annealed, Homogeneous };

inline const char* to_string(FreeEnergyMode m) {
    switch (m) {
        case FreeEnergyMode::Quenched: return "quenched";
        case FreeEnergyMode::Annealed: return "annealed";
        case FreeEnergyMode::Homogeneous: return "homogeneous";
    }
    return "?";
}

// Per-site free-energy rate. The quenched estimator averages (1/N) log Z_N
// over replicas; by the sup representation of F this is biased low, which
// `bias` records for downstream consumers.
struct FreeEnergyEstimate {
    double value = 0.0;
    double std_err = 0.0;
    std::int64_t n_sites = 0;
    int n_replicas = 0;
    FreeEnergyMode mode = FreeEnergyMode::Homogeneous;
    std::string bias = "lower";
};

}  // namespace pincor

#endif
