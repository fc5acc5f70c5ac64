#ifndef PINCOR_CONFIG_HPP
#define PINCOR_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pincor/gaussenv.hpp"
#include "pincor/renewal.hpp"
#include "pincor/types.hpp"

namespace pincor {

// Experiment configuration: a nested JSON document with fixed blocks.
// Unknown keys are rejected; every run embeds the resolved (post-default)
// form in its output so results are reproducible from the output alone.
struct ExperimentConfig {
    nlohmann::json doc;  // resolved

    static ExperimentConfig resolve(const nlohmann::json& user);

    LawPtr law() const;
    CorrelationSpec spec() const;
    ModelParams params() const;

    double law_alpha() const { return doc["law"]["alpha"].get<double>(); }
    std::int64_t run_n() const { return doc["run"]["N"].get<std::int64_t>(); }
    int replicas() const { return doc["run"]["replicas"].get<int>(); }
    std::uint64_t seed() const { return doc["run"]["seed"].get<std::uint64_t>(); }
    std::int64_t budget() const { return doc["run"]["budget"].get<std::int64_t>(); }
    int threads() const { return doc["run"]["threads"].get<int>(); }

    // params.h_grid as an explicit list (expands [lo, hi, step])
    std::vector<double> h_grid() const;
    bool has_h_grid() const { return doc["params"].contains("h_grid"); }
};

// "lo:hi:step" -> [lo, hi, step]; throws usage_error on malformed input.
std::vector<double> parse_grid_spec(const std::string& text);

}  // namespace pincor

#endif
