#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepiv/first_stage.hpp"
#include "deepiv/inference.hpp"
#include "deepiv/mlp.hpp"
#include "deepiv/spec_test.hpp"
#include "deepiv/split_sample.hpp"
#include "deepiv/theory_calc.hpp"

namespace deepiv {

// JSON (de)serialization with fixed key order. Doubles round-trip
// bit-exactly through their decimal form; non-finite values are encoded
// as the strings "inf", "-inf", "nan" since JSON has no literals for
// them. All parsers throw DomainError on malformed input.

// {d, q, L, W, weights, shifts}; weights as nested row-major arrays.
std::string network_to_json(const MlpNetwork& net);
MlpNetwork network_from_json(const std::string& text);

// Tagged union {family, d, q, truncated, c_n, payload}. The oracle
// family serializes only when oracle_name identifies a built-in DGP.
std::string model_to_json(const FirstStageModel& model);
FirstStageModel model_from_json(const std::string& text);

// {beta, se, vcov, n, sigma2, ci: {level, lower, upper}}
std::string estimate_to_json(const BetaEstimate& est, const ConfidenceInterval& ci);

// {beta, beta_a, beta_b, se, vcov, n, sigma2, c_n, split_seed,
//  ci: {level, lower, upper}}
std::string split_to_json(const SplitEstimate& est, const ConfidenceInterval& ci);

// {J, dof, alpha, critical, p_value, reject, beta_full, beta_baseline}
std::string spec_test_to_json(const SpecTestResult& result);

// {l_star, dims, active, smoothness}
std::string comp_spec_to_json(const CompositionalSpec& spec);
CompositionalSpec comp_spec_from_json(const std::string& text);

// {p_star_per_layer, i_star, p_star, t_star, rate_exponent, lw_exponent,
//  min_depth, min_width, infinite_smoothness}
std::string summary_to_json(const IntrinsicSummary& summary);

// Everything needed to re-run a CLI command and reproduce its artifacts:
// the verb, the resolved option snapshot (a self-contained JSON document),
// and the paths written. Timestamps are informational only.
struct RunManifest {
    std::string command;
    std::string config_json;
    std::uint64_t seed = 0;
    std::string version;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

}  // namespace deepiv
