#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecorisk/grid.hpp"
#include "ecorisk/model.hpp"
#include "ecorisk/solver.hpp"

namespace ecorisk {

// Raised on any malformed, unknown, or invariant-violating configuration key.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    double k_lo = 0.0, k_hi = 0.0, p_lo = 0.0, p_hi = 0.0;
    int n_k = 0, n_p = 0;

    Grid make() const { return Grid::log_spaced(k_lo, k_hi, n_k, p_lo, p_hi, n_p); }
};

struct SimulationSpec {
    std::size_t n_paths = 20000;
    double T = 200.0;
    double dt = 1.0 / 256.0;
    std::uint64_t master_seed = 1;
    int dump_paths = 0;  // path CSVs written by the simulate command
};

struct PolicySpec {
    std::string kind = "field";  // field | candidate | constant
    double C = 0.0;
    double theta = 0.0;
};

struct VerifySpec {
    double grid_error_budget = 0.02;
    std::vector<double> transversality_horizons{25.0, 50.0, 100.0};
    std::size_t transversality_paths = 4000;
    double dpp_horizon = 1.0;
    std::size_t dpp_paths = 4000;
    std::size_t martingale_paths = 10000;
    double martingale_T = 50.0;
    std::size_t suboptimal_paths = 4000;
    double suboptimal_T = 100.0;
};

// One file = one run. Unknown keys are rejected; all module invariants are
// validated up front so downstream code can assume them.
struct RunConfig {
    std::string run_id = "run";
    ModelParams params;
    GridSpec grid;
    SchemeOptions scheme;
    SimulationSpec simulation;
    PolicySpec policy;
    VerifySpec verify;
    std::vector<State> probes;             // default: interior diagonal
    std::vector<Control> suboptimal;       // default: derived from probes
    std::string outdir = "out";

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::string& path);

    nlohmann::json to_json() const;

    // FNV-1a over the canonical serialization; stamped into every output.
    std::string config_hash() const;

    std::vector<State> effective_probes() const;
    std::vector<Control> effective_suboptimal() const;
};

}  // namespace ecorisk
