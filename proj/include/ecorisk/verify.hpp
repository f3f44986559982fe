#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecorisk/grid.hpp"
#include "ecorisk/model.hpp"
#include "ecorisk/simulate.hpp"
#include "ecorisk/solver.hpp"

namespace ecorisk {

// One verification gate: a statistic, the bound it must satisfy, and a
// description of the optimality property being exercised. Statistical gates
// are 3-standard-error bands plus explicitly budgeted deterministic error;
// there are no hidden fudge factors.
struct CheckEntry {
    std::string name;
    double statistic = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string provenance;
    nlohmann::json details;
};

struct VerificationReport {
    std::vector<CheckEntry> checks;

    bool all_pass() const;
    void add(CheckEntry entry);
    nlohmann::json to_json() const;
};

using ValueFn = std::function<double(const State&)>;

ValueFn value_fn_of(const ValueField& field);
ValueFn value_fn_of(const CandidateValue& cand);

// Decoupled regime: solves the PIDE, compares the field against the
// closed-form candidate on the interior 60% of the grid (1% sup-norm), and
// checks Monte Carlo under the candidate feedback policy against the
// candidate value at each probe (3 stderr + tail bound).
void check_candidate_closed_form(const ModelParams& params, const Grid& grid,
                                 const SchemeOptions& scheme, const std::vector<State>& probes,
                                 std::size_t n_paths, double T, double dt, std::uint64_t seed,
                                 int threads, VerificationReport& report);

// |MC(field policy) - v(probe)| <= 3 stderr + tail + budget*|v| at each
// probe, and MC under each constant suboptimal policy <= v(probe) + 3 stderr
// + budget*|v| (the upper-bound direction of the verification theorem).
void check_mc_vs_solver(const ModelParams& params, const ValueField& field,
                        const PolicyField& policy, const std::vector<State>& probes,
                        std::size_t n_paths, double T, double dt,
                        const std::vector<Control>& suboptimal, std::size_t n_sub_paths,
                        double T_sub, double grid_budget, std::uint64_t seed, int threads,
                        VerificationReport& report);

// Zero-mean compensated-jump statistics for H in {1, e^{-rho s},
// e^{-rho s}(v(omega K, P) - v(K, P))}, each within 3 stderr of 0.
void check_martingale(const ModelParams& params, const Policy& policy, const ValueFn& value,
                      State s0, std::size_t n_paths, double T, double dt, std::uint64_t seed,
                      int threads, VerificationReport& report);

// E[e^{-rho T} |v(K_T, P_T)|] decreasing along T_list and below
// 1e-3 |v(state0)| at the largest horizon.
void check_transversality(const ModelParams& params, const Policy& policy, const ValueFn& value,
                          State s0, const std::vector<double>& T_list, std::size_t n_paths,
                          double dt, std::uint64_t seed, int threads,
                          VerificationReport& report);

// Dynamic programming recursion over a short horizon h: equality under the
// field policy (3 stderr + budget), upper bound under constant policies.
void check_dpp(const ModelParams& params, const ValueField& field, const PolicyField& policy,
               double h, const std::vector<State>& probes, std::size_t n_paths, double dt,
               const std::vector<Control>& suboptimal, double grid_budget, std::uint64_t seed,
               int threads, VerificationReport& report);

// Arrival/mark law statistics: homogeneous count mean, thinned rate as a
// function of pollution, Gamma mark conditional mean/variance.
void check_jump_statistics(const ModelParams& params, std::uint64_t seed,
                           VerificationReport& report);

}  // namespace ecorisk
