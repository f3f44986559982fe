#pragma once

#include <vector>

#include "ecorisk/grid.hpp"
#include "ecorisk/model.hpp"

namespace ecorisk {

// Residuals of the differentiated (envelope) optimality identities for the
// value gradient: rho v_K and rho v_P each equal the state derivative of the
// maximized Hamiltonian plus jump-term derivatives; the state-dependent
// hazard contributes an extra lambda1 * (v(omega K, P) - v(K, P)) term in P.
// Derivatives are second-order central differences on the log mesh.
struct EnvelopeResiduals {
    Grid grid;
    std::vector<double> res_K;  // |LHS - RHS| of the K identity; NaN where not evaluated
    std::vector<double> res_P;
    double median_K = 0.0;      // medians over the evaluated interior band
    double median_P = 0.0;
};

// Only the non-diffusive unmarked variants (HPP, NHPP) are supported: the
// diffusive identities involve third derivatives and are rejected.
EnvelopeResiduals envelope_residuals(const ValueField& field, const ModelParams& params);

// Same residuals evaluated with the exact candidate gradients instead of
// finite differences; identically zero whenever the candidate solves the
// stationary equation (used as the analytic baseline).
double envelope_residual_candidate(const State& s, const CandidateValue& cand,
                                   const ModelParams& params, bool k_identity);

}  // namespace ecorisk
