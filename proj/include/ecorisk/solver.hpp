#pragma once

#include <atomic>
#include <vector>

#include "ecorisk/grid.hpp"
#include "ecorisk/model.hpp"

namespace ecorisk {

struct SchemeOptions {
    double tol = 1e-8;            // scaled residual sup-norm target
    long max_iters = 200000;
    int policy_update_every = 10; // Howard-style: frozen-policy sweeps between argmax refreshes
    bool nested_init = true;      // coarse-to-fine warm start
    int threads = 1;
    double cfl_safety = 0.85;
    int gamma_quad_nodes = 32;    // generalized Gauss-Laguerre nodes per P row
    double mono_tol = 1e-6;       // relative tolerance for the monotonicity check
    double c_min = 1e-10;         // consumption bounds for the FOC fallback
};

struct SolveReport {
    bool converged = false;
    long iterations = 0;
    double residual = 0.0;       // sup |rhs - rho v|/(1+|rho v|), all nodes
    double interior_residual = 0.0;
    double final_update = 0.0;   // sup-norm of the last value update (relative)
    double dtau = 0.0;           // pseudo-time step in use at exit
    long foc_clamp_events = 0;   // nodes*sweeps where v_K <= 0 forced the C bound
    // Fraction of K_hi / P_hi edge nodes where the optimally controlled drift
    // points outward (domain truncation warning when > 0).
    double outward_drift_frac_k_hi = 0.0;
    double outward_drift_frac_p_hi = 0.0;
    bool monotone_in_K = false;  // v_K >= -tol on the interior after convergence
    bool monotone_in_P = false;  // v_P <= +tol on the interior
    std::vector<double> residual_history;  // subsampled
};

struct SolveResult {
    ValueField value;
    PolicyField policy;
    SolveReport report;
};

// Discrete Bellman operator on a log-spaced grid: upwind one-sided first
// differences selected by the sign of the maximized drift, central second
// difference for the diffusion, and a nonlocal jump term with precomputed
// displacement stencils (exact sums for DISCRETE marks, generalized
// Gauss-Laguerre per P row for GAMMA). Displacements below the K range
// extrapolate linearly in log K from the boundary gradient.
class HjbOperator {
  public:
    HjbOperator(const ModelParams& params, const Grid& grid, int gamma_quad_nodes = 32,
                double c_min = 1e-10);

    // Bellman right-hand side with a fresh argmax over (C, theta); the
    // maximizing control is returned through `argmax` when non-null.
    double rhs(const std::vector<double>& v, int i, int j, Control* argmax) const;

    // Right-hand side under a frozen control (linear in v).
    double rhs_frozen(const std::vector<double>& v, int i, int j, const Control& ctrl) const;

    // Expected jump increment sum_m w_m (v(omega_m K_i, P_j) - v_ij).
    double nonlocal(const std::vector<double>& v, int i, int j) const;

    // Per-node rate bounding the explicit update (CFL denominator).
    double node_rate(int i, int j, const Control& ctrl) const;

    long foc_clamp_events() const { return foc_clamps_.load(); }

    const Grid& grid() const { return grid_; }
    const ModelParams& params() const { return params_; }

  private:
    struct StencilEntry {
        double w;   // nonnegative rate weight
        double s;   // interpolation offset within [i0, i0+1]; s < 0 extrapolates
        int i0;
    };

    double interp_row(const std::vector<double>& v, int j, const StencilEntry& e) const {
        return (1.0 - e.s) * v[grid_.idx(e.i0, j)] + e.s * v[grid_.idx(e.i0 + 1, j)];
    }

    // x-direction (log K) Hamiltonian part for a given theta; picks the
    // consumption candidate consistent with the resulting drift sign.
    double best_consumption(const std::vector<double>& v, int i, int j, double theta,
                            double* c_star) const;

    ModelParams params_;
    Grid grid_;
    double c_min_, c_max_;
    std::vector<double> pollution_term_;   // chi P^(1+beta)/(1+beta) per row
    std::vector<double> jump_cfl_;         // per node: sum w (1 + 2 max(0,-s))
    std::vector<StencilEntry> stencil_;    // flattened per-node entries
    std::vector<std::size_t> stencil_off_; // size()+1 offsets
    mutable std::atomic<long> foc_clamps_{0};
};

// Damped value iteration v <- v + dtau (rhs - rho v) with Jacobi sweeps
// (race-free, deterministic for any thread count), pseudo-time step from the
// current policy's CFL bound, until the scaled residual drops below tol.
// Non-convergence returns a diagnostic report; NaN/inf aborts with the
// offending node.
SolveResult solve(const ModelParams& params, const Grid& grid, const SchemeOptions& opts = {});

}  // namespace ecorisk
