#include "ecorisk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ecorisk/parallel.hpp"
#include "ecorisk/quadrature.hpp"

namespace ecorisk {

namespace {

double pick_upwind(const std::vector<double>& v, const Grid& g, int i, int j, double drift,
                   bool along_k) {
    // One-sided difference aligned with the drift sign; at an edge the only
    // available one-sided stencil is used (state-constraint style).
    if (along_k) {
        const bool fwd = (drift > 0.0 && i < g.n_k - 1) || i == 0;
        return fwd ? (v[g.idx(i + 1, j)] - v[g.idx(i, j)]) / g.hx
                   : (v[g.idx(i, j)] - v[g.idx(i - 1, j)]) / g.hx;
    }
    const bool fwd = (drift > 0.0 && j < g.n_p - 1) || j == 0;
    return fwd ? (v[g.idx(i, j + 1)] - v[g.idx(i, j)]) / g.hy
               : (v[g.idx(i, j)] - v[g.idx(i, j - 1)]) / g.hy;
}

}  // namespace

HjbOperator::HjbOperator(const ModelParams& params, const Grid& grid, int gamma_quad_nodes,
                         double c_min)
    : params_(params), grid_(grid), c_min_(c_min), c_max_(params.A * grid.K.back()) {
    const int nk = grid_.n_k;
    const int np = grid_.n_p;

    pollution_term_.resize(np);
    for (int j = 0; j < np; ++j) pollution_term_[j] = pollution_disutility(grid_.P[j], params_);

    // Displacement stencils for the nonlocal term. Entries carry the rate
    // weight against the mark measure and the interpolation cell in log K.
    stencil_off_.assign(grid_.size() + 1, 0);
    jump_cfl_.assign(grid_.size(), 0.0);

    const bool has_jumps = params_.lambda0 > 0.0 || params_.lambda1 > 0.0;
    if (!has_jumps) {
        stencil_.clear();
        return;
    }

    std::vector<double> zetas{1.0};
    std::vector<double> base_weights{1.0};

    std::vector<GaussLaguerre> row_rules;
    if (params_.marks.kind == MarkKind::Gamma) {
        row_rules.reserve(np);
        for (int j = 0; j < np; ++j)
            row_rules.push_back(gauss_laguerre(grid_.P[j] - 1.0, gamma_quad_nodes));
    } else if (params_.marks.kind == MarkKind::Discrete) {
        zetas = params_.marks.atoms;
        base_weights = params_.marks.weights;
    }

    auto make_entry = [&](int i, int j, double zeta, double weight) {
        StencilEntry e;
        const double om = survival_fraction(grid_.K[i], grid_.P[j], params_, zeta);
        const double fi = i + std::log(om) / grid_.hx;
        e.i0 = std::clamp(static_cast<int>(std::floor(fi)), 0, grid_.n_k - 2);
        e.s = fi - e.i0;
        e.w = weight;
        return e;
    };

    for (int i = 0; i < nk; ++i) {
        for (int j = 0; j < np; ++j) {
            const std::size_t idx = grid_.idx(i, j);
            stencil_off_[idx] = stencil_.size();
            const double lam = intensity(grid_.P[j], params_);
            if (params_.marks.kind == MarkKind::Gamma) {
                const auto& rule = row_rules[j];
                for (std::size_t m = 0; m < rule.nodes.size(); ++m) {
                    const double w = lam * rule.weights[m];
                    if (w <= 0.0) continue;
                    stencil_.push_back(make_entry(i, j, rule.nodes[m], w));
                }
            } else {
                for (std::size_t m = 0; m < zetas.size(); ++m) {
                    const double w =
                        intensity_marked(grid_.P[j], zetas[m], params_) * base_weights[m];
                    if (w <= 0.0) continue;
                    stencil_.push_back(make_entry(i, j, zetas[m], w));
                }
            }
            double cfl = 0.0;
            for (std::size_t m = stencil_off_[idx]; m < stencil_.size(); ++m)
                cfl += stencil_[m].w * (1.0 + 2.0 * std::max(0.0, -stencil_[m].s));
            jump_cfl_[idx] = cfl;
        }
    }
    stencil_off_[grid_.size()] = stencil_.size();
    // stencil_off_ was filled in (i,j) iteration order == idx order, but make
    // the prefix property explicit for the last row.
}

double HjbOperator::nonlocal(const std::vector<double>& v, int i, int j) const {
    const std::size_t idx = grid_.idx(i, j);
    const double vij = v[idx];
    double acc = 0.0;
    for (std::size_t m = stencil_off_[idx]; m < stencil_off_[idx + 1]; ++m)
        acc += stencil_[m].w * (interp_row(v, j, stencil_[m]) - vij);
    return acc;
}

double HjbOperator::best_consumption(const std::vector<double>& v, int i, int j, double theta,
                                     double* c_star) const {
    const double K = grid_.K[i];
    const double out_flow = (1.0 - theta) * params_.A * K;

    // Zero-drift candidate: consume the retained output exactly.
    double best_c = std::clamp(out_flow, c_min_, c_max_);
    double best = consumption_utility(best_c, params_);

    const std::size_t idx = grid_.idx(i, j);
    if (i < grid_.n_k - 1) {
        const double gx = (v[grid_.idx(i + 1, j)] - v[idx]) / grid_.hx;
        const double v_K = gx / K;
        double c;
        if (v_K > 0.0) {
            c = std::clamp(foc_consumption(v_K, params_), c_min_, c_max_);
        } else {
            c = c_max_;
            foc_clamps_.fetch_add(1, std::memory_order_relaxed);
        }
        const double ax = (out_flow - c) / K;
        if (ax > 0.0) {
            const double val = consumption_utility(c, params_) + gx * ax;
            if (val > best) {
                best = val;
                best_c = c;
            }
        }
    }
    if (i > 0) {
        const double gx = (v[idx] - v[grid_.idx(i - 1, j)]) / grid_.hx;
        const double v_K = gx / K;
        double c;
        if (v_K > 0.0) {
            c = std::clamp(foc_consumption(v_K, params_), c_min_, c_max_);
        } else {
            c = c_max_;
            foc_clamps_.fetch_add(1, std::memory_order_relaxed);
        }
        const double ax = (out_flow - c) / K;
        if (ax < 0.0) {
            const double val = consumption_utility(c, params_) + gx * ax;
            if (val > best) {
                best = val;
                best_c = c;
            }
        }
    }
    if (c_star) *c_star = best_c;
    return best;
}

double HjbOperator::rhs(const std::vector<double>& v, int i, int j, Control* argmax) const {
    const double K = grid_.K[i];
    const double P = grid_.P[j];
    const double AK = params_.A * K;
    const double half_var = 0.5 * params_.sigma_P * params_.sigma_P;

    auto theta_value = [&](double theta, double* c_star) {
        const double b_P = (params_.phi - params_.sigma_ab * theta) * AK - params_.alpha * P;
        const double ay = b_P / P - half_var;
        const double gy = pick_upwind(v, grid_, i, j, ay, false);
        return best_consumption(v, i, j, theta, c_star) + gy * ay;
    };

    double c0 = 0.0, c1 = 0.0;
    const double h0 = theta_value(0.0, &c0);
    const double bt = params_.bar_theta();
    double h1 = -std::numeric_limits<double>::infinity();
    if (bt > 0.0) h1 = theta_value(bt, &c1);

    // Tie resolves to bar_theta (matches the sign rule's tie-break).
    Control ctrl;
    double ham;
    if (h1 >= h0) {
        ctrl = {c1, bt};
        ham = h1;
    } else {
        ctrl = {c0, 0.0};
        ham = h0;
    }
    if (argmax) *argmax = ctrl;

    double diff = 0.0;
    if (half_var > 0.0) {
        const int jc = std::clamp(j, 1, grid_.n_p - 2);
        const double vyy = (v[grid_.idx(i, jc + 1)] - 2.0 * v[grid_.idx(i, jc)] +
                            v[grid_.idx(i, jc - 1)]) /
                           (grid_.hy * grid_.hy);
        diff = half_var * vyy;
    }
    return ham - pollution_term_[j] + diff + nonlocal(v, i, j);
}

double HjbOperator::rhs_frozen(const std::vector<double>& v, int i, int j,
                               const Control& ctrl) const {
    const double K = grid_.K[i];
    const double P = grid_.P[j];
    const double AK = params_.A * K;
    const double half_var = 0.5 * params_.sigma_P * params_.sigma_P;

    const double b_K = (1.0 - ctrl.theta) * AK - ctrl.C;
    const double b_P = (params_.phi - params_.sigma_ab * ctrl.theta) * AK - params_.alpha * P;
    const double ax = b_K / K;
    const double ay = b_P / P - half_var;

    double ham = consumption_utility(ctrl.C, params_) - pollution_term_[j];
    if (ax != 0.0) ham += pick_upwind(v, grid_, i, j, ax, true) * ax;
    if (ay != 0.0) ham += pick_upwind(v, grid_, i, j, ay, false) * ay;

    double diff = 0.0;
    if (half_var > 0.0) {
        const int jc = std::clamp(j, 1, grid_.n_p - 2);
        const double vyy = (v[grid_.idx(i, jc + 1)] - 2.0 * v[grid_.idx(i, jc)] +
                            v[grid_.idx(i, jc - 1)]) /
                           (grid_.hy * grid_.hy);
        diff = half_var * vyy;
    }
    return ham + diff + nonlocal(v, i, j);
}

double HjbOperator::node_rate(int i, int j, const Control& ctrl) const {
    const double K = grid_.K[i];
    const double P = grid_.P[j];
    const double half_var = 0.5 * params_.sigma_P * params_.sigma_P;
    const double b_K = (1.0 - ctrl.theta) * params_.A * K - ctrl.C;
    const double b_P = (params_.phi - params_.sigma_ab * ctrl.theta) * params_.A * K -
                       params_.alpha * P;
    const double ax = std::abs(b_K / K);
    const double ay = std::abs(b_P / P - half_var);
    return params_.rho + jump_cfl_[grid_.idx(i, j)] + ax / grid_.hx + ay / grid_.hy +
           2.0 * half_var / (grid_.hy * grid_.hy);
}

namespace {

struct Norms {
    double residual = 0.0;           // scaled |rhs - rho v|, all nodes
    double interior_residual = 0.0;  // same on the interior band
    bool finite = true;
    int bad_i = -1, bad_j = -1;
};

ValueField initial_guess(const ModelParams& params, const Grid& grid) {
    // Candidate-shaped warm start; exact in the decoupled regime and the
    // right power shape elsewhere.
    double psi = (params.rho - (1.0 - params.epsilon) * params.A) / params.epsilon;
    if (psi <= 0.0) psi = 0.5 * params.rho / params.epsilon;
    const double x = params.chi / (params.rho + params.alpha * (1.0 + params.beta));
    const CandidateValue cand(psi, x, params);
    ValueField field(grid);
    for (int i = 0; i < grid.n_k; ++i)
        for (int j = 0; j < grid.n_p; ++j)
            field.at(i, j) = cand.value({grid.K[i], grid.P[j]});
    return field;
}

}  // namespace

SolveResult solve(const ModelParams& params, const Grid& grid, const SchemeOptions& opts) {
    params.validate();

    SolveResult result;
    result.value = ValueField(grid);

    // Coarse-to-fine warm start: halve the grid until ~16 nodes per axis,
    // solve upward, prolong by interpolation.
    if (opts.nested_init && (grid.n_k >= 32 || grid.n_p >= 32)) {
        SchemeOptions coarse_opts = opts;
        coarse_opts.nested_init = grid.n_k / 2 >= 32 || grid.n_p / 2 >= 32;
        const Grid coarse = Grid::log_spaced(grid.K.front(), grid.K.back(),
                                             std::max(16, grid.n_k / 2), grid.P.front(),
                                             grid.P.back(), std::max(16, grid.n_p / 2));
        const SolveResult cr = solve(params, coarse, coarse_opts);
        for (int i = 0; i < grid.n_k; ++i)
            for (int j = 0; j < grid.n_p; ++j)
                result.value.at(i, j) = cr.value.value_at(grid.K[i], grid.P[j]);
    } else {
        result.value = initial_guess(params, grid);
    }

    const HjbOperator op(params, grid, opts.gamma_quad_nodes, opts.c_min);
    const std::size_t n = grid.size();
    const int nk = grid.n_k;
    const int np = grid.n_p;

    std::vector<double> v = std::move(result.value.v);
    std::vector<double> v_next(n, 0.0);
    std::vector<Control> policy(n);
    std::vector<double> rates(n, 0.0);

    int i_lo, i_hi, j_lo, j_hi;
    grid.interior_range(0.0, i_lo, i_hi, j_lo, j_hi);
    int ii_lo, ii_hi, jj_lo, jj_hi;  // one-node interior band for reporting
    ii_lo = 1;
    ii_hi = nk - 2;
    jj_lo = 1;
    jj_hi = np - 2;

    const int threads = std::max(1, opts.threads);
    std::vector<double> row_norm(nk, 0.0), row_int_norm(nk, 0.0), row_rate(nk, 0.0);

    // Refresh argmax controls and CFL rates from the current field.
    auto update_policy = [&]() {
        parallel_for(nk, threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                double rmax = 0.0;
                for (int j = 0; j < np; ++j) {
                    Control c;
                    op.rhs(v, static_cast<int>(i), j, &c);
                    policy[grid.idx(i, j)] = c;
                    const double r = op.node_rate(static_cast<int>(i), j, c);
                    rates[grid.idx(i, j)] = r;
                    rmax = std::max(rmax, r);
                }
                row_rate[i] = rmax;
            }
        });
        double rmax = 0.0;
        for (double r : row_rate) rmax = std::max(rmax, r);
        return rmax;
    };

    double max_rate = update_policy();
    double dtau = opts.cfl_safety / max_rate;

    SolveReport& rep = result.report;
    rep.residual = std::numeric_limits<double>::infinity();

    long iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        const bool refresh = (iter % std::max(1, opts.policy_update_every)) == 0 && iter > 0;
        if (refresh) {
            max_rate = update_policy();
            dtau = opts.cfl_safety / max_rate;
        }

        Norms norms;
        std::vector<Norms> row_norms(nk);
        parallel_for(nk, threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                Norms local;
                for (int j = 0; j < np; ++j) {
                    const std::size_t idx = grid.idx(i, j);
                    const double rhs = op.rhs_frozen(v, static_cast<int>(i), j, policy[idx]);
                    const double resid = rhs - params.rho * v[idx];
                    v_next[idx] = v[idx] + dtau * resid;
                    const double scaled =
                        std::abs(resid) / (1.0 + std::abs(params.rho * v[idx]));
                    if (!std::isfinite(resid)) {
                        local.finite = false;
                        local.bad_i = static_cast<int>(i);
                        local.bad_j = j;
                    }
                    local.residual = std::max(local.residual, scaled);
                    if (static_cast<int>(i) >= ii_lo && static_cast<int>(i) <= ii_hi &&
                        j >= jj_lo && j <= jj_hi)
                        local.interior_residual = std::max(local.interior_residual, scaled);
                }
                row_norms[i] = local;
            }
        });
        for (const auto& rn : row_norms) {
            norms.residual = std::max(norms.residual, rn.residual);
            norms.interior_residual = std::max(norms.interior_residual, rn.interior_residual);
            if (!rn.finite) {
                norms.finite = false;
                norms.bad_i = rn.bad_i;
                norms.bad_j = rn.bad_j;
            }
        }
        if (!norms.finite)
            throw std::runtime_error("solve: divergence (non-finite update) at node (" +
                                     std::to_string(norms.bad_i) + "," +
                                     std::to_string(norms.bad_j) + ")");

        std::swap(v, v_next);
        rep.residual = norms.residual;
        rep.interior_residual = norms.interior_residual;
        rep.final_update = dtau * norms.residual;
        if (iter % 25 == 0) rep.residual_history.push_back(norms.residual);

        if (norms.residual <= opts.tol) {
            rep.converged = true;
            ++iter;
            break;
        }
    }
    rep.iterations = iter;
    rep.dtau = dtau;
    rep.residual_history.push_back(rep.residual);
    rep.foc_clamp_events = op.foc_clamp_events();

    // Final consistent policy extraction from the converged field.
    result.value.grid = grid;
    result.value.v = std::move(v);
    result.policy = PolicyField(grid);
    parallel_for(nk, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            for (int j = 0; j < np; ++j) {
                Control c;
                op.rhs(result.value.v, static_cast<int>(i), j, &c);
                result.policy.C[grid.idx(i, j)] = c.C;
                result.policy.theta[grid.idx(i, j)] = c.theta;
            }
    });

    // Domain truncation diagnostics: outward optimal drift on the far edges.
    int out_k = 0, out_p = 0;
    for (int j = 0; j < np; ++j) {
        const std::size_t idx = grid.idx(nk - 1, j);
        const Control c{result.policy.C[idx], result.policy.theta[idx]};
        if (drift_capital({grid.K[nk - 1], grid.P[j]}, c, params) > 0.0) ++out_k;
    }
    for (int i = 0; i < nk; ++i) {
        const std::size_t idx = grid.idx(i, np - 1);
        const Control c{result.policy.C[idx], result.policy.theta[idx]};
        if (drift_pollution({grid.K[i], grid.P[np - 1]}, c, params) > 0.0) ++out_p;
    }
    rep.outward_drift_frac_k_hi = static_cast<double>(out_k) / np;
    rep.outward_drift_frac_p_hi = static_cast<double>(out_p) / nk;

    // Monotonicity of the converged field on the interior.
    double max_abs_vk = 0.0, max_abs_vp = 0.0;
    double min_vk = std::numeric_limits<double>::infinity();
    double max_vp = -std::numeric_limits<double>::infinity();
    for (int i = ii_lo; i <= ii_hi; ++i)
        for (int j = jj_lo; j <= jj_hi; ++j) {
            const double vk = result.value.grad_K(i, j);
            const double vp = result.value.grad_P(i, j);
            max_abs_vk = std::max(max_abs_vk, std::abs(vk));
            max_abs_vp = std::max(max_abs_vp, std::abs(vp));
            min_vk = std::min(min_vk, vk);
            max_vp = std::max(max_vp, vp);
        }
    rep.monotone_in_K = min_vk >= -opts.mono_tol * std::max(1.0, max_abs_vk);
    rep.monotone_in_P = max_vp <= opts.mono_tol * std::max(1.0, max_abs_vp);

    return result;
}

}  // namespace ecorisk
