#include "ecorisk/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecorisk {

namespace {

double median_of(std::vector<double> vals) {
    if (vals.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t mid = vals.size() / 2;
    std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
    return vals[mid];
}

// Linear sample with boundary extrapolation along one K row of a value grid.
double row_sample(const std::vector<double>& data, const Grid& g, int j, double fi) {
    const int i0 = std::clamp(static_cast<int>(std::floor(fi)), 0, g.n_k - 2);
    const double s = fi - i0;
    return (1.0 - s) * data[g.idx(i0, j)] + s * data[g.idx(i0 + 1, j)];
}

struct OmegaDerivs {
    double om, om_K, om_P;
};

OmegaDerivs omega_with_derivs(double K, double P, const ModelParams& p) {
    OmegaDerivs d;
    d.om = survival_fraction(K, P, p);
    if (p.delta == 0.0) {
        d.om_K = 0.0;
        d.om_P = 0.0;
        return d;
    }
    const double pk = std::pow(P, p.xi);
    const double kk = std::pow(K, p.eta);
    d.om_K = -p.delta * pk * p.eta * (p.eta == 0.0 ? 0.0 : std::pow(K, p.eta - 1.0)) * d.om;
    d.om_P = -p.delta * (p.xi == 0.0 ? 0.0 : p.xi * std::pow(P, p.xi - 1.0)) * kk * d.om;
    return d;
}

}  // namespace

EnvelopeResiduals envelope_residuals(const ValueField& field, const ModelParams& params) {
    if (params.sigma_P > 0.0)
        throw std::invalid_argument(
            "envelope_residuals: diffusive variants need third derivatives (unsupported)");
    if (params.marks.kind != MarkKind::None)
        throw std::invalid_argument("envelope_residuals: only unmarked variants are supported");

    const Grid& g = field.grid;
    const std::vector<double>& v = field.v;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    EnvelopeResiduals out;
    out.grid = g;
    out.res_K.assign(g.size(), nan);
    out.res_P.assign(g.size(), nan);

    // Central gradient of v in K on the full grid (one-sided at the edges)
    // so that displaced v_K(omega K, P) can be interpolated along each row.
    std::vector<double> vk_grid(g.size(), 0.0);
    for (int i = 0; i < g.n_k; ++i)
        for (int j = 0; j < g.n_p; ++j) vk_grid[g.idx(i, j)] = field.grad_K(i, j);

    std::vector<double> samples_K, samples_P;
    samples_K.reserve(g.size());
    samples_P.reserve(g.size());

    for (int i = 1; i < g.n_k - 1; ++i) {
        const double K = g.K[i];
        for (int j = 1; j < g.n_p - 1; ++j) {
            const double P = g.P[j];
            const std::size_t idx = g.idx(i, j);

            // Second-order derivatives on the uniform log mesh.
            const double vx = (v[g.idx(i + 1, j)] - v[g.idx(i - 1, j)]) / (2.0 * g.hx);
            const double vy = (v[g.idx(i, j + 1)] - v[g.idx(i, j - 1)]) / (2.0 * g.hy);
            const double vxx =
                (v[g.idx(i + 1, j)] - 2.0 * v[idx] + v[g.idx(i - 1, j)]) / (g.hx * g.hx);
            const double vyy =
                (v[g.idx(i, j + 1)] - 2.0 * v[idx] + v[g.idx(i, j - 1)]) / (g.hy * g.hy);
            const double vxy = (v[g.idx(i + 1, j + 1)] - v[g.idx(i + 1, j - 1)] -
                                v[g.idx(i - 1, j + 1)] + v[g.idx(i - 1, j - 1)]) /
                               (4.0 * g.hx * g.hy);

            const double v_K = vx / K;
            const double v_P = vy / P;
            const double v_KK = (vxx - vx) / (K * K);
            const double v_PP = (vyy - vy) / (P * P);
            const double v_KP = vxy / (K * P);

            if (v_K <= 0.0) continue;  // no interior consumption optimum here

            const double C = foc_consumption(v_K, params);
            const double theta = foc_abatement(v_K, v_P, params, 0.0);
            const double bK = (1.0 - theta) * params.A * K - C;
            const double bP = (params.phi - params.sigma_ab * theta) * params.A * K -
                              params.alpha * P;

            const OmegaDerivs od = omega_with_derivs(K, P, params);
            const double fi_disp = i + std::log(od.om) / g.hx;
            const double v_disp = row_sample(v, g, j, fi_disp);
            const double vk_disp = row_sample(vk_grid, g, j, fi_disp);
            const double lam = intensity(P, params);

            const double lhs_K = params.rho * v_K;
            const double rhs_K = bK * v_KK + (1.0 - theta) * params.A * v_K +
                                 (params.phi - params.sigma_ab * theta) * params.A * v_P +
                                 bP * v_KP +
                                 lam * (vk_disp * (od.om + K * od.om_K) - v_K);

            // v_P at the displaced point, from the central y-difference of
            // the two neighbouring rows sampled at omega*K.
            const double vp_disp = (row_sample(v, g, j + 1, fi_disp) -
                                    row_sample(v, g, j - 1, fi_disp)) /
                                   (2.0 * g.hy * P);

            const double lhs_P = params.rho * v_P;
            const double rhs_P = -params.chi * std::pow(P, params.beta) + bK * v_KP +
                                 bP * v_PP - params.alpha * v_P +
                                 params.lambda1 * (v_disp - v[idx]) +
                                 lam * (vk_disp * K * od.om_P + vp_disp - v_P);

            out.res_K[idx] = std::abs(lhs_K - rhs_K);
            out.res_P[idx] = std::abs(lhs_P - rhs_P);
            samples_K.push_back(out.res_K[idx]);
            samples_P.push_back(out.res_P[idx]);
        }
    }

    out.median_K = median_of(std::move(samples_K));
    out.median_P = median_of(std::move(samples_P));
    return out;
}

double envelope_residual_candidate(const State& s, const CandidateValue& cand,
                                   const ModelParams& params, bool k_identity) {
    const double K = s.K;
    const double P = s.P;
    const double v_K = cand.grad_K(s);
    const double v_P = cand.grad_P(s);
    const double v_KK = -cand.epsilon * std::pow(cand.psi, -cand.epsilon) *
                        std::pow(K, -cand.epsilon - 1.0);
    const double v_PP = -cand.x * cand.beta * std::pow(P, cand.beta - 1.0);
    const double v_KP = 0.0;

    const double C = cand.psi * K;
    const double theta = foc_abatement(v_K, v_P, params, 0.0);
    const double bK = (1.0 - theta) * params.A * K - C;
    const double bP = (params.phi - params.sigma_ab * theta) * params.A * K - params.alpha * P;

    const OmegaDerivs od = omega_with_derivs(K, P, params);
    const double lam = intensity(P, params);
    const State disp{od.om * K, P};

    if (k_identity) {
        const double lhs = params.rho * v_K;
        const double rhs = bK * v_KK + (1.0 - theta) * params.A * v_K +
                           (params.phi - params.sigma_ab * theta) * params.A * v_P + bP * v_KP +
                           lam * (cand.grad_K(disp) * (od.om + K * od.om_K) - v_K);
        return std::abs(lhs - rhs);
    }
    const double lhs = params.rho * v_P;
    const double rhs = -params.chi * std::pow(P, params.beta) + bK * v_KP + bP * v_PP -
                       params.alpha * v_P +
                       params.lambda1 * (cand.value(disp) - cand.value(s)) +
                       lam * (cand.grad_K(disp) * K * od.om_P + cand.grad_P(disp) - v_P);
    return std::abs(lhs - rhs);
}

}  // namespace ecorisk
