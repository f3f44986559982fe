#include "ecorisk/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ecorisk {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void require(bool ok, const char* msg) {
    if (!ok) fail(msg);
}

// x^e with fast paths for the exponents that occur in the utility and damage
// functions of the shipped configurations; called once per simulation step.
double fast_pow(double x, double e) {
    if (e == 1.0) return x;
    if (e == -1.0) return 1.0 / x;
    if (e == 2.0) return x * x;
    if (e == 0.5) return std::sqrt(x);
    if (e == 1.5) return x * std::sqrt(x);
    if (e == -0.5) return 1.0 / std::sqrt(x);
    if (e == 0.0) return 1.0;
    return std::pow(x, e);
}

}  // namespace

const char* to_string(Variant v) {
    switch (v) {
        case Variant::HPP: return "HPP";
        case Variant::NHPP: return "NHPP";
        case Variant::JumpDiffusion: return "JUMP_DIFFUSION";
        case Variant::Prm: return "PRM";
        case Variant::PrmNoDiffusion: return "PRM_NO_DIFFUSION";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    if (s == "HPP") return Variant::HPP;
    if (s == "NHPP") return Variant::NHPP;
    if (s == "JUMP_DIFFUSION") return Variant::JumpDiffusion;
    if (s == "PRM") return Variant::Prm;
    if (s == "PRM_NO_DIFFUSION") return Variant::PrmNoDiffusion;
    fail("unknown variant: " + s);
}

const char* to_string(MarkKind k) {
    switch (k) {
        case MarkKind::None: return "NONE";
        case MarkKind::Discrete: return "DISCRETE";
        case MarkKind::Gamma: return "GAMMA";
    }
    return "?";
}

MarkKind mark_kind_from_string(const std::string& s) {
    if (s == "NONE") return MarkKind::None;
    if (s == "DISCRETE") return MarkKind::Discrete;
    if (s == "GAMMA") return MarkKind::Gamma;
    fail("unknown mark kind: " + s);
}

double MarkModel::total_mass() const {
    if (kind != MarkKind::Discrete) return 1.0;
    double m = 0.0;
    for (double w : weights) m += w;
    return m;
}

double MarkModel::second_moment() const {
    if (kind != MarkKind::Discrete) return 1.0;
    double m = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) m += weights[i] * atoms[i] * atoms[i];
    return m;
}

void MarkModel::validate() const {
    if (kind == MarkKind::Discrete) {
        require(!atoms.empty(), "DISCRETE mark model needs at least one atom");
        require(atoms.size() == weights.size(), "mark atoms/weights size mismatch");
        for (double z : atoms) require(z > 0.0 && std::isfinite(z), "mark atoms must be positive");
        for (double w : weights)
            require(w > 0.0 && std::isfinite(w), "mark weights must be positive");
        require(std::isfinite(second_moment()), "mark measure needs a finite second moment");
    } else {
        require(atoms.empty() && weights.empty(), "atoms/weights only apply to DISCRETE marks");
    }
}

double ModelParams::bar_theta() const { return std::min(1.0, phi / sigma_ab); }

void ModelParams::validate() const {
    require(rho > 0.0, "rho must be > 0");
    require(A > 0.0, "A must be > 0");
    // phi = 0 is admitted (with bar_theta = 0) so the decoupled closed-form
    // regime is representable.
    require(phi >= 0.0, "phi must be >= 0");
    require(sigma_ab > 0.0, "sigma_ab must be > 0");
    require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0,1)");
    require(chi > 0.0, "chi must be > 0");
    require(epsilon > 0.0 && epsilon != 1.0, "epsilon must be > 0 and != 1");
    require(beta > 0.0, "beta must be > 0");
    require(delta >= 0.0, "delta must be >= 0");
    require(xi >= 0.0, "xi must be >= 0");
    require(eta >= 0.0, "eta must be >= 0");
    require(lambda0 >= 0.0, "lambda0 must be >= 0");
    require(lambda1 >= 0.0, "lambda1 must be >= 0");
    require(sigma_P >= 0.0, "sigma_P must be >= 0");

    const double bt = bar_theta();
    require(bt <= 1.0 && (bt > 0.0 || phi == 0.0), "bar_theta must lie in (0,1]");

    switch (variant) {
        case Variant::HPP:
            require(lambda1 == 0.0, "HPP requires lambda1 = 0");
            require(sigma_P == 0.0, "HPP requires sigma_P = 0");
            require(marks.kind == MarkKind::None, "HPP is an unmarked variant");
            break;
        case Variant::NHPP:
            require(sigma_P == 0.0, "NHPP requires sigma_P = 0");
            require(marks.kind == MarkKind::None, "NHPP is an unmarked variant");
            break;
        case Variant::JumpDiffusion:
            require(marks.kind == MarkKind::None, "JUMP_DIFFUSION is an unmarked variant");
            break;
        case Variant::Prm:
            require(marks.kind != MarkKind::None, "PRM requires a mark model");
            break;
        case Variant::PrmNoDiffusion:
            require(sigma_P == 0.0, "PRM_NO_DIFFUSION requires sigma_P = 0");
            require(marks.kind != MarkKind::None, "PRM_NO_DIFFUSION requires a mark model");
            break;
    }
    marks.validate();
}

double consumption_utility(double c, const ModelParams& params) {
    if (c < 0.0 || (c == 0.0 && params.epsilon > 1.0))
        throw std::domain_error("utility: consumption must be > 0 for epsilon > 1");
    return fast_pow(c, 1.0 - params.epsilon) / (1.0 - params.epsilon);
}

double pollution_disutility(double p, const ModelParams& params) {
    return params.chi * fast_pow(p, 1.0 + params.beta) / (1.0 + params.beta);
}

double utility(double c, double p, const ModelParams& params) {
    return consumption_utility(c, params) - pollution_disutility(p, params);
}

double marginal_utility(double c, const ModelParams& params) {
    return fast_pow(c, -params.epsilon);
}

double survival_fraction(double k, double p, const ModelParams& params, double zeta) {
    if (params.delta == 0.0) return 1.0;
    return std::exp(-params.delta * fast_pow(p, params.xi) * fast_pow(k, params.eta) * zeta);
}

double emissions(double theta, double k, const ModelParams& params) {
    if (theta < 0.0 || theta > params.bar_theta())
        fail("emissions: theta outside [0, bar_theta]");
    return (params.phi - params.sigma_ab * theta) * params.A * k;
}

double drift_capital(const State& s, const Control& c, const ModelParams& params) {
    return (1.0 - c.theta) * params.A * s.K - c.C;
}

double drift_pollution(const State& s, const Control& c, const ModelParams& params) {
    return (params.phi - params.sigma_ab * c.theta) * params.A * s.K - params.alpha * s.P;
}

double intensity(double p, const ModelParams& params) {
    return params.lambda0 + params.lambda1 * p;
}

double intensity_marked(double p, double /*zeta*/, const ModelParams& params) {
    return intensity(p, params);
}

double total_event_rate(double p, const ModelParams& params) {
    return intensity(p, params) * params.marks.total_mass();
}

double hamiltonian(const Control& c, const State& s, double v_K, double v_P,
                   const ModelParams& params) {
    return utility(c.C, s.P, params) + v_K * drift_capital(s, c, params) +
           v_P * drift_pollution(s, c, params);
}

double foc_consumption(double v_K, const ModelParams& params) {
    if (v_K <= 0.0)
        throw std::domain_error("foc_consumption: v_K must be > 0");
    return fast_pow(v_K, -1.0 / params.epsilon);
}

double foc_abatement(double v_K, double v_P, const ModelParams& params, double tol) {
    const double slope = v_K + params.sigma_ab * v_P;
    if (slope > tol) return 0.0;
    return params.bar_theta();
}

CandidateValue::CandidateValue(double psi_, double x_, const ModelParams& params)
    : psi(psi_), x(x_), epsilon(params.epsilon), beta(params.beta) {
    if (psi <= 0.0) fail("candidate value requires psi > 0");
    if (x < 0.0) fail("candidate value requires x >= 0");
}

double CandidateValue::value(const State& s) const {
    return fast_pow(psi, -epsilon) * fast_pow(s.K, 1.0 - epsilon) / (1.0 - epsilon) -
           x * fast_pow(s.P, 1.0 + beta) / (1.0 + beta);
}

double CandidateValue::grad_K(const State& s) const { return fast_pow(psi * s.K, -epsilon); }

double CandidateValue::grad_P(const State& s) const { return -x * fast_pow(s.P, beta); }

DecoupledCoefficients decoupled_coefficients(const ModelParams& params) {
    const double psi = (params.rho - (1.0 - params.epsilon) * params.A) / params.epsilon;
    if (psi <= 0.0)
        throw std::domain_error(
            "decoupled_coefficients: rho <= (1-epsilon)*A, value is infinite");
    const double x = params.chi / (params.rho + params.alpha * (1.0 + params.beta));
    return {psi, x};
}

}  // namespace ecorisk
