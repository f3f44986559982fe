#pragma once

#include <string>
#include <vector>

namespace ecorisk {

// Jump mechanism of the growth-environment model.
//   HPP              constant hazard, unit marks, deterministic pollution
//   NHPP             affine hazard lambda0 + lambda1*P, unit marks
//   JUMP_DIFFUSION   affine hazard plus geometric Brownian noise in P
//   PRM              marked jumps (random magnitudes) plus Brownian P
//   PRM_NO_DIFFUSION marked jumps, deterministic pollution
enum class Variant { HPP, NHPP, JumpDiffusion, Prm, PrmNoDiffusion };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

enum class MarkKind { None, Discrete, Gamma };

const char* to_string(MarkKind k);
MarkKind mark_kind_from_string(const std::string& s);

// Finite mark measure nu for the marked-jump variants. DISCRETE holds atoms
// zeta_i with positive weights w_i; GAMMA is the kernel lambda(P) times a
// Gamma(shape=P, scale=1) density, treated as its own case rather than being
// squeezed into the discrete representation.
struct MarkModel {
    MarkKind kind = MarkKind::None;
    std::vector<double> atoms;
    std::vector<double> weights;

    double total_mass() const;    // nu(R+); 1 for NONE/GAMMA
    double second_moment() const; // finite by construction for DISCRETE
    void validate() const;
};

// All scalar model constants. Validation happens once in validate();
// downstream operations assume the invariants hold.
struct ModelParams {
    double rho = 0.05;      // discount rate
    double A = 0.1;         // productivity, Y(K) = A*K
    double phi = 0.3;       // emission intensity per unit output
    double sigma_ab = 1.0;  // abatement efficiency
    double alpha = 0.02;    // pollution decay rate in [0,1)
    double chi = 1.0;       // pollution disutility weight
    double epsilon = 2.0;   // relative risk aversion, != 1
    double beta = 0.5;      // pollution disutility curvature
    double delta = 0.0;     // damage scale (0 disables capital loss)
    double xi = 1.0;        // damage sensitivity to pollution
    double eta = 0.0;       // damage sensitivity to capital
    double lambda0 = 0.0;   // baseline hazard
    double lambda1 = 0.0;   // hazard slope in pollution
    double sigma_P = 0.0;   // pollution volatility
    Variant variant = Variant::HPP;
    MarkModel marks;

    // Upper bound on the abatement share keeping emissions nonnegative.
    double bar_theta() const;

    void validate() const;  // throws std::invalid_argument on violation
};

struct State {
    double K = 1.0;  // capital stock, > 0
    double P = 1.0;  // pollution stock, > 0
};

struct Control {
    double C = 0.0;      // consumption >= 0
    double theta = 0.0;  // abatement share in [0, bar_theta]
};

// Instantaneous utility C^(1-eps)/(1-eps) - chi*P^(1+beta)/(1+beta).
// Throws std::domain_error for c <= 0 when epsilon > 1 (utility is -inf).
double utility(double c, double p, const ModelParams& params);

// The two utility terms separately (the P term is control-independent, which
// the solver exploits when ranking consumption candidates).
double consumption_utility(double c, const ModelParams& params);
double pollution_disutility(double p, const ModelParams& params);

// Marginal utility of consumption, c^(-eps).
double marginal_utility(double c, const ModelParams& params);

// Fraction of capital surviving a disaster, exp(-delta*p^xi*k^eta*zeta).
// zeta = 1 recovers the unmarked damage function.
double survival_fraction(double k, double p, const ModelParams& params, double zeta = 1.0);

// Net emission flow (phi - sigma_ab*theta)*A*k; nonnegative on [0, bar_theta].
double emissions(double theta, double k, const ModelParams& params);

double drift_capital(const State& s, const Control& c, const ModelParams& params);
double drift_pollution(const State& s, const Control& c, const ModelParams& params);

// Disaster hazard rate lambda0 + lambda1*p.
double intensity(double p, const ModelParams& params);

// Hazard kernel against the mark measure; for the shipped mark models the
// kernel does not vary with zeta, so this equals intensity(p).
double intensity_marked(double p, double zeta, const ModelParams& params);

// Total event rate intensity(p) * nu(R+), the rate at which any mark arrives.
double total_event_rate(double p, const ModelParams& params);

// Control-dependent part of the generator:
// U(C,P) + v_K*b_K + v_P*b_P. Affine in theta, strictly concave in C.
double hamiltonian(const Control& c, const State& s, double v_K, double v_P,
                   const ModelParams& params);

// Interior optimizer of the Hamiltonian in C: v_K^(-1/eps).
// Throws std::domain_error when v_K <= 0 (no interior optimum; a clamp here
// would mask solver bugs).
double foc_consumption(double v_K, const ModelParams& params);

// Bang-bang abatement rule from the sign of v_K + sigma_ab*v_P.
// Ties within +/-tol resolve to bar_theta.
double foc_abatement(double v_K, double v_P, const ModelParams& params, double tol);

// Power-separable candidate value function
//   v(K,P) = psi^(-eps) K^(1-eps)/(1-eps) - x P^(1+beta)/(1+beta)
// with exact gradients v_K = (psi K)^(-eps), v_P = -x P^beta.
struct CandidateValue {
    double psi = 0.0;
    double x = 0.0;
    double epsilon = 0.0;
    double beta = 0.0;

    CandidateValue(double psi_, double x_, const ModelParams& params);

    double value(const State& s) const;
    double grad_K(const State& s) const;
    double grad_P(const State& s) const;
};

struct DecoupledCoefficients {
    double psi = 0.0;
    double x = 0.0;
};

// Coefficients making the candidate an exact solution when the jump term and
// the emission coupling vanish (phi = 0, lambda == 0, sigma_P = 0):
//   psi = (rho - (1-eps)A)/eps,   x = chi/(rho + alpha(1+beta)).
// Throws std::domain_error if rho <= (1-eps)A (value infinite).
DecoupledCoefficients decoupled_coefficients(const ModelParams& params);

}  // namespace ecorisk
