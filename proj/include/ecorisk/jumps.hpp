#pragma once

#include <cstddef>
#include <vector>

#include "ecorisk/model.hpp"
#include "ecorisk/rng.hpp"

namespace ecorisk {

// One disaster arrival. mark = 1 exactly for the unmarked variants.
struct JumpEvent {
    double time = 0.0;
    double mark = 1.0;
    double survival = 1.0;  // omega applied to capital at the event
    double k_before = 0.0;  // capital immediately before the loss
    double p_at = 0.0;      // pollution at the event (continuous across it)
};

// Homogeneous Poisson arrival times on (0, horizon], exponential inter-arrivals.
std::vector<double> sample_hpp(double lambda, double horizon, Rng& rng);

// Thinning over one step (t, t+dt]: candidates at rate majorant_rate, each
// accepted with probability total_event_rate(p_current)/majorant_rate.
// Returns accepted times in increasing order. Throws std::runtime_error if
// the majorant does not dominate the current rate (a silent bias otherwise).
std::vector<double> thin_step(double p_current, double t, double dt, double majorant_rate,
                              const ModelParams& params, Rng& rng);

// In-place variant used by the path simulator to avoid per-step allocation.
void thin_step_into(double p_current, double t, double dt, double majorant_rate,
                    const ModelParams& params, Rng& rng, std::vector<double>& out);

// Draws a disaster magnitude from the conditional mark law at pollution p.
// DISCRETE: atom zeta_i with probability proportional to the hazard kernel
// times w_i; GAMMA: Gamma(shape=p, scale=1).
double sample_mark(double p, const MarkModel& marks, const ModelParams& params, Rng& rng);

// Trapezoidal integral of the total event rate along uniformly sampled
// pollution values: int_0^T lambda(P_s) nu(R+) ds.
double compensator_integral(const std::vector<double>& pollution, double dt,
                            const ModelParams& params);

}  // namespace ecorisk
