#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "ecorisk/grid.hpp"
#include "ecorisk/jumps.hpp"
#include "ecorisk/model.hpp"
#include "ecorisk/rng.hpp"

namespace ecorisk {

// Feedback rule mapping states to controls. Emitted controls always satisfy
// the admissibility bounds; out-of-range raw values are clamped and counted.
class Policy {
  public:
    enum class Kind { Constant, Candidate, Field };

    static Policy constant(double C0, double theta0);
    // C = psi*K plus the bang-bang abatement rule on the exact candidate
    // gradients (psi K)^(-eps) and -x P^beta.
    static Policy candidate(double psi, double x);
    static Policy field(std::shared_ptr<const PolicyField> field);

    Control at(const State& s, const ModelParams& params) const;
    // Hot-loop variant carrying a grid-cell cursor for field policies.
    Control at_hint(const State& s, const ModelParams& params, PolicyField::Cursor& cur) const;

    Kind kind() const { return kind_; }
    long clamp_count() const { return clamps_->load(); }

  private:
    Policy() : clamps_(std::make_shared<std::atomic<long>>(0)) {}

    Kind kind_ = Kind::Constant;
    double c0_ = 0.0, theta0_ = 0.0;               // Constant
    double psi_ = 0.0, x_ = 0.0;                   // Candidate
    std::shared_ptr<const PolicyField> field_;     // Field
    std::shared_ptr<std::atomic<long>> clamps_;
};

// One simulated trajectory on a uniform time grid. Capital is cadlag with
// downward jumps only; pollution is continuous across jump times. The state
// arrays hold post-jump values at each node.
struct PathRecord {
    double dt = 0.0;
    std::vector<double> K;
    std::vector<double> P;
    std::vector<double> C;
    std::vector<double> theta;
    std::vector<JumpEvent> events;
    bool floor_hit = false;   // consumption outran capital under a bad policy
    std::size_t n_steps = 0;  // completed steps (n_steps+1 valid state nodes)
    double max_abs_utility = 0.0;

    double time(std::size_t n) const { return n * dt; }
};

struct SimOptions {
    double capital_floor = 1e-12;
    double majorant_inflation = 1.5;  // covers within-step pollution growth
    double max_rate_dt = 0.1;         // validity bound on majorant*dt
};

// Integrates the controlled dynamics for any variant: explicit Euler drift in
// K, log-Euler in P (strict positivity), thinned state-dependent jump
// arrivals applied multiplicatively to capital after the continuous update.
void simulate_path(const ModelParams& params, const Policy& policy, State s0, double T,
                   double dt, Rng& rng, PathRecord& out, const SimOptions& opts = {});

PathRecord simulate_path(const ModelParams& params, const Policy& policy, State s0, double T,
                         double dt, Rng& rng, const SimOptions& opts = {});

// Trapezoidal int_0^T exp(-rho t) U(C_t, P_t) dt along a recorded path.
double discounted_utility(const PathRecord& path, const ModelParams& params);

struct EnsembleStats {
    double mean = 0.0;
    double stderror = 0.0;
    double tail_bound = 0.0;  // sup |U| on visited states * exp(-rho T)/rho
    std::size_t n_paths = 0;
    std::size_t floor_hits = 0;
};

using PathObserver = std::function<void(const PathRecord&, std::size_t path_index)>;

// Monte Carlo estimate of the discounted-utility objective. Path i draws its
// randomness from Rng::child(master_seed, i), so results are bit-identical
// across runs and thread counts. Throws std::runtime_error if more than 1% of
// paths terminate at the capital floor.
EnsembleStats estimate_value(const ModelParams& params, const Policy& policy, State s0,
                             std::size_t n_paths, double T, double dt,
                             std::uint64_t master_seed, int threads,
                             const PathObserver* observer = nullptr,
                             const SimOptions& opts = {});

}  // namespace ecorisk
