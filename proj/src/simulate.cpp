#include "ecorisk/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecorisk/parallel.hpp"

namespace ecorisk {

Policy Policy::constant(double C0, double theta0) {
    Policy p;
    p.kind_ = Kind::Constant;
    p.c0_ = C0;
    p.theta0_ = theta0;
    return p;
}

Policy Policy::candidate(double psi, double x) {
    Policy p;
    p.kind_ = Kind::Candidate;
    p.psi_ = psi;
    p.x_ = x;
    return p;
}

Policy Policy::field(std::shared_ptr<const PolicyField> field) {
    Policy p;
    p.kind_ = Kind::Field;
    p.field_ = std::move(field);
    return p;
}

Control Policy::at(const State& s, const ModelParams& params) const {
    PolicyField::Cursor cur;
    return at_hint(s, params, cur);
}

Control Policy::at_hint(const State& s, const ModelParams& params,
                        PolicyField::Cursor& cur) const {
    Control raw;
    switch (kind_) {
        case Kind::Constant:
            raw = {c0_, theta0_};
            break;
        case Kind::Candidate: {
            raw.C = psi_ * s.K;
            const double v_K = marginal_utility(psi_ * s.K, params);
            const double v_P = -x_ * std::pow(s.P, params.beta);
            raw.theta = foc_abatement(v_K, v_P, params, 0.0);
            break;
        }
        case Kind::Field:
            raw = field_->control_at(s.K, s.P, cur);
            break;
    }
    Control ctrl = raw;
    ctrl.C = std::max(0.0, ctrl.C);
    ctrl.theta = std::clamp(ctrl.theta, 0.0, params.bar_theta());
    if (ctrl.C != raw.C || ctrl.theta != raw.theta) clamps_->fetch_add(1);
    return ctrl;
}

void simulate_path(const ModelParams& params, const Policy& policy, State s0, double T,
                   double dt, Rng& rng, PathRecord& out, const SimOptions& opts) {
    if (!(s0.K > 0.0 && s0.P > 0.0)) throw std::invalid_argument("initial state must be positive");
    if (!(dt > 0.0 && T > 0.0)) throw std::invalid_argument("T and dt must be positive");

    const std::size_t n_steps = static_cast<std::size_t>(std::llround(T / dt));
    if (std::abs(n_steps * dt - T) > 1e-9 * T)
        throw std::invalid_argument("T must be a multiple of dt");

    out.dt = dt;
    out.K.assign(n_steps + 1, 0.0);
    out.P.assign(n_steps + 1, 0.0);
    out.C.assign(n_steps + 1, 0.0);
    out.theta.assign(n_steps + 1, 0.0);
    out.events.clear();
    out.floor_hit = false;
    out.max_abs_utility = 0.0;

    const bool diffusive = params.sigma_P > 0.0;
    const bool marked =
        params.marks.kind != MarkKind::None;
    const double sqrt_dt = std::sqrt(dt);
    const double half_var = 0.5 * params.sigma_P * params.sigma_P;
    const double sig_A = params.sigma_ab;

    double K = s0.K;
    double y = std::log(s0.P);
    double P = s0.P;
    double max_u = 0.0;

    std::vector<double> accepted;
    accepted.reserve(4);
    PolicyField::Cursor cursor;

    std::size_t n = 0;
    for (;; ++n) {
        const Control ctrl = policy.at_hint({K, P}, params, cursor);
        out.K[n] = K;
        out.P[n] = P;
        out.C[n] = ctrl.C;
        out.theta[n] = ctrl.theta;
        const double u = utility(ctrl.C, P, params);
        max_u = std::max(max_u, std::abs(u));
        if (n == n_steps) break;

        const double t = n * dt;

        // Candidate disasters in (t, t+dt] by thinning under a majorant that
        // covers within-step pollution growth; accepted with the rate at the
        // step's opening state.
        double majorant = 0.0;
        if (params.lambda0 > 0.0 || params.lambda1 > 0.0) {
            majorant = total_event_rate(opts.majorant_inflation * P, params);
            if (majorant * dt > opts.max_rate_dt)
                throw std::runtime_error("simulate_path: majorant*dt exceeds validity bound; "
                                         "reduce dt");
            thin_step_into(P, t, dt, majorant, params, rng, accepted);
        } else {
            accepted.clear();
        }

        // Continuous update: explicit Euler drift in K, log-Euler in P.
        const double b_K = (1.0 - ctrl.theta) * params.A * K - ctrl.C;
        const double b_P = (params.phi - sig_A * ctrl.theta) * params.A * K - params.alpha * P;
        K += b_K * dt;
        double dy = (b_P / P - half_var) * dt;
        if (diffusive) dy += params.sigma_P * sqrt_dt * rng.normal();
        y += dy;
        P = std::exp(y);

        // Jumps after the continuous update, in event-time order.
        for (double s : accepted) {
            JumpEvent ev;
            ev.time = s;
            ev.mark = marked ? sample_mark(P, params.marks, params, rng) : 1.0;
            ev.k_before = K;
            ev.p_at = P;
            ev.survival = survival_fraction(K, P, params, ev.mark);
            K *= ev.survival;
            out.events.push_back(ev);
        }

        if (K <= opts.capital_floor) {
            out.floor_hit = true;
            out.K[n + 1] = K;
            out.P[n + 1] = P;
            out.C[n + 1] = 0.0;
            out.theta[n + 1] = 0.0;
            ++n;
            break;
        }
    }
    out.n_steps = n;
    out.max_abs_utility = max_u;
}

PathRecord simulate_path(const ModelParams& params, const Policy& policy, State s0, double T,
                         double dt, Rng& rng, const SimOptions& opts) {
    PathRecord rec;
    simulate_path(params, policy, s0, T, dt, rng, rec, opts);
    return rec;
}

double discounted_utility(const PathRecord& path, const ModelParams& params) {
    const std::size_t n = path.n_steps;
    if (n == 0) return 0.0;
    const double df = std::exp(-params.rho * path.dt);
    double disc = 1.0;
    double prev = utility(path.C[0], path.P[0], params);
    double sum = 0.0;
    const std::size_t last = path.floor_hit ? n - 1 : n;
    for (std::size_t m = 1; m <= last; ++m) {
        disc *= df;
        const double cur = disc * utility(path.C[m], path.P[m], params);
        sum += 0.5 * (prev + cur) * path.dt;
        prev = cur;
    }
    return sum;
}

EnsembleStats estimate_value(const ModelParams& params, const Policy& policy, State s0,
                             std::size_t n_paths, double T, double dt,
                             std::uint64_t master_seed, int threads,
                             const PathObserver* observer, const SimOptions& opts) {
    if (n_paths < 2) throw std::invalid_argument("estimate_value: n_paths must be >= 2");

    std::vector<double> values(n_paths, 0.0);
    std::vector<double> max_us(n_paths, 0.0);
    std::vector<unsigned char> floored(n_paths, 0);

    parallel_for(n_paths, threads, [&](std::size_t lo, std::size_t hi) {
        PathRecord rec;
        for (std::size_t i = lo; i < hi; ++i) {
            Rng rng = Rng::child(master_seed, i);
            simulate_path(params, policy, s0, T, dt, rng, rec, opts);
            values[i] = discounted_utility(rec, params);
            max_us[i] = rec.max_abs_utility;
            floored[i] = rec.floor_hit ? 1 : 0;
            if (observer) (*observer)(rec, i);
        }
    });

    EnsembleStats stats;
    stats.n_paths = n_paths;
    for (auto f : floored) stats.floor_hits += f;
    if (stats.floor_hits * 100 > n_paths)
        throw std::runtime_error("estimate_value: more than 1% of paths hit the capital floor");

    const double mean = pairwise_sum(values) / static_cast<double>(n_paths);
    std::vector<double> sq(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
    const double var = pairwise_sum(sq) / static_cast<double>(n_paths - 1);
    stats.mean = mean;
    stats.stderror = std::sqrt(var / static_cast<double>(n_paths));

    double max_u = 0.0;
    for (double m : max_us) max_u = std::max(max_u, m);
    stats.tail_bound = max_u * std::exp(-params.rho * T) / params.rho;
    return stats;
}

}  // namespace ecorisk
