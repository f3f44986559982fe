#include "ecorisk/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>

#include "ecorisk/io.hpp"
#include "ecorisk/verify.hpp"

namespace ecorisk {

namespace {

namespace fs = std::filesystem;

struct RunContext {
    RunConfig cfg;
    std::string dir;
    std::string hash;
    std::uint64_t seed = 0;
    int threads = 1;
};

RunContext prepare(const RunConfig& config, const RunOptions& opts) {
    RunContext ctx;
    ctx.cfg = config;
    if (opts.seed_override) ctx.cfg.simulation.master_seed = *opts.seed_override;
    if (opts.outdir_override) ctx.cfg.outdir = *opts.outdir_override;
    ctx.seed = ctx.cfg.simulation.master_seed;
    ctx.threads = std::max(1, opts.threads);
    ctx.hash = ctx.cfg.config_hash();
    ctx.dir = ctx.cfg.outdir + "/" + ctx.cfg.run_id;
    std::error_code ec;
    fs::create_directories(ctx.dir, ec);
    if (ec) throw IoError("cannot create output directory: " + ctx.dir);
    return ctx;
}

SolveResult solve_for(const RunContext& ctx) {
    SchemeOptions scheme = ctx.cfg.scheme;
    scheme.threads = ctx.threads;
    return solve(ctx.cfg.params, ctx.cfg.grid.make(), scheme);
}

Policy make_policy(const RunContext& ctx, const SolveResult* solved) {
    const auto& spec = ctx.cfg.policy;
    if (spec.kind == "constant") return Policy::constant(spec.C, spec.theta);
    if (spec.kind == "candidate") {
        const double psi =
            (ctx.cfg.params.rho - (1.0 - ctx.cfg.params.epsilon) * ctx.cfg.params.A) /
            ctx.cfg.params.epsilon;
        const double x = ctx.cfg.params.chi /
                         (ctx.cfg.params.rho + ctx.cfg.params.alpha * (1.0 + ctx.cfg.params.beta));
        if (psi <= 0.0) throw ConfigError("candidate policy: rho <= (1-epsilon)*A");
        return Policy::candidate(psi, x);
    }
    if (!solved) throw ConfigError("field policy requires a solve");
    return Policy::field(std::make_shared<PolicyField>(solved->policy));
}

void write_checks_csv(const std::string& path, const VerificationReport& report,
                      const std::string& hash, std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file: " + path);
    out << "# config_hash=" << hash << " master_seed=" << seed << "\n";
    out << "name,statistic,tolerance,pass\n";
    for (const auto& c : report.checks)
        out << c.name << ',' << format_double(c.statistic) << ',' << format_double(c.tolerance)
            << ',' << (c.pass ? 1 : 0) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

bool decoupled_regime(const ModelParams& p) {
    return p.phi == 0.0 && p.lambda0 == 0.0 && p.lambda1 == 0.0 && p.sigma_P == 0.0;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericalFailure;
    }
}

}  // namespace

int cmd_solve(const RunConfig& config, const RunOptions& opts) {
    return guarded([&] {
        const RunContext ctx = prepare(config, opts);
        const SolveResult res = solve_for(ctx);
        write_convergence_json(ctx.dir + "/convergence.json", res.report, ctx.hash, ctx.seed);
        if (!res.report.converged) {
            std::cerr << "solver did not converge within max_iters (residual "
                      << res.report.residual << ")\n";
            return static_cast<int>(kNumericalFailure);
        }
        write_value_policy_csv(ctx.dir + "/value.csv", ctx.dir + "/policy.csv", res.value,
                               res.policy, ctx.hash, ctx.seed);
        return static_cast<int>(kOk);
    });
}

int cmd_simulate(const RunConfig& config, const RunOptions& opts) {
    return guarded([&] {
        const RunContext ctx = prepare(config, opts);
        std::unique_ptr<SolveResult> solved;
        if (ctx.cfg.policy.kind == "field") {
            solved = std::make_unique<SolveResult>(solve_for(ctx));
            if (!solved->report.converged) return static_cast<int>(kNumericalFailure);
        }
        const Policy policy = make_policy(ctx, solved.get());
        const State s0 = ctx.cfg.effective_probes().front();
        const auto& sim = ctx.cfg.simulation;

        const EnsembleStats st = estimate_value(ctx.cfg.params, policy, s0, sim.n_paths, sim.T,
                                                sim.dt, ctx.seed, ctx.threads);

        nlohmann::json j;
        j["config_hash"] = ctx.hash;
        j["master_seed"] = ctx.seed;
        j["state0"] = {s0.K, s0.P};
        j["mean"] = st.mean;
        j["stderr"] = st.stderror;
        j["tail_bound"] = st.tail_bound;
        j["n_paths"] = st.n_paths;
        j["floor_hits"] = st.floor_hits;
        j["policy_clamp_count"] = policy.clamp_count();
        write_json(ctx.dir + "/summary.json", j);

        if (sim.dump_paths > 0) {
            fs::create_directories(ctx.dir + "/paths");
            for (int i = 0; i < sim.dump_paths; ++i) {
                Rng rng = Rng::child(ctx.seed, static_cast<std::uint64_t>(i));
                const PathRecord rec =
                    simulate_path(ctx.cfg.params, policy, s0, sim.T, sim.dt, rng);
                char name[64];
                std::snprintf(name, sizeof(name), "/paths/path_%04d.csv", i);
                write_path_csv(ctx.dir + name, rec, ctx.hash, ctx.seed);
            }
        }
        return static_cast<int>(kOk);
    });
}

int cmd_verify(const RunConfig& config, const RunOptions& opts) {
    return guarded([&] {
        const RunContext ctx = prepare(config, opts);
        const auto& p = ctx.cfg.params;
        const auto& sim = ctx.cfg.simulation;
        const auto& vf = ctx.cfg.verify;
        const std::vector<State> probes = ctx.cfg.effective_probes();
        const std::vector<Control> sub = ctx.cfg.effective_suboptimal();

        const SolveResult res = solve_for(ctx);
        if (!res.report.converged) {
            std::cerr << "solver did not converge; verification aborted\n";
            return static_cast<int>(kNumericalFailure);
        }
        write_value_policy_csv(ctx.dir + "/value.csv", ctx.dir + "/policy.csv", res.value,
                               res.policy, ctx.hash, ctx.seed);
        write_convergence_json(ctx.dir + "/convergence.json", res.report, ctx.hash, ctx.seed);

        VerificationReport report;

        // Discrete fixed-point and shape diagnostics of the solved field.
        {
            CheckEntry e;
            e.name = "fixed_point_residual";
            e.statistic = res.report.interior_residual;
            e.tolerance = 10.0 * ctx.cfg.scheme.tol;
            e.pass = e.statistic <= e.tolerance;
            e.provenance = "converged field satisfies the discrete stationary equation";
            report.add(std::move(e));

            CheckEntry m;
            m.name = "field_monotonicity";
            m.statistic = (res.report.monotone_in_K && res.report.monotone_in_P) ? 0.0 : 1.0;
            m.tolerance = 0.0;
            m.pass = res.report.monotone_in_K && res.report.monotone_in_P;
            m.provenance = "value is nondecreasing in capital and nonincreasing in pollution";
            report.add(std::move(m));
        }

        if (decoupled_regime(p))
            check_candidate_closed_form(p, ctx.cfg.grid.make(), ctx.cfg.scheme, probes,
                                        sim.n_paths, sim.T, sim.dt, ctx.seed, ctx.threads,
                                        report);

        check_mc_vs_solver(p, res.value, res.policy, probes, sim.n_paths, sim.T, sim.dt, sub,
                           vf.suboptimal_paths, vf.suboptimal_T, vf.grid_error_budget, ctx.seed,
                           ctx.threads, report);

        const Policy field_policy = Policy::field(std::make_shared<PolicyField>(res.policy));
        const ValueFn value = value_fn_of(res.value);
        const State center = probes[probes.size() / 2];

        check_martingale(p, field_policy, value, center, vf.martingale_paths, vf.martingale_T,
                         sim.dt, ctx.seed, ctx.threads, report);
        check_transversality(p, field_policy, value, center, vf.transversality_horizons,
                             vf.transversality_paths, sim.dt, ctx.seed, ctx.threads, report);
        check_dpp(p, res.value, res.policy, vf.dpp_horizon, probes, vf.dpp_paths, sim.dt, sub,
                  vf.grid_error_budget, ctx.seed, ctx.threads, report);
        if (p.lambda0 > 0.0 || p.lambda1 > 0.0)
            check_jump_statistics(p, ctx.seed, report);

        nlohmann::json j = report.to_json();
        j["config_hash"] = ctx.hash;
        j["master_seed"] = ctx.seed;
        j["run_id"] = ctx.cfg.run_id;
        j["variant"] = to_string(p.variant);
        write_json(ctx.dir + "/report.json", j);
        write_checks_csv(ctx.dir + "/checks.csv", report, ctx.hash, ctx.seed);

        for (const auto& c : report.checks)
            std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (statistic "
                      << c.statistic << ", tolerance " << c.tolerance << ")\n";
        return static_cast<int>(report.all_pass() ? kOk : kChecksFailed);
    });
}

int cmd_sweep(const RunConfig& config, const RunOptions& opts, const std::string& param,
              const std::vector<double>& values) {
    return guarded([&] {
        if (values.empty()) throw ConfigError("sweep: no values given");
        const RunContext ctx = prepare(config, opts);

        std::ofstream out(ctx.dir + "/sweep_summary.csv");
        if (!out) throw IoError("cannot open sweep summary");
        out << "# config_hash=" << ctx.hash << " master_seed=" << ctx.seed << "\n";
        out << param << ",v_center,iterations,residual\n";

        for (double val : values) {
            RunConfig cfg = ctx.cfg;
            ModelParams& m = cfg.params;
            if (param == "rho") m.rho = val;
            else if (param == "A") m.A = val;
            else if (param == "phi") m.phi = val;
            else if (param == "sigma_ab") m.sigma_ab = val;
            else if (param == "alpha") m.alpha = val;
            else if (param == "chi") m.chi = val;
            else if (param == "epsilon") m.epsilon = val;
            else if (param == "beta") m.beta = val;
            else if (param == "delta") m.delta = val;
            else if (param == "xi") m.xi = val;
            else if (param == "eta") m.eta = val;
            else if (param == "lambda0") m.lambda0 = val;
            else if (param == "lambda1") m.lambda1 = val;
            else if (param == "sigma_P") m.sigma_P = val;
            else throw ConfigError("sweep: unknown parameter '" + param + "'");
            try {
                cfg.params.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("sweep value rejected: ") + e.what());
            }

            SchemeOptions scheme = cfg.scheme;
            scheme.threads = ctx.threads;
            const SolveResult r = solve(cfg.params, cfg.grid.make(), scheme);
            if (!r.report.converged) return static_cast<int>(kNumericalFailure);
            const State center = cfg.effective_probes()[cfg.effective_probes().size() / 2];
            out << format_double(val) << ',' << format_double(r.value.value_at(center.K, center.P))
                << ',' << r.report.iterations << ',' << format_double(r.report.residual) << '\n';
        }
        if (!out) throw IoError("write failed: sweep summary");
        return static_cast<int>(kOk);
    });
}

}  // namespace ecorisk
