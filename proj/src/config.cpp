#include "ecorisk/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace ecorisk {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

double num(const json& j, const std::string& where, const char* key, double dflt,
           bool required = false) {
    if (!j.contains(key)) {
        if (required) throw ConfigError(where + ": missing key '" + key + "'");
        return dflt;
    }
    if (!j[key].is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
    return j[key].get<double>();
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
    check_keys(j, "config",
               {"run_id", "variant", "params", "marks", "grid", "scheme", "simulation",
                "policy", "verify", "probes", "suboptimal_policies", "outdir"});
    RunConfig cfg;
    if (j.contains("run_id")) cfg.run_id = j["run_id"].get<std::string>();
    if (j.contains("outdir")) cfg.outdir = j["outdir"].get<std::string>();

    if (!j.contains("variant")) throw ConfigError("config: missing 'variant'");
    cfg.params.variant = variant_from_string(j["variant"].get<std::string>());

    if (!j.contains("params")) throw ConfigError("config: missing 'params'");
    {
        const json& p = j["params"];
        check_keys(p, "params",
                   {"rho", "A", "phi", "sigma_ab", "alpha", "chi", "epsilon", "beta", "delta",
                    "xi", "eta", "lambda0", "lambda1", "sigma_P"});
        ModelParams& m = cfg.params;
        m.rho = num(p, "params", "rho", 0, true);
        m.A = num(p, "params", "A", 0, true);
        m.phi = num(p, "params", "phi", 0, true);
        m.sigma_ab = num(p, "params", "sigma_ab", 0, true);
        m.alpha = num(p, "params", "alpha", 0, true);
        m.chi = num(p, "params", "chi", 0, true);
        m.epsilon = num(p, "params", "epsilon", 0, true);
        m.beta = num(p, "params", "beta", 0, true);
        m.delta = num(p, "params", "delta", m.delta);
        m.xi = num(p, "params", "xi", m.xi);
        m.eta = num(p, "params", "eta", m.eta);
        m.lambda0 = num(p, "params", "lambda0", m.lambda0);
        m.lambda1 = num(p, "params", "lambda1", m.lambda1);
        m.sigma_P = num(p, "params", "sigma_P", m.sigma_P);
    }

    if (j.contains("marks")) {
        const json& mk = j["marks"];
        check_keys(mk, "marks", {"kind", "atoms", "weights"});
        if (!mk.contains("kind")) throw ConfigError("marks: missing 'kind'");
        cfg.params.marks.kind = mark_kind_from_string(mk["kind"].get<std::string>());
        if (mk.contains("atoms")) cfg.params.marks.atoms = mk["atoms"].get<std::vector<double>>();
        if (mk.contains("weights"))
            cfg.params.marks.weights = mk["weights"].get<std::vector<double>>();
    }

    if (!j.contains("grid")) throw ConfigError("config: missing 'grid'");
    {
        const json& g = j["grid"];
        check_keys(g, "grid", {"k_lo", "k_hi", "p_lo", "p_hi", "n_k", "n_p"});
        cfg.grid.k_lo = num(g, "grid", "k_lo", 0, true);
        cfg.grid.k_hi = num(g, "grid", "k_hi", 0, true);
        cfg.grid.p_lo = num(g, "grid", "p_lo", 0, true);
        cfg.grid.p_hi = num(g, "grid", "p_hi", 0, true);
        cfg.grid.n_k = static_cast<int>(num(g, "grid", "n_k", 0, true));
        cfg.grid.n_p = static_cast<int>(num(g, "grid", "n_p", 0, true));
    }

    if (j.contains("scheme")) {
        const json& s = j["scheme"];
        check_keys(s, "scheme",
                   {"tol", "max_iters", "policy_update_every", "nested_init", "cfl_safety",
                    "gamma_quad_nodes"});
        cfg.scheme.tol = num(s, "scheme", "tol", cfg.scheme.tol);
        cfg.scheme.max_iters = static_cast<long>(num(s, "scheme", "max_iters",
                                                     static_cast<double>(cfg.scheme.max_iters)));
        cfg.scheme.policy_update_every = static_cast<int>(
            num(s, "scheme", "policy_update_every", cfg.scheme.policy_update_every));
        if (s.contains("nested_init")) cfg.scheme.nested_init = s["nested_init"].get<bool>();
        cfg.scheme.cfl_safety = num(s, "scheme", "cfl_safety", cfg.scheme.cfl_safety);
        cfg.scheme.gamma_quad_nodes =
            static_cast<int>(num(s, "scheme", "gamma_quad_nodes", cfg.scheme.gamma_quad_nodes));
    }

    if (j.contains("simulation")) {
        const json& s = j["simulation"];
        check_keys(s, "simulation", {"n_paths", "T", "dt", "master_seed", "dump_paths"});
        cfg.simulation.n_paths = static_cast<std::size_t>(
            num(s, "simulation", "n_paths", static_cast<double>(cfg.simulation.n_paths)));
        cfg.simulation.T = num(s, "simulation", "T", cfg.simulation.T);
        cfg.simulation.dt = num(s, "simulation", "dt", cfg.simulation.dt);
        if (s.contains("master_seed"))
            cfg.simulation.master_seed = s["master_seed"].get<std::uint64_t>();
        cfg.simulation.dump_paths = static_cast<int>(
            num(s, "simulation", "dump_paths", cfg.simulation.dump_paths));
    }

    if (j.contains("policy")) {
        const json& p = j["policy"];
        check_keys(p, "policy", {"kind", "C", "theta"});
        if (p.contains("kind")) cfg.policy.kind = p["kind"].get<std::string>();
        if (cfg.policy.kind != "field" && cfg.policy.kind != "candidate" &&
            cfg.policy.kind != "constant")
            throw ConfigError("policy: kind must be field|candidate|constant");
        cfg.policy.C = num(p, "policy", "C", 0.0);
        cfg.policy.theta = num(p, "policy", "theta", 0.0);
    }

    if (j.contains("verify")) {
        const json& v = j["verify"];
        check_keys(v, "verify",
                   {"grid_error_budget", "transversality_horizons", "transversality_paths",
                    "dpp_horizon", "dpp_paths", "martingale_paths", "martingale_T",
                    "suboptimal_paths", "suboptimal_T"});
        cfg.verify.grid_error_budget =
            num(v, "verify", "grid_error_budget", cfg.verify.grid_error_budget);
        if (v.contains("transversality_horizons"))
            cfg.verify.transversality_horizons =
                v["transversality_horizons"].get<std::vector<double>>();
        cfg.verify.transversality_paths = static_cast<std::size_t>(num(
            v, "verify", "transversality_paths",
            static_cast<double>(cfg.verify.transversality_paths)));
        cfg.verify.dpp_horizon = num(v, "verify", "dpp_horizon", cfg.verify.dpp_horizon);
        cfg.verify.dpp_paths = static_cast<std::size_t>(
            num(v, "verify", "dpp_paths", static_cast<double>(cfg.verify.dpp_paths)));
        cfg.verify.martingale_paths = static_cast<std::size_t>(num(
            v, "verify", "martingale_paths", static_cast<double>(cfg.verify.martingale_paths)));
        cfg.verify.martingale_T = num(v, "verify", "martingale_T", cfg.verify.martingale_T);
        cfg.verify.suboptimal_paths = static_cast<std::size_t>(num(
            v, "verify", "suboptimal_paths", static_cast<double>(cfg.verify.suboptimal_paths)));
        cfg.verify.suboptimal_T = num(v, "verify", "suboptimal_T", cfg.verify.suboptimal_T);
    }

    if (j.contains("probes")) {
        for (const auto& pr : j["probes"]) {
            if (!pr.is_array() || pr.size() != 2)
                throw ConfigError("probes: each probe must be [K, P]");
            cfg.probes.push_back({pr[0].get<double>(), pr[1].get<double>()});
        }
    }

    if (j.contains("suboptimal_policies")) {
        for (const auto& sp : j["suboptimal_policies"]) {
            check_keys(sp, "suboptimal_policies", {"C", "theta"});
            cfg.suboptimal.push_back(
                {num(sp, "suboptimal_policies", "C", 0, true),
                 num(sp, "suboptimal_policies", "theta", 0, true)});
        }
    }

    // Cross-validation of module invariants before any run.
    try {
        cfg.params.validate();
        cfg.grid.make();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!(cfg.simulation.dt > 0.0) || !(cfg.simulation.T > 0.0))
        throw ConfigError("simulation: T and dt must be positive");
    if (cfg.simulation.n_paths < 2) throw ConfigError("simulation: n_paths must be >= 2");
    const double lam_max = total_event_rate(1.5 * cfg.grid.p_hi, cfg.params);
    if (lam_max * cfg.simulation.dt > 0.1)
        throw ConfigError("simulation: dt too coarse for the thinning bound "
                          "(lambda_max * dt must be <= 0.1)");
    for (const auto& pr : cfg.probes)
        if (!(pr.K > 0.0 && pr.P > 0.0)) throw ConfigError("probes: states must be positive");
    for (const auto& sp : cfg.suboptimal)
        if (sp.C < 0.0 || sp.theta < 0.0 || sp.theta > cfg.params.bar_theta())
            throw ConfigError("suboptimal_policies: controls must be admissible");
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
    json j;
    j["run_id"] = run_id;
    j["variant"] = to_string(params.variant);
    j["params"] = {{"rho", params.rho},         {"A", params.A},
                   {"phi", params.phi},         {"sigma_ab", params.sigma_ab},
                   {"alpha", params.alpha},     {"chi", params.chi},
                   {"epsilon", params.epsilon}, {"beta", params.beta},
                   {"delta", params.delta},     {"xi", params.xi},
                   {"eta", params.eta},         {"lambda0", params.lambda0},
                   {"lambda1", params.lambda1}, {"sigma_P", params.sigma_P}};
    j["marks"] = {{"kind", to_string(params.marks.kind)},
                  {"atoms", params.marks.atoms},
                  {"weights", params.marks.weights}};
    j["grid"] = {{"k_lo", grid.k_lo}, {"k_hi", grid.k_hi}, {"p_lo", grid.p_lo},
                 {"p_hi", grid.p_hi}, {"n_k", grid.n_k},   {"n_p", grid.n_p}};
    j["scheme"] = {{"tol", scheme.tol},
                   {"max_iters", scheme.max_iters},
                   {"policy_update_every", scheme.policy_update_every},
                   {"nested_init", scheme.nested_init},
                   {"cfl_safety", scheme.cfl_safety},
                   {"gamma_quad_nodes", scheme.gamma_quad_nodes}};
    j["simulation"] = {{"n_paths", simulation.n_paths},
                       {"T", simulation.T},
                       {"dt", simulation.dt},
                       {"master_seed", simulation.master_seed},
                       {"dump_paths", simulation.dump_paths}};
    j["policy"] = {{"kind", policy.kind}, {"C", policy.C}, {"theta", policy.theta}};
    j["verify"] = {{"grid_error_budget", verify.grid_error_budget},
                   {"transversality_horizons", verify.transversality_horizons},
                   {"transversality_paths", verify.transversality_paths},
                   {"dpp_horizon", verify.dpp_horizon},
                   {"dpp_paths", verify.dpp_paths},
                   {"martingale_paths", verify.martingale_paths},
                   {"martingale_T", verify.martingale_T},
                   {"suboptimal_paths", verify.suboptimal_paths},
                   {"suboptimal_T", verify.suboptimal_T}};
    json probes_j = json::array();
    for (const auto& p : probes) probes_j.push_back({p.K, p.P});
    j["probes"] = probes_j;
    json sub_j = json::array();
    for (const auto& s : suboptimal) sub_j.push_back({{"C", s.C}, {"theta", s.theta}});
    j["suboptimal_policies"] = sub_j;
    j["outdir"] = outdir;
    return j;
}

std::string RunConfig::config_hash() const {
    const std::string s = to_json().dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<State> RunConfig::effective_probes() const {
    if (!probes.empty()) return probes;
    // Five-point diagonal through the interior of the grid (log-spaced).
    std::vector<State> out;
    const double lx = std::log(grid.k_lo), hx = std::log(grid.k_hi) - lx;
    const double ly = std::log(grid.p_lo), hy = std::log(grid.p_hi) - ly;
    for (double t : {0.2, 0.35, 0.5, 0.65, 0.8})
        out.push_back({std::exp(lx + t * hx), std::exp(ly + t * hy)});
    return out;
}

std::vector<Control> RunConfig::effective_suboptimal() const {
    if (!suboptimal.empty()) return suboptimal;
    double k_min = grid.k_hi;
    for (const auto& p : effective_probes()) k_min = std::min(k_min, p.K);
    const double base = params.A * k_min;
    const double bt = params.bar_theta();
    return {{0.25 * base, 0.0}, {0.5 * base, bt}, {0.75 * base, 0.5 * bt}};
}

}  // namespace ecorisk
