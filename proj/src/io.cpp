#include "ecorisk/io.hpp"

#include <cstdio>
#include <fstream>

namespace ecorisk {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file: " + path);
    return out;
}

void provenance_line(std::ofstream& out, const std::string& hash, std::uint64_t seed) {
    out << "# config_hash=" << hash << " master_seed=" << seed << "\n";
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_value_policy_csv(const std::string& value_path, const std::string& policy_path,
                            const ValueField& value, const PolicyField& policy,
                            const std::string& config_hash, std::uint64_t seed) {
    const Grid& g = value.grid;
    {
        auto out = open_out(value_path);
        provenance_line(out, config_hash, seed);
        out << "i,j,K,P,v\n";
        for (int i = 0; i < g.n_k; ++i)
            for (int j = 0; j < g.n_p; ++j)
                out << i << ',' << j << ',' << format_double(g.K[i]) << ','
                    << format_double(g.P[j]) << ',' << format_double(value.at(i, j)) << '\n';
        if (!out) throw IoError("write failed: " + value_path);
    }
    {
        auto out = open_out(policy_path);
        provenance_line(out, config_hash, seed);
        out << "i,j,K,P,C,theta\n";
        for (int i = 0; i < g.n_k; ++i)
            for (int j = 0; j < g.n_p; ++j)
                out << i << ',' << j << ',' << format_double(g.K[i]) << ','
                    << format_double(g.P[j]) << ',' << format_double(policy.C[g.idx(i, j)])
                    << ',' << format_double(policy.theta[g.idx(i, j)]) << '\n';
        if (!out) throw IoError("write failed: " + policy_path);
    }
}

void write_convergence_json(const std::string& path, const SolveReport& report,
                            const std::string& config_hash, std::uint64_t seed) {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["master_seed"] = seed;
    j["converged"] = report.converged;
    j["iterations"] = report.iterations;
    j["residual"] = report.residual;
    j["interior_residual"] = report.interior_residual;
    j["final_update"] = report.final_update;
    j["dtau"] = report.dtau;
    j["foc_clamp_events"] = report.foc_clamp_events;
    j["outward_drift_frac_k_hi"] = report.outward_drift_frac_k_hi;
    j["outward_drift_frac_p_hi"] = report.outward_drift_frac_p_hi;
    j["monotone_in_K"] = report.monotone_in_K;
    j["monotone_in_P"] = report.monotone_in_P;
    j["residual_history"] = report.residual_history;
    write_json(path, j);
}

void write_path_csv(const std::string& path, const PathRecord& rec,
                    const std::string& config_hash, std::uint64_t seed) {
    auto out = open_out(path);
    provenance_line(out, config_hash, seed);
    out << "t,K,P,C,theta,jump_flag,mark\n";
    std::size_t ev = 0;
    for (std::size_t n = 0; n <= rec.n_steps; ++n) {
        const double t = rec.time(n);
        // Events that landed inside the step ending at t.
        int jumped = 0;
        double mark = 0.0;
        while (ev < rec.events.size() && rec.events[ev].time <= t + 1e-15) {
            jumped = 1;
            mark = rec.events[ev].mark;
            ++ev;
        }
        out << format_double(t) << ',' << format_double(rec.K[n]) << ','
            << format_double(rec.P[n]) << ',' << format_double(rec.C[n]) << ','
            << format_double(rec.theta[n]) << ',' << jumped << ',' << format_double(mark)
            << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace ecorisk
