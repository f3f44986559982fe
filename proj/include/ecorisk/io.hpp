#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ecorisk/grid.hpp"
#include "ecorisk/simulate.hpp"
#include "ecorisk/solver.hpp"

namespace ecorisk {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every artifact starts with a provenance comment line carrying the config
// hash and master seed; floats are written with full round-trip precision.
void write_value_policy_csv(const std::string& value_path, const std::string& policy_path,
                            const ValueField& value, const PolicyField& policy,
                            const std::string& config_hash, std::uint64_t seed);

void write_convergence_json(const std::string& path, const SolveReport& report,
                            const std::string& config_hash, std::uint64_t seed);

void write_path_csv(const std::string& path, const PathRecord& rec,
                    const std::string& config_hash, std::uint64_t seed);

void write_json(const std::string& path, const nlohmann::json& j);

std::string format_double(double x);

}  // namespace ecorisk
