#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ecorisk/config.hpp"

namespace ecorisk {

// Exit codes shared by the library entry points and the CLI.
enum ExitCode : int {
    kOk = 0,
    kChecksFailed = 1,
    kConfigError = 2,
    kNumericalFailure = 3,  // non-convergence or simulation failure
    kIoError = 4,
};

struct RunOptions {
    int threads = 1;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> outdir_override;
};

// Each command writes its artifacts under <outdir>/<run_id>/ and returns an
// exit code; the CLI is a thin wrapper over these.
int cmd_solve(const RunConfig& config, const RunOptions& opts);
int cmd_simulate(const RunConfig& config, const RunOptions& opts);
int cmd_verify(const RunConfig& config, const RunOptions& opts);
int cmd_sweep(const RunConfig& config, const RunOptions& opts, const std::string& param,
              const std::vector<double>& values);

}  // namespace ecorisk
