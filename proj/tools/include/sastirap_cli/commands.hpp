#pragma once

#include <filesystem>
#include <iosfwd>

#include "sastirap_cli/config.hpp"

namespace sastirap::cli {

struct CommandOptions {
    std::filesystem::path out_dir;
    unsigned jobs = 0;  // 0 = all cores
    bool resume = false;
    bool quiet = false;
};

// Precedence: --out, then output.directory in the config, then $SASTIRAP_OUT, then ./sastirap-out.
std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& flag, const RunConfig& cfg);

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_qsl(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_tomo(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_export_pulses(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);

}  // namespace sastirap::cli
