#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sastirap/version.hpp"
#include "sastirap_cli/commands.hpp"
#include "sastirap_cli/config.hpp"

namespace cli = sastirap::cli;

int main(int argc, char** argv) {
    CLI::App app{"saSTIRAP qutrit simulator"};
    app.set_version_flag("--version", sastirap::version());
    app.require_subcommand(1);

    std::string config;
    std::optional<std::string> out_dir;
    unsigned jobs = 0;
    bool resume = false;
    bool validate_only = false;
    bool quiet = false;

    struct Entry {
        const char* name;
        const char* help;
        int (*run)(const cli::RunConfig&, const cli::CommandOptions&, std::ostream&);
    };
    const Entry entries[] = {
        {"simulate", "run one protocol: trajectory CSV, report, plots", cli::cmd_simulate},
        {"sweep", "run the configured parameter sweeps: CSV, heatmaps", cli::cmd_sweep},
        {"qsl", "print the speed-limit bound for the configured CD peak", cli::cmd_qsl},
        {"tomo", "extract populations from readout traces", cli::cmd_tomo},
        {"export-pulses", "write the drive envelopes as CSV", cli::cmd_export_pulses},
    };
    for (const Entry& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        sub->add_option("--config,-c", config, "YAML run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out,-o", out_dir, "output directory (default: $SASTIRAP_OUT or ./sastirap-out)");
        sub->add_option("--jobs,-j", jobs, "worker threads for sweeps (0 = all cores)");
        sub->add_flag("--resume", resume, "continue a sweep from its cache");
        sub->add_flag("--validate-only", validate_only, "check the configuration and exit");
        sub->add_flag("--quiet,-q", quiet, "no progress output");
    }

    CLI11_PARSE(app, argc, argv);

    for (const Entry& e : entries) {
        if (!app.got_subcommand(e.name)) continue;
        try {
            const cli::RunConfig cfg = cli::load_config(config);
            if (validate_only) {
                std::cout << config << ": ok\n";
                return 0;
            }
            cli::CommandOptions opt;
            opt.out_dir = cli::resolve_out_dir(out_dir ? std::optional<std::filesystem::path>(*out_dir) : std::nullopt, cfg);
            opt.jobs = jobs;
            opt.resume = resume;
            opt.quiet = quiet;
            return e.run(cfg, opt, std::cout);
        } catch (const cli::ConfigError& err) {
            std::cerr << "config error: " << err.what() << "\n";
            return 2;
        } catch (const std::exception& err) {
            std::cerr << "error: " << err.what() << "\n";
            return 1;
        }
    }
    return 1;
}
