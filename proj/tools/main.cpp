#include <cstdlib>
#include <limits>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tanglesim/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRunFailure = 2;
constexpr int kExitIo = 3;

constexpr int kIntUnset = std::numeric_limits<int>::min();
constexpr long long kSeedUnset = std::numeric_limits<long long>::min();

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string policy;
    std::string trace;
    int buses = kIntUnset;
    int replications = kIntUnset;
    long long seed = kSeedUnset;
    int workers = 0;
    bool quiet = false;
};

std::string default_out_dir() {
    if (const char* env = std::getenv("TANGLESIM_OUT_DIR")) {
        return env;
    }
    return "out";
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Scenario config file (key = value)");
    cmd->add_option("--out-dir", flags.out_dir,
                    "Output directory (default $TANGLESIM_OUT_DIR or ./out)");
    cmd->add_option("--seed", flags.seed, "Base seed; replication r runs with seed + r");
    cmd->add_option("--policy", flags.policy,
                    "fixed-random | dynamic-random | adaptive-rtt");
    cmd->add_option("--buses", flags.buses, "Number of buses");
    cmd->add_option("--replications", flags.replications, "Replications per cell");
    cmd->add_option("--trace", flags.trace, "Trace file path, or 'synthetic'");
    cmd->add_option("--workers", flags.workers,
                    "Parallel replication workers (default: hardware threads)");
    cmd->add_flag("--quiet", flags.quiet, "Suppress progress output");
}

/// File values first, flag values override.
tanglesim::ScenarioConfig resolve_config(const CommonFlags& flags) {
    tanglesim::ScenarioConfig config;
    if (!flags.config_path.empty()) {
        config = tanglesim::parse_config_file(flags.config_path);
    }
    if (!flags.policy.empty()) {
        const auto policy = tanglesim::client::policy_from_name(flags.policy);
        if (!policy) {
            throw tanglesim::ConfigError("config: invalid --policy " + flags.policy);
        }
        config.policy = *policy;
    }
    if (flags.buses != kIntUnset) {
        config.bus_count = flags.buses;
    }
    if (flags.replications != kIntUnset) {
        config.replications = flags.replications;
    }
    if (flags.seed != kSeedUnset) {
        if (flags.seed < 0) {
            throw tanglesim::ConfigError("config: --seed must be >= 0");
        }
        config.seed = static_cast<std::uint64_t>(flags.seed);
    }
    if (!flags.trace.empty()) {
        config.trace = flags.trace;
    }
    tanglesim::validate(config);
    return config;
}

int workers_or_default(const CommonFlags& flags) {
    if (flags.workers > 0) {
        return flags.workers;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::ostream& log_stream(const CommonFlags& flags) {
    static std::ostringstream sink;
    if (flags.quiet) {
        sink.str("");
        return sink;
    }
    return std::cout;
}

int cmd_run(const CommonFlags& flags) {
    const tanglesim::ScenarioConfig config = resolve_config(flags);
    const std::filesystem::path out(flags.out_dir.empty() ? default_out_dir()
                                                          : flags.out_dir);
    const std::filesystem::path dir =
        tanglesim::runner::cell_dir(out, config.policy, config.bus_count);
    const auto cell = tanglesim::runner::run_cell(config, dir, workers_or_default(flags));

    std::ostream& log = log_stream(flags);
    log << "wrote " << dir.string() << "\n";
    tanglesim::report::write_summary_table(log, {&cell, 1});
    return kExitOk;
}

int cmd_matrix(const CommonFlags& flags) {
    const tanglesim::ScenarioConfig config = resolve_config(flags);
    tanglesim::runner::MatrixSpec spec;
    if (!flags.policy.empty()) {
        spec.policies = {config.policy};
    }
    if (flags.buses != kIntUnset) {
        spec.bus_counts = {config.bus_count};
    }
    const std::filesystem::path out(flags.out_dir.empty() ? default_out_dir()
                                                          : flags.out_dir);
    std::ostream& log = log_stream(flags);
    const auto outcome =
        tanglesim::runner::run_matrix(config, spec, out, workers_or_default(flags), log);
    log << "\n";
    tanglesim::report::write_summary_table(log, outcome.cells);
    if (outcome.failed_cells > 0) {
        std::cerr << outcome.failed_cells << " cell(s) failed\n";
        return kExitRunFailure;
    }
    return kExitOk;
}

int cmd_calibrate(const CommonFlags& flags, const std::string& scales_csv, double target) {
    const tanglesim::ScenarioConfig config = resolve_config(flags);
    std::vector<double> scales;
    std::stringstream ss(scales_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            scales.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw tanglesim::ConfigError("calibrate: invalid scale '" + item + "'");
        }
    }
    if (scales.empty()) {
        throw tanglesim::ConfigError("calibrate: no scales given");
    }
    std::ostream& log = log_stream(flags);
    const auto outcome = tanglesim::runner::calibrate(config, scales, target,
                                                      workers_or_default(flags), log);
    std::cout << "best service_scale: " << tanglesim::stats::format_fixed(outcome.best_scale)
              << " (target " << tanglesim::stats::format_fixed(target) << " s)\n";
    return kExitOk;
}

int cmd_report(const CommonFlags& flags) {
    const std::filesystem::path out(flags.out_dir.empty() ? default_out_dir()
                                                          : flags.out_dir);
    if (!std::filesystem::is_directory(out)) {
        throw tanglesim::IoError("report: no such directory: " + out.string());
    }
    std::ostream& log = log_stream(flags);
    const auto cells = tanglesim::runner::reaggregate(out, log);
    tanglesim::report::write_summary_table(log, cells);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace-driven DAG-ledger simulator and benchmark harness"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string scales_csv = "0.6,0.8,0.9,1.0,1.1,1.2,1.4";
    double target = 22.99;

    CLI::App* run = app.add_subcommand("run", "Run one scenario cell and export results");
    add_common_flags(run, flags);
    CLI::App* matrix =
        app.add_subcommand("matrix", "Run the policy x bus-count grid with replications");
    add_common_flags(matrix, flags);
    CLI::App* calibrate = app.add_subcommand(
        "calibrate", "Sweep pool.service_scale and report the factor closest to the target");
    add_common_flags(calibrate, flags);
    calibrate->add_option("--scales", scales_csv, "Comma-separated scale factors");
    calibrate->add_option("--target", target, "Target mean latency in seconds");
    CLI::App* report =
        app.add_subcommand("report", "Re-aggregate previously exported records");
    add_common_flags(report, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (run->parsed()) {
            return cmd_run(flags);
        }
        if (matrix->parsed()) {
            return cmd_matrix(flags);
        }
        if (calibrate->parsed()) {
            return cmd_calibrate(flags, scales_csv, target);
        }
        if (report->parsed()) {
            return cmd_report(flags);
        }
    } catch (const tanglesim::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const tanglesim::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRunFailure;
    }
    return kExitOk;
}
