#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tanglesim/report.hpp"
#include "tanglesim/scenario.hpp"

namespace tanglesim::runner {

/// Replication r of a cell runs with seed base_seed + r, so any single
/// replication can be reproduced with `run --seed`.
std::uint64_t replication_seed(std::uint64_t base_seed, int replication);

/// out_dir/<policy>/<buses>/ for one cell.
std::filesystem::path cell_dir(const std::filesystem::path& out_dir,
                               client::SelectionPolicy policy, int bus_count);

/// Runs every replication of one cell (in parallel when workers > 1),
/// writes records_repNN.csv per replication plus the aggregated summary
/// files, and drops a completion marker. Results are independent of worker
/// count.
report::CellReport run_cell(const ScenarioConfig& config,
                            const std::filesystem::path& dir, int workers);

/// True when `dir` holds a finished cell (completion marker present).
bool cell_complete(const std::filesystem::path& dir);

struct MatrixSpec {
    std::vector<client::SelectionPolicy> policies{
        client::SelectionPolicy::FixedRandom,
        client::SelectionPolicy::DynamicRandom,
        client::SelectionPolicy::AdaptiveRtt,
    };
    std::vector<int> bus_counts{60, 120, 240};
};

struct MatrixOutcome {
    std::vector<report::CellReport> cells; // declared order
    int failed_cells = 0;
    int skipped_cells = 0;
};

/// Runs the full policy x scale grid. Cells already complete under
/// `out_dir` are skipped (and noted in the log); a failing cell is recorded
/// and the remaining cells still run. Writes the combined summary table.
MatrixOutcome run_matrix(const ScenarioConfig& base, const MatrixSpec& spec,
                         const std::filesystem::path& out_dir, int workers,
                         std::ostream& log);

struct CalibrationRow {
    double service_scale = 1.0;
    double mean_latency = 0.0;
    double error_rate = 0.0;
    double deviation = 0.0; // |mean - target|
};

struct CalibrationOutcome {
    std::vector<CalibrationRow> rows;
    double best_scale = 1.0;
    double target = 0.0;
};

/// Sweeps pool.service_scale over `scales` for the base scenario and reports
/// which factor lands the pooled mean latency closest to `target_latency`.
CalibrationOutcome calibrate(const ScenarioConfig& base, std::vector<double> scales,
                             double target_latency, int workers, std::ostream& log);

/// Re-aggregates every completed cell found under `out_dir` from its
/// records files and rewrites the summary outputs. Returns the cells found.
std::vector<report::CellReport> reaggregate(const std::filesystem::path& out_dir,
                                            std::ostream& log);

} // namespace tanglesim::runner
