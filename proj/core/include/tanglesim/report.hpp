#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tanglesim/scenario.hpp"
#include "tanglesim/stats.hpp"

namespace tanglesim::report {

/// Per-replication view of one cell (the per-test bars of the latency and
/// error histograms).
struct ReplicationRow {
    int replication = 0;
    std::size_t attempts = 0;
    std::size_t successes = 0;
    std::size_t failures = 0;
    double error_rate = 0.0;
    double mean_total = 0.0;
    double mean_tip = 0.0;
    double mean_pow = 0.0;
    double mean_network = 0.0;
    double std_tip = 0.0;
    double std_pow = 0.0;
};

/// Pooled statistics of one (policy, bus_count) cell across replications.
struct CellReport {
    client::SelectionPolicy policy = client::SelectionPolicy::FixedRandom;
    int bus_count = 0;
    double duration = 0.0;
    int replications = 0;

    std::size_t attempts = 0;
    std::size_t successes = 0;
    std::size_t failures = 0;
    std::size_t scheduled_publications = 0;
    double scheduled_per_bus_hour = 0.0;
    double confirmed_fraction = 0.0; // confirmed successful bundles / successes

    stats::SummaryStats total;
    stats::SummaryStats tip;
    stats::SummaryStats pow;
    stats::SummaryStats network;
    stats::BoxplotStats box;
    stats::EcdfSeries ecdf;

    std::vector<ReplicationRow> per_replication;
    std::vector<std::uint64_t> attempts_per_node;
    std::vector<std::uint64_t> successes_per_node;
};

/// Pools replications of one cell. All results must share policy, bus count
/// and duration (std::invalid_argument otherwise); only seed and replication
/// index may differ.
CellReport aggregate_replications(std::span<const RunResult> results);

/// Re-aggregates a cell from previously exported records (the `report`
/// path). Scheduled/ledger counters are not recoverable from records and
/// stay zero.
CellReport aggregate_records(std::span<const stats::TxRecord> records,
                             client::SelectionPolicy policy, int bus_count,
                             double duration);

/// Writes summary.json, ecdf.csv, boxplot.csv and rep_means.csv into `dir`.
/// All floats use fixed 6-decimal formatting; output bytes are a pure
/// function of the report.
void export_cell(const CellReport& cell, const std::filesystem::path& dir);

void write_summary_json(std::ostream& out, const CellReport& cell);
void write_ecdf_csv(std::ostream& out, const stats::EcdfSeries& series);
void write_boxplot_csv(std::ostream& out, const stats::BoxplotStats& box);
void write_rep_means_csv(std::ostream& out, std::span<const ReplicationRow> rows);

/// One line per cell, shaped like the latency/error results table.
void write_summary_table(std::ostream& out, std::span<const CellReport> cells);
void write_summary_table_csv(std::ostream& out, std::span<const CellReport> cells);

} // namespace tanglesim::report
