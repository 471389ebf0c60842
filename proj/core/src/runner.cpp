#include "tanglesim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <thread>

namespace tanglesim::runner {

namespace {

constexpr const char* kCellMarker = ".cell_complete";

std::string records_filename(int replication) {
    char name[64];
    std::snprintf(name, sizeof(name), "records_rep%02d.csv", replication);
    return name;
}

void write_atomically(const std::filesystem::path& path, const auto& writer) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw IoError("cannot open for writing: " + tmp.string());
        }
        writer(out);
        if (!out.good()) {
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

/// Runs all replications of `config`, distributing them over `workers`
/// threads. Replications are independent seeded runs, so the result vector
/// does not depend on the worker count.
std::vector<RunResult> run_replications(const ScenarioConfig& config, int workers) {
    const int reps = config.replications;
    std::vector<RunResult> results(static_cast<std::size_t>(reps));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));

    const int thread_count = std::max(1, std::min(workers, reps));
    std::atomic<int> next{0};
    const auto worker = [&] {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= reps) {
                return;
            }
            try {
                results[static_cast<std::size_t>(r)] =
                    run_scenario(config, replication_seed(config.seed, r), r);
            } catch (...) {
                errors[static_cast<std::size_t>(r)] = std::current_exception();
            }
        }
    };
    if (thread_count == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(thread_count));
        for (int i = 0; i < thread_count; ++i) {
            threads.emplace_back(worker);
        }
        for (std::thread& t : threads) {
            t.join();
        }
    }
    for (const std::exception_ptr& error : errors) {
        if (error) {
            std::rethrow_exception(error);
        }
    }
    return results;
}

/// All records of a cell directory, in replication-file order.
std::vector<stats::TxRecord> read_cell_records(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.starts_with("records_rep") && name.ends_with(".csv")) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<stats::TxRecord> records;
    for (const auto& file : files) {
        auto recs = stats::read_records_csv_file(file.string());
        records.insert(records.end(), recs.begin(), recs.end());
    }
    return records;
}

} // namespace

std::uint64_t replication_seed(std::uint64_t base_seed, int replication) {
    return base_seed + static_cast<std::uint64_t>(replication);
}

std::filesystem::path cell_dir(const std::filesystem::path& out_dir,
                               client::SelectionPolicy policy, int bus_count) {
    return out_dir / client::policy_name(policy) / std::to_string(bus_count);
}

bool cell_complete(const std::filesystem::path& dir) {
    return std::filesystem::exists(dir / kCellMarker);
}

report::CellReport run_cell(const ScenarioConfig& config,
                            const std::filesystem::path& dir, int workers) {
    validate(config);
    std::filesystem::create_directories(dir);

    const std::vector<RunResult> results = run_replications(config, workers);
    for (int r = 0; r < config.replications; ++r) {
        write_atomically(dir / records_filename(r), [&](std::ostream& out) {
            stats::write_records_csv(out, results[static_cast<std::size_t>(r)].records);
        });
    }

    report::CellReport cell = report::aggregate_replications(results);
    report::export_cell(cell, dir);
    write_atomically(dir / kCellMarker, [&](std::ostream& out) { out << "complete\n"; });
    return cell;
}

MatrixOutcome run_matrix(const ScenarioConfig& base, const MatrixSpec& spec,
                         const std::filesystem::path& out_dir, int workers,
                         std::ostream& log) {
    MatrixOutcome outcome;
    for (client::SelectionPolicy policy : spec.policies) {
        for (int buses : spec.bus_counts) {
            ScenarioConfig config = base;
            config.policy = policy;
            config.bus_count = buses;
            const std::filesystem::path dir = cell_dir(out_dir, policy, buses);
            const std::string label =
                client::policy_name(policy) + "/" + std::to_string(buses);
            try {
                if (cell_complete(dir)) {
                    log << "cell " << label << ": already complete, skipping\n";
                    ++outcome.skipped_cells;
                    outcome.cells.push_back(report::aggregate_records(
                        read_cell_records(dir), policy, buses, config.duration));
                    continue;
                }
                const report::CellReport cell = run_cell(config, dir, workers);
                log << "cell " << label << ": mean "
                    << stats::format_fixed(cell.total.mean) << " s, errors "
                    << stats::format_fixed(cell.total.error_rate * 100.0) << "%\n";
                outcome.cells.push_back(cell);
            } catch (const std::exception& e) {
                log << "cell " << label << ": FAILED: " << e.what() << "\n";
                ++outcome.failed_cells;
            }
        }
    }

    std::filesystem::create_directories(out_dir);
    write_atomically(out_dir / "summary_table.txt", [&](std::ostream& out) {
        report::write_summary_table(out, outcome.cells);
    });
    write_atomically(out_dir / "summary_table.csv", [&](std::ostream& out) {
        report::write_summary_table_csv(out, outcome.cells);
    });
    return outcome;
}

CalibrationOutcome calibrate(const ScenarioConfig& base, std::vector<double> scales,
                             double target_latency, int workers, std::ostream& log) {
    CalibrationOutcome outcome;
    outcome.target = target_latency;
    double best_dev = -1.0;
    for (double scale : scales) {
        ScenarioConfig config = base;
        config.pool.service_scale = scale;
        validate(config);
        const std::vector<RunResult> results = run_replications(config, workers);
        const report::CellReport cell = report::aggregate_replications(results);

        CalibrationRow row;
        row.service_scale = scale;
        row.mean_latency = cell.total.mean;
        row.error_rate = cell.total.error_rate;
        row.deviation = std::abs(cell.total.mean - target_latency);
        outcome.rows.push_back(row);
        log << "scale " << stats::format_fixed(scale) << ": mean "
            << stats::format_fixed(row.mean_latency) << " s, errors "
            << stats::format_fixed(row.error_rate * 100.0) << "%\n";
        if (best_dev < 0.0 || row.deviation < best_dev) {
            best_dev = row.deviation;
            outcome.best_scale = scale;
        }
    }
    log << "best service_scale: " << stats::format_fixed(outcome.best_scale) << "\n";
    return outcome;
}

std::vector<report::CellReport> reaggregate(const std::filesystem::path& out_dir,
                                            std::ostream& log) {
    std::vector<report::CellReport> cells;
    static const std::vector<client::SelectionPolicy> kPolicies{
        client::SelectionPolicy::FixedRandom,
        client::SelectionPolicy::DynamicRandom,
        client::SelectionPolicy::AdaptiveRtt,
    };
    for (client::SelectionPolicy policy : kPolicies) {
        const std::filesystem::path policy_dir = out_dir / client::policy_name(policy);
        if (!std::filesystem::is_directory(policy_dir)) {
            continue;
        }
        std::vector<int> scales;
        for (const auto& entry : std::filesystem::directory_iterator(policy_dir)) {
            if (entry.is_directory()) {
                try {
                    scales.push_back(std::stoi(entry.path().filename().string()));
                } catch (const std::exception&) {
                    continue;
                }
            }
        }
        std::sort(scales.begin(), scales.end());
        for (int buses : scales) {
            const std::filesystem::path dir = policy_dir / std::to_string(buses);
            const std::vector<stats::TxRecord> records = read_cell_records(dir);
            if (records.empty()) {
                continue;
            }
            // Duration is not recoverable from records; workload-rate fields
            // of the re-aggregated summary stay zero.
            report::CellReport cell = report::aggregate_records(records, policy, buses, 0.0);
            report::export_cell(cell, dir);
            log << "re-aggregated " << client::policy_name(policy) << "/" << buses << ": "
                << records.size() << " records\n";
            cells.push_back(std::move(cell));
        }
    }

    write_atomically(out_dir / "summary_table.txt", [&](std::ostream& out) {
        report::write_summary_table(out, cells);
    });
    write_atomically(out_dir / "summary_table.csv", [&](std::ostream& out) {
        report::write_summary_table_csv(out, cells);
    });
    return cells;
}

} // namespace tanglesim::runner
