#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tanglesim/client.hpp"

namespace tanglesim::stats {

/// One attempted message publication. Failed attempts keep their
/// time-to-failure in total_latency; the component fields stay empty.
struct TxRecord {
    std::string bus_id;
    int node_id = -1;
    client::SelectionPolicy policy = client::SelectionPolicy::FixedRandom;
    double submit_time = 0.0;
    bool success = false;
    std::optional<double> tip_selection_latency;
    std::optional<double> pow_latency;
    std::optional<double> network_latency;
    double total_latency = 0.0;
    int replication_index = 0;
};

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation (n - 1)
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    double error_rate = 0.0;
    bool defined = false; // false when no successful samples exist
};

/// Five-number summary per the 1.5*IQR whisker rule. Whiskers are clamped to
/// the most extreme data points inside the fences; everything outside is an
/// outlier.
struct BoxplotStats {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    double mean = 0.0;
    std::vector<double> outliers;
};

/// Right-continuous empirical CDF: one point per distinct sample value with
/// the cumulative fraction of samples <= it; the last fraction is 1.
struct EcdfSeries {
    std::vector<std::pair<double, double>> points;

    double fraction_at(double x) const;
};

/// Quantile by linear interpolation between closest ranks over a sorted
/// sample: rank h = (n - 1) * p.
double quantile_linear(std::span<const double> sorted, double p);

/// Mean, sample stddev, and a normal-approximation 95% CI
/// (mean +- 1.96 * stddev / sqrt(n)) over the successful-attempt latencies;
/// error_rate = errors / attempts. n = 0 yields an undefined-stats marker.
SummaryStats summarize(std::span<const double> samples, std::size_t errors,
                       std::size_t attempts);

/// Throws std::invalid_argument on empty input.
BoxplotStats boxplot(std::span<const double> samples);

/// Throws std::invalid_argument on empty input.
EcdfSeries ecdf(std::span<const double> samples);

/// Fixed-format helpers shared by every exporter: all floats are serialized
/// with six decimals so regression outputs are byte-stable.
std::string format_fixed(double value);

void write_records_csv(std::ostream& out, std::span<const TxRecord> records);
void write_records_csv_file(const std::string& path, std::span<const TxRecord> records);

/// Parses a records CSV produced by write_records_csv. Throws
/// std::runtime_error on malformed input.
std::vector<TxRecord> read_records_csv(std::istream& in);
std::vector<TxRecord> read_records_csv_file(const std::string& path);

} // namespace tanglesim::stats
