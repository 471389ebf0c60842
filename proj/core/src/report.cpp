#include "tanglesim/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace tanglesim::report {

namespace {

using stats::format_fixed;

double mean_of(std::span<const double> xs) {
    if (xs.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    return sum / static_cast<double>(xs.size());
}

double stddev_of(std::span<const double> xs) {
    if (xs.size() < 2) {
        return 0.0;
    }
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

/// Tiny ordered JSON emitter with fixed 6-decimal numbers, so exports stay
/// byte-stable across platforms and runs.
class JsonWriter {
public:
    explicit JsonWriter(std::ostream& out) : out_(out) {}

    void begin_object() { open('{'); }
    void end_object() { close('}'); }
    void begin_array(const std::string& key) {
        comma();
        indent();
        out_ << '"' << key << "\": [";
        first_ = true;
        ++depth_;
        array_ = true;
    }
    void end_array() {
        --depth_;
        out_ << ']';
        first_ = false;
        array_ = false;
    }

    void key_object(const std::string& key) {
        comma();
        indent();
        out_ << '"' << key << "\": {";
        first_ = true;
        ++depth_;
    }

    void array_object() {
        comma();
        out_ << '{';
        first_ = true;
        ++depth_;
    }
    void end_array_object() {
        --depth_;
        out_ << '}';
        first_ = false;
    }

    void field(const std::string& key, const std::string& value) {
        comma();
        indent();
        out_ << '"' << key << "\": \"" << value << '"';
    }
    void field(const std::string& key, double value) {
        comma();
        indent();
        out_ << '"' << key << "\": " << format_fixed(value);
    }
    void field(const std::string& key, std::size_t value) {
        comma();
        indent();
        out_ << '"' << key << "\": " << value;
    }
    void field(const std::string& key, int value) {
        comma();
        indent();
        out_ << '"' << key << "\": " << value;
    }
    void field(const std::string& key, bool value) {
        comma();
        indent();
        out_ << '"' << key << "\": " << (value ? "true" : "false");
    }

private:
    void open(char c) {
        out_ << c;
        first_ = true;
        ++depth_;
    }
    void close(char c) {
        --depth_;
        out_ << '\n';
        for (int i = 0; i < depth_; ++i) {
            out_ << "  ";
        }
        out_ << c;
        first_ = false;
        if (depth_ == 0) {
            out_ << '\n';
        }
    }
    void comma() {
        if (!first_) {
            out_ << ',';
        }
        first_ = false;
    }
    void indent() {
        if (array_ && depth_ > 0) {
            out_ << ' ';
            array_ = false;
            return;
        }
        out_ << '\n';
        for (int i = 0; i < depth_; ++i) {
            out_ << "  ";
        }
    }

    std::ostream& out_;
    int depth_ = 0;
    bool first_ = true;
    bool array_ = false;
};

void write_summary_block(JsonWriter& json, const std::string& key,
                         const stats::SummaryStats& s) {
    json.key_object(key);
    json.field("n", s.n);
    json.field("defined", s.defined);
    json.field("mean", s.mean);
    json.field("stddev", s.stddev);
    json.field("ci95_low", s.ci95_low);
    json.field("ci95_high", s.ci95_high);
    json.end_object();
}

} // namespace

CellReport aggregate_replications(std::span<const RunResult> results) {
    if (results.empty()) {
        throw std::invalid_argument("aggregate_replications: no results");
    }
    const RunResult& first = results.front();
    for (const RunResult& r : results) {
        if (r.policy != first.policy || r.bus_count != first.bus_count ||
            r.duration != first.duration) {
            throw std::invalid_argument(
                "aggregate_replications: mixed configurations in one cell");
        }
    }

    CellReport cell;
    cell.policy = first.policy;
    cell.bus_count = first.bus_count;
    cell.duration = first.duration;
    cell.replications = static_cast<int>(results.size());

    std::vector<double> total;
    std::vector<double> tip;
    std::vector<double> pow;
    std::vector<double> network;
    std::size_t confirmed = 0;

    for (const RunResult& r : results) {
        cell.attempts += r.records.size();
        cell.successes += r.successes;
        cell.failures += r.failures;
        cell.scheduled_publications += r.scheduled_publications;
        confirmed += r.confirmed_bundles;

        if (cell.attempts_per_node.size() < r.attempts_per_node.size()) {
            cell.attempts_per_node.resize(r.attempts_per_node.size(), 0);
            cell.successes_per_node.resize(r.successes_per_node.size(), 0);
        }
        for (std::size_t i = 0; i < r.attempts_per_node.size(); ++i) {
            cell.attempts_per_node[i] += r.attempts_per_node[i];
            cell.successes_per_node[i] += r.successes_per_node[i];
        }

        std::vector<double> rep_total;
        std::vector<double> rep_tip;
        std::vector<double> rep_pow;
        std::vector<double> rep_net;
        for (const stats::TxRecord& rec : r.records) {
            if (!rec.success) {
                continue;
            }
            rep_total.push_back(rec.total_latency);
            rep_tip.push_back(rec.tip_selection_latency.value());
            rep_pow.push_back(rec.pow_latency.value());
            rep_net.push_back(rec.network_latency.value());
        }
        total.insert(total.end(), rep_total.begin(), rep_total.end());
        tip.insert(tip.end(), rep_tip.begin(), rep_tip.end());
        pow.insert(pow.end(), rep_pow.begin(), rep_pow.end());
        network.insert(network.end(), rep_net.begin(), rep_net.end());

        ReplicationRow row;
        row.replication = r.replication_index;
        row.attempts = r.records.size();
        row.successes = r.successes;
        row.failures = r.failures;
        row.error_rate = row.attempts > 0 ? static_cast<double>(row.failures) /
                                                static_cast<double>(row.attempts)
                                          : 0.0;
        row.mean_total = mean_of(rep_total);
        row.mean_tip = mean_of(rep_tip);
        row.mean_pow = mean_of(rep_pow);
        row.mean_network = mean_of(rep_net);
        row.std_tip = stddev_of(rep_tip);
        row.std_pow = stddev_of(rep_pow);
        cell.per_replication.push_back(row);
    }

    cell.total = stats::summarize(total, cell.failures, cell.attempts);
    cell.tip = stats::summarize(tip, cell.failures, cell.attempts);
    cell.pow = stats::summarize(pow, cell.failures, cell.attempts);
    cell.network = stats::summarize(network, cell.failures, cell.attempts);
    if (!total.empty()) {
        cell.box = stats::boxplot(total);
        cell.ecdf = stats::ecdf(total);
    }
    cell.confirmed_fraction =
        cell.successes > 0 ? static_cast<double>(confirmed) /
                                 static_cast<double>(cell.successes)
                           : 0.0;
    const double bus_hours = static_cast<double>(cell.bus_count) * (cell.duration / 3600.0) *
                             static_cast<double>(cell.replications);
    cell.scheduled_per_bus_hour =
        bus_hours > 0.0 ? static_cast<double>(cell.scheduled_publications) / bus_hours : 0.0;
    return cell;
}

CellReport aggregate_records(std::span<const stats::TxRecord> records,
                             client::SelectionPolicy policy, int bus_count,
                             double duration) {
    std::map<int, RunResult> by_replication;
    for (const stats::TxRecord& rec : records) {
        RunResult& r = by_replication[rec.replication_index];
        r.policy = policy;
        r.bus_count = bus_count;
        r.duration = duration;
        r.replication_index = rec.replication_index;
        if (rec.node_id >= 0) {
            const auto needed = static_cast<std::size_t>(rec.node_id) + 1;
            if (r.attempts_per_node.size() < needed) {
                r.attempts_per_node.resize(needed, 0);
                r.successes_per_node.resize(needed, 0);
            }
            ++r.attempts_per_node[static_cast<std::size_t>(rec.node_id)];
            if (rec.success) {
                ++r.successes_per_node[static_cast<std::size_t>(rec.node_id)];
            }
        }
        if (rec.success) {
            ++r.successes;
        } else {
            ++r.failures;
        }
        r.records.push_back(rec);
    }
    std::vector<RunResult> results;
    results.reserve(by_replication.size());
    for (auto& [rep, result] : by_replication) {
        results.push_back(std::move(result));
    }
    return aggregate_replications(results);
}

void write_summary_json(std::ostream& out, const CellReport& cell) {
    JsonWriter json(out);
    json.begin_object();
    json.field("schema_version", 1);
    json.field("policy", client::policy_name(cell.policy));
    json.field("bus_count", cell.bus_count);
    json.field("duration_s", cell.duration);
    json.field("replications", cell.replications);
    json.field("attempts", cell.attempts);
    json.field("successes", cell.successes);
    json.field("failures", cell.failures);
    json.field("error_rate", cell.total.error_rate);
    json.field("scheduled_publications", cell.scheduled_publications);
    json.field("scheduled_per_bus_hour", cell.scheduled_per_bus_hour);
    json.field("confirmed_fraction", cell.confirmed_fraction);
    write_summary_block(json, "latency_total_s", cell.total);
    write_summary_block(json, "latency_tip_selection_s", cell.tip);
    write_summary_block(json, "latency_pow_s", cell.pow);
    write_summary_block(json, "latency_network_s", cell.network);
    json.key_object("boxplot_total_s");
    json.field("q1", cell.box.q1);
    json.field("median", cell.box.median);
    json.field("q3", cell.box.q3);
    json.field("iqr", cell.box.iqr);
    json.field("whisker_low", cell.box.whisker_low);
    json.field("whisker_high", cell.box.whisker_high);
    json.field("mean", cell.box.mean);
    json.field("outlier_count", cell.box.outliers.size());
    json.end_object();
    json.begin_array("per_replication");
    for (const ReplicationRow& row : cell.per_replication) {
        json.array_object();
        json.field("replication", row.replication);
        json.field("attempts", row.attempts);
        json.field("successes", row.successes);
        json.field("failures", row.failures);
        json.field("error_rate", row.error_rate);
        json.field("mean_total_s", row.mean_total);
        json.field("mean_tip_selection_s", row.mean_tip);
        json.field("mean_pow_s", row.mean_pow);
        json.field("mean_network_s", row.mean_network);
        json.field("std_tip_selection_s", row.std_tip);
        json.field("std_pow_s", row.std_pow);
        json.end_array_object();
    }
    json.end_array();
    json.end_object();
}

void write_ecdf_csv(std::ostream& out, const stats::EcdfSeries& series) {
    out << "latency_s,cumulative_fraction\n";
    for (const auto& [value, fraction] : series.points) {
        out << format_fixed(value) << ',' << format_fixed(fraction) << '\n';
    }
}

void write_boxplot_csv(std::ostream& out, const stats::BoxplotStats& box) {
    out << "q1,median,q3,iqr,whisker_low,whisker_high,mean,outlier_count\n";
    out << format_fixed(box.q1) << ',' << format_fixed(box.median) << ','
        << format_fixed(box.q3) << ',' << format_fixed(box.iqr) << ','
        << format_fixed(box.whisker_low) << ',' << format_fixed(box.whisker_high) << ','
        << format_fixed(box.mean) << ',' << box.outliers.size() << '\n';
    out << "outliers\n";
    for (double x : box.outliers) {
        out << format_fixed(x) << '\n';
    }
}

void write_rep_means_csv(std::ostream& out, std::span<const ReplicationRow> rows) {
    out << "replication,attempts,successes,failures,error_rate,mean_total_s,"
           "mean_tip_selection_s,mean_pow_s,mean_network_s,std_tip_selection_s,std_pow_s\n";
    for (const ReplicationRow& row : rows) {
        out << row.replication << ',' << row.attempts << ',' << row.successes << ','
            << row.failures << ',' << format_fixed(row.error_rate) << ','
            << format_fixed(row.mean_total) << ',' << format_fixed(row.mean_tip) << ','
            << format_fixed(row.mean_pow) << ',' << format_fixed(row.mean_network) << ','
            << format_fixed(row.std_tip) << ',' << format_fixed(row.std_pow) << '\n';
    }
}

namespace {

void write_file(const std::filesystem::path& path, const auto& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    writer(out);
    if (!out.good()) {
        throw IoError("write failed: " + path.string());
    }
}

} // namespace

void export_cell(const CellReport& cell, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "summary.json", [&](std::ostream& o) { write_summary_json(o, cell); });
    write_file(dir / "ecdf.csv", [&](std::ostream& o) { write_ecdf_csv(o, cell.ecdf); });
    write_file(dir / "boxplot.csv", [&](std::ostream& o) { write_boxplot_csv(o, cell.box); });
    write_file(dir / "rep_means.csv",
               [&](std::ostream& o) { write_rep_means_csv(o, cell.per_replication); });
}

void write_summary_table(std::ostream& out, std::span<const CellReport> cells) {
    out << "buses  heuristic        avg latency   conf. int. (95%)        errors\n";
    out << "-----  ---------------  ------------  ----------------------  -------\n";
    char line[160];
    for (const CellReport& cell : cells) {
        std::snprintf(line, sizeof(line), "%-5d  %-15s  %8.2f sec  [%8.2f, %8.2f] sec  %5.2f%%\n",
                      cell.bus_count, client::policy_name(cell.policy).c_str(),
                      cell.total.mean, cell.total.ci95_low, cell.total.ci95_high,
                      cell.total.error_rate * 100.0);
        out << line;
    }
}

void write_summary_table_csv(std::ostream& out, std::span<const CellReport> cells) {
    out << "buses,heuristic,avg_latency_s,ci95_low_s,ci95_high_s,error_rate\n";
    for (const CellReport& cell : cells) {
        out << cell.bus_count << ',' << client::policy_name(cell.policy) << ','
            << format_fixed(cell.total.mean) << ',' << format_fixed(cell.total.ci95_low)
            << ',' << format_fixed(cell.total.ci95_high) << ','
            << format_fixed(cell.total.error_rate) << '\n';
    }
}

} // namespace tanglesim::report
