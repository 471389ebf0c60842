#include "tanglesim/stats.hpp"

#include "tanglesim/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tanglesim::stats {

double quantile_linear(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile_linear: empty sample");
    }
    if (p <= 0.0) {
        return sorted.front();
    }
    if (p >= 1.0) {
        return sorted.back();
    }
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

SummaryStats summarize(std::span<const double> samples, std::size_t errors,
                       std::size_t attempts) {
    if (errors > attempts) {
        throw std::invalid_argument("summarize: errors exceed attempts");
    }
    SummaryStats s;
    s.n = samples.size();
    s.error_rate = attempts > 0
                       ? static_cast<double>(errors) / static_cast<double>(attempts)
                       : 0.0;
    if (samples.empty()) {
        return s;
    }
    s.defined = true;
    double sum = 0.0;
    for (double x : samples) {
        sum += x;
    }
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double x : samples) {
            const double d = x - s.mean;
            ss += d * d;
        }
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    const double half = 1.96 * s.stddev / std::sqrt(static_cast<double>(s.n));
    s.ci95_low = s.mean - half;
    s.ci95_high = s.mean + half;
    return s;
}

BoxplotStats boxplot(std::span<const double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("boxplot: empty sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    BoxplotStats b;
    b.q1 = quantile_linear(sorted, 0.25);
    b.median = quantile_linear(sorted, 0.50);
    b.q3 = quantile_linear(sorted, 0.75);
    b.iqr = b.q3 - b.q1;
    const double fence_low = b.q1 - 1.5 * b.iqr;
    const double fence_high = b.q3 + 1.5 * b.iqr;

    double sum = 0.0;
    b.whisker_low = b.q1;
    b.whisker_high = b.q3;
    bool found_low = false;
    bool found_high = false;
    for (double x : sorted) {
        sum += x;
        if (x < fence_low || x > fence_high) {
            b.outliers.push_back(x);
            continue;
        }
        if (!found_low) {
            b.whisker_low = x; // first in-fence datum: the minimum inside
            found_low = true;
        }
        b.whisker_high = x;
        found_high = true;
    }
    if (!found_low || !found_high) {
        // Degenerate: all data outside the fences cannot happen with a
        // nonempty sample (the quartiles themselves lie inside).
        b.whisker_low = b.q1;
        b.whisker_high = b.q3;
    }
    b.mean = sum / static_cast<double>(sorted.size());
    return b;
}

EcdfSeries ecdf(std::span<const double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("ecdf: empty sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    EcdfSeries series;
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const bool last_of_value = (i + 1 == sorted.size()) || sorted[i + 1] != sorted[i];
        if (last_of_value) {
            series.points.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
        }
    }
    return series;
}

double EcdfSeries::fraction_at(double x) const {
    double fraction = 0.0;
    for (const auto& [value, cum] : points) {
        if (value <= x) {
            fraction = cum;
        } else {
            break;
        }
    }
    return fraction;
}

std::string format_fixed(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

namespace {

constexpr const char* kRecordsHeader =
    "replication,bus_id,node_id,policy,submit_time,success,"
    "tip_selection_latency,pow_latency,network_latency,total_latency";

std::string optional_fixed(const std::optional<double>& v) {
    return v ? format_fixed(*v) : std::string();
}

} // namespace

void write_records_csv(std::ostream& out, std::span<const TxRecord> records) {
    out << kRecordsHeader << '\n';
    for (const TxRecord& r : records) {
        out << r.replication_index << ',' << r.bus_id << ',' << r.node_id << ','
            << client::policy_name(r.policy) << ',' << format_fixed(r.submit_time) << ','
            << (r.success ? 1 : 0) << ',' << optional_fixed(r.tip_selection_latency) << ','
            << optional_fixed(r.pow_latency) << ',' << optional_fixed(r.network_latency)
            << ',' << format_fixed(r.total_latency) << '\n';
    }
}

void write_records_csv_file(const std::string& path, std::span<const TxRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    write_records_csv(out, records);
    if (!out.good()) {
        throw IoError("write failed: " + path);
    }
}

std::vector<TxRecord> read_records_csv(std::istream& in) {
    std::vector<TxRecord> records;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("records csv: empty input");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kRecordsHeader) {
        throw std::runtime_error("records csv: unexpected header");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        // A trailing empty field is dropped by getline; restore it.
        while (fields.size() < 10) {
            fields.emplace_back();
        }
        if (fields.size() != 10) {
            throw std::runtime_error("records csv: bad field count at line " +
                                     std::to_string(line_no));
        }
        TxRecord r;
        try {
            r.replication_index = std::stoi(fields[0]);
            r.bus_id = fields[1];
            r.node_id = std::stoi(fields[2]);
            const auto policy = client::policy_from_name(fields[3]);
            if (!policy) {
                throw std::runtime_error("unknown policy " + fields[3]);
            }
            r.policy = *policy;
            r.submit_time = std::stod(fields[4]);
            r.success = fields[5] == "1";
            if (!fields[6].empty()) {
                r.tip_selection_latency = std::stod(fields[6]);
            }
            if (!fields[7].empty()) {
                r.pow_latency = std::stod(fields[7]);
            }
            if (!fields[8].empty()) {
                r.network_latency = std::stod(fields[8]);
            }
            r.total_latency = std::stod(fields[9]);
        } catch (const std::exception& e) {
            throw std::runtime_error("records csv: parse error at line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<TxRecord> read_records_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    return read_records_csv(in);
}

} // namespace tanglesim::stats
