#include "tanglesim/client.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tanglesim::client {

std::string policy_name(SelectionPolicy policy) {
    switch (policy) {
    case SelectionPolicy::FixedRandom:
        return "fixed-random";
    case SelectionPolicy::DynamicRandom:
        return "dynamic-random";
    case SelectionPolicy::AdaptiveRtt:
        return "adaptive-rtt";
    }
    return "unknown";
}

std::optional<SelectionPolicy> policy_from_name(std::string_view name) {
    if (name == "fixed-random" || name == "fixed_random") {
        return SelectionPolicy::FixedRandom;
    }
    if (name == "dynamic-random" || name == "dynamic_random") {
        return SelectionPolicy::DynamicRandom;
    }
    if (name == "adaptive-rtt" || name == "adaptive_rtt") {
        return SelectionPolicy::AdaptiveRtt;
    }
    return std::nullopt;
}

namespace {

bool parse_double(std::string_view field, double& out) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::optional<TraceRecord> parse_trace_row(const std::string& line) {
    std::array<std::string_view, 4> fields;
    std::size_t count = 0;
    std::size_t start = 0;
    const std::string_view view(line);
    while (count < 4) {
        const std::size_t comma = view.find(',', start);
        if (comma == std::string_view::npos) {
            fields[count++] = view.substr(start);
            break;
        }
        fields[count++] = view.substr(start, comma - start);
        start = comma + 1;
    }
    if (count != 4) {
        return std::nullopt;
    }
    TraceRecord rec;
    rec.bus_id = std::string(fields[0]);
    if (rec.bus_id.empty() || !parse_double(fields[1], rec.timestamp) ||
        !parse_double(fields[2], rec.lat) || !parse_double(fields[3], rec.lon)) {
        return std::nullopt;
    }
    if (rec.timestamp < 0.0 || rec.lat < -90.0 || rec.lat > 90.0 || rec.lon < -180.0 ||
        rec.lon > 180.0) {
        return std::nullopt;
    }
    return rec;
}

} // namespace

TraceLoadResult load_traces(std::istream& input, int bus_count, double duration) {
    if (bus_count < 0) {
        throw std::invalid_argument("load_traces: bus_count must be >= 0");
    }
    TraceLoadResult result;
    std::map<std::string, std::size_t> index_of;
    std::vector<BusSchedule> all;

    std::string line;
    bool first_data_line = true;
    while (std::getline(input, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::optional<TraceRecord> rec = parse_trace_row(line);
        if (!rec) {
            if (!first_data_line) {
                ++result.skipped_rows;
            }
            first_data_line = false; // a leading header row is tolerated silently
            continue;
        }
        first_data_line = false;
        auto [it, inserted] = index_of.try_emplace(rec->bus_id, all.size());
        if (inserted) {
            all.push_back(BusSchedule{rec->bus_id, {}});
        }
        if (rec->timestamp < duration) {
            all[it->second].slots.push_back(PublishSlot{rec->timestamp, rec->lat, rec->lon});
        }
    }

    if (static_cast<int>(all.size()) < bus_count) {
        throw std::runtime_error("load_traces: trace has " + std::to_string(all.size()) +
                                 " distinct buses, need " + std::to_string(bus_count));
    }
    all.resize(static_cast<std::size_t>(bus_count));
    for (BusSchedule& bus : all) {
        std::stable_sort(bus.slots.begin(), bus.slots.end(),
                         [](const PublishSlot& a, const PublishSlot& b) {
                             return a.time < b.time;
                         });
    }
    result.buses = std::move(all);
    return result;
}

TraceLoadResult load_traces_file(const std::string& path, int bus_count, double duration) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_traces: cannot open trace file " + path);
    }
    return load_traces(in, bus_count, duration);
}

std::vector<BusSchedule> synthetic_schedules(int bus_count, double duration,
                                             double rate_per_hour, std::uint64_t seed) {
    if (bus_count < 0) {
        throw std::invalid_argument("synthetic_schedules: bus_count must be >= 0");
    }
    if (rate_per_hour <= 0.0) {
        throw std::invalid_argument("synthetic_schedules: rate must be > 0");
    }
    const double mean_gap = 3600.0 / rate_per_hour;
    std::vector<BusSchedule> buses;
    buses.reserve(static_cast<std::size_t>(bus_count));
    for (int i = 0; i < bus_count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "bus-%03d", i);
        RngStream rng(seed, std::string("trace/") + name);
        BusSchedule bus{name, {}};
        double t = rng.exponential(mean_gap);
        while (t < duration) {
            bus.slots.push_back(PublishSlot{t, 0.0, 0.0});
            t += rng.exponential(mean_gap);
        }
        buses.push_back(std::move(bus));
    }
    return buses;
}

RttEstimator::RttEstimator(std::size_t node_count, double alpha, double beta)
    : entries_(node_count), alpha_(alpha), beta_(beta) {}

void RttEstimator::update(int node_id, double sample) {
    if (sample <= 0.0) {
        throw std::invalid_argument("RttEstimator: sample must be > 0");
    }
    Entry& e = entries_.at(static_cast<std::size_t>(node_id));
    if (e.samples == 0) {
        e.srtt = sample;
        e.rttvar = sample / 2.0;
        ++known_;
    } else {
        e.rttvar = (1.0 - beta_) * e.rttvar + beta_ * std::abs(e.srtt - sample);
        e.srtt = (1.0 - alpha_) * e.srtt + alpha_ * sample;
    }
    ++e.samples;
}

void RttEstimator::penalize(int node_id, double floor_value) {
    Entry& e = entries_.at(static_cast<std::size_t>(node_id));
    if (e.samples == 0) {
        e.srtt = floor_value;
        e.rttvar = floor_value / 2.0;
        ++known_;
    } else {
        e.srtt = std::max(e.srtt, floor_value);
    }
    ++e.samples;
}

const RttEstimator::Entry* RttEstimator::entry(int node_id) const {
    const Entry& e = entries_.at(static_cast<std::size_t>(node_id));
    return e.samples > 0 ? &e : nullptr;
}

int select_node_fixed_random(std::optional<int>& pinned, std::span<const int> pool,
                             RngStream& rng) {
    if (pool.empty()) {
        throw std::invalid_argument("select_node_fixed_random: empty pool");
    }
    if (!pinned) {
        pinned = pool[rng.uniform_index(pool.size())];
    }
    return *pinned;
}

int select_node_dynamic_random(std::span<const int> pool, RngStream& rng) {
    if (pool.empty()) {
        throw std::invalid_argument("select_node_dynamic_random: empty pool");
    }
    return pool[rng.uniform_index(pool.size())];
}

int select_node_adaptive_rtt(const RttEstimator& estimator, std::span<const int> pool,
                             const std::set<int>& busy, RngStream& rng) {
    if (pool.empty()) {
        throw std::invalid_argument("select_node_adaptive_rtt: empty pool");
    }
    int best = -1;
    double best_srtt = 0.0;
    for (int node : pool) {
        if (busy.contains(node)) {
            continue;
        }
        const RttEstimator::Entry* e = estimator.entry(node);
        if (e == nullptr) {
            continue;
        }
        if (best < 0 || e->srtt < best_srtt) {
            best = node;
            best_srtt = e->srtt;
        }
    }
    if (best >= 0) {
        return best;
    }
    std::vector<int> candidates;
    candidates.reserve(pool.size());
    for (int node : pool) {
        if (!busy.contains(node)) {
            candidates.push_back(node);
        }
    }
    if (candidates.empty()) {
        return pool[rng.uniform_index(pool.size())];
    }
    return candidates[rng.uniform_index(candidates.size())];
}

} // namespace tanglesim::client
