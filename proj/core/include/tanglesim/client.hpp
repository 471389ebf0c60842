#pragma once

#include <deque>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tanglesim/rng.hpp"

namespace tanglesim::client {

enum class SelectionPolicy { FixedRandom, DynamicRandom, AdaptiveRtt };

std::string policy_name(SelectionPolicy policy);
std::optional<SelectionPolicy> policy_from_name(std::string_view name);

struct TraceRecord {
    std::string bus_id;
    double timestamp = 0.0; // seconds from scenario start
    double lat = 0.0;
    double lon = 0.0;
};

/// One scheduled publication of a bus.
struct PublishSlot {
    double time = 0.0;
    double lat = 0.0;
    double lon = 0.0;
};

struct BusSchedule {
    std::string bus_id;
    std::vector<PublishSlot> slots; // sorted by time, truncated to duration
};

struct TraceLoadResult {
    std::vector<BusSchedule> buses;
    std::size_t skipped_rows = 0; // malformed lines, reported as a warning count
};

/// Parses a trace stream of comma-separated `bus_id,timestamp,lat,lon` rows.
/// '#'-prefixed lines are comments; one leading header row is tolerated.
/// Rows that fail to parse are skipped and counted. Buses are taken in order
/// of first appearance; fewer than `bus_count` distinct buses is an error
/// (std::runtime_error).
TraceLoadResult load_traces(std::istream& input, int bus_count, double duration);
TraceLoadResult load_traces_file(const std::string& path, int bus_count, double duration);

/// Poisson-arrival schedules at `rate_per_hour`, one independent stream per
/// bus, for running without a trace file.
std::vector<BusSchedule> synthetic_schedules(int bus_count, double duration,
                                             double rate_per_hour, std::uint64_t seed);

/// Smoothed round-trip-time table over nodes (Jacobson-style: srtt and
/// rttvar updated with gains alpha and beta).
class RttEstimator {
public:
    struct Entry {
        double srtt = 0.0;
        double rttvar = 0.0;
        std::uint64_t samples = 0;
    };

    RttEstimator(std::size_t node_count, double alpha = 0.125, double beta = 0.25);

    /// Feeds one measured sample (> 0, else std::invalid_argument).
    /// First sample: srtt = sample, rttvar = sample / 2.
    void update(int node_id, double sample);

    /// Failure penalty: raises srtt to at least `floor_value` and counts a
    /// sample, so the ranking steers away from failing nodes.
    void penalize(int node_id, double floor_value);

    const Entry* entry(int node_id) const;
    std::size_t known_count() const { return known_; }

private:
    std::vector<Entry> entries_;
    std::size_t known_ = 0;
    double alpha_;
    double beta_;
};

/// Uniform draw from `pool`, pinned on first use for the whole run.
int select_node_fixed_random(std::optional<int>& pinned, std::span<const int> pool,
                             RngStream& rng);

/// Fresh uniform draw per publication.
int select_node_dynamic_random(std::span<const int> pool, RngStream& rng);

/// Best known node by srtt that is not busy; when every known node is busy
/// (or none is known) falls back to a uniform draw over pool minus busy, and
/// over the whole pool when that is empty. Ties break toward the lower id.
int select_node_adaptive_rtt(const RttEstimator& estimator, std::span<const int> pool,
                             const std::set<int>& busy, RngStream& rng);

/// Per-bus publication state inside a run.
struct BusAgent {
    std::string bus_id;
    int index = -1;
    std::vector<PublishSlot> schedule;
    std::size_t next_slot = 0;
    std::optional<int> pinned_node;           // FixedRandom
    std::optional<std::uint64_t> pending;     // outstanding request id
    std::optional<int> pending_node;          // node serving the pending request
    std::optional<int> last_node;             // node that served the previous request
    std::deque<std::size_t> deferred;         // slot indexes awaiting the outcome
};

} // namespace tanglesim::client
