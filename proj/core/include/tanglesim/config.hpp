#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "tanglesim/client.hpp"
#include "tanglesim/node_network.hpp"

namespace tanglesim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Which nodes count as "busy" for the adaptive selection heuristic.
/// Global: nodes whose outstanding requests from this run have reached
/// their service concurrency, so one more request would have to queue.
/// PerBus: only the node that served the bus's previous request, and only
/// when this publication fired while that request was still pending.
enum class BusyScope { Global, PerBus };

struct EstimatorConfig {
    double alpha = 0.125;
    double beta = 0.25;
    bool shared = true;             // one RTT table for the whole run
    double failure_penalty = 300.0; // srtt floor applied on failed requests
    BusyScope busy_scope = BusyScope::Global;
    // Cold-start exploration: selections draw unsampled nodes until the
    // table knows min(min_known, pool size) of them. 0 disables it.
    int min_known = 60;
};

struct ScenarioConfig {
    int bus_count = 60;
    double duration = 3600.0;
    client::SelectionPolicy policy = client::SelectionPolicy::AdaptiveRtt;
    int replications = 12;
    std::uint64_t seed = 42;
    std::string trace = "synthetic"; // trace file path, or "synthetic"
    double milestone_period = 60.0;
    double publish_rate_per_hour = 45.0; // synthetic workload rate
    std::string ledger_dump; // when set, each run writes <path>_repNN.csv
    net::PoolConfig pool;
    EstimatorConfig estimator;
};

/// Parses an INI-style `key = value` file with [scenario], [pool],
/// [class.good|mediocre|bad] and [estimator] sections. Unknown sections or
/// keys are rejected (strict mode); '#' starts a comment.
ScenarioConfig parse_config_file(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

/// Range-checks every field and verifies referenced files exist. Throws
/// ConfigError naming the offending key.
void validate(const ScenarioConfig& config);

} // namespace tanglesim
