#pragma once

#include <cstdint>
#include <vector>

#include "tanglesim/config.hpp"
#include "tanglesim/stats.hpp"

namespace tanglesim {

/// Output of one scenario run: every attempted publication plus the workload
/// and ledger counters. A pure function of (config, seed): two runs with the
/// same inputs produce identical results.
struct RunResult {
    client::SelectionPolicy policy = client::SelectionPolicy::FixedRandom;
    int bus_count = 0;
    double duration = 0.0;
    std::uint64_t seed = 0;
    int replication_index = 0;

    std::size_t scheduled_publications = 0; // generated workload size
    std::vector<stats::TxRecord> records;   // attempted publications, outcome order
    std::size_t successes = 0;
    std::size_t failures = 0;

    std::size_t ledger_size = 0; // transactions incl. genesis and milestones
    std::size_t milestone_count = 0;
    std::size_t confirmed_bundles = 0; // successful bundles inside the final cone

    std::vector<std::uint64_t> attempts_per_node;
    std::vector<std::uint64_t> successes_per_node;
};

/// Runs one replication. `seed` is the fully derived per-replication seed.
/// Throws ConfigError / std::runtime_error on invalid configuration or a
/// missing trace.
RunResult run_scenario(const ScenarioConfig& config, std::uint64_t seed,
                       int replication_index = 0);

} // namespace tanglesim
