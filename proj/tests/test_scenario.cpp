#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "tanglesim/scenario.hpp"

using namespace tanglesim;

namespace {

ScenarioConfig small_config(int buses = 20) {
    ScenarioConfig config;
    config.bus_count = buses;
    config.replications = 1;
    return config;
}

} // namespace

TEST_CASE("a zero-bus scenario produces no records") {
    const RunResult result = run_scenario(small_config(0), 42);
    CHECK(result.records.empty());
    CHECK(result.scheduled_publications == 0);
    CHECK(result.successes == 0);
    CHECK(result.failures == 0);
    // the coordinator still runs
    CHECK(result.milestone_count == 60);
    CHECK(result.ledger_size == 1 + 60);
}

TEST_CASE("attempts are conserved: every record is a success or a failure") {
    const RunResult result = run_scenario(small_config(40), 42);
    CHECK(result.successes + result.failures == result.records.size());
    std::size_t succ = 0;
    for (const auto& rec : result.records) {
        if (rec.success) {
            ++succ;
            CHECK(rec.tip_selection_latency.has_value());
            CHECK(rec.pow_latency.has_value());
            CHECK(rec.network_latency.has_value());
            CHECK(*rec.tip_selection_latency >= 0.0);
            // exact decomposition in virtual time
            CHECK(rec.total_latency ==
                  doctest::Approx(*rec.tip_selection_latency + *rec.pow_latency +
                                  *rec.network_latency)
                      .epsilon(1e-12));
        } else {
            CHECK_FALSE(rec.tip_selection_latency.has_value());
            CHECK(rec.total_latency > 0.0);
        }
    }
    CHECK(succ == result.successes);
}

TEST_CASE("each successful bundle adds exactly three transactions") {
    const RunResult result = run_scenario(small_config(40), 42);
    // genesis + milestones + 3 per successful bundle; failures add nothing
    CHECK(result.ledger_size == 1 + result.milestone_count + 3 * result.successes);
}

TEST_CASE("the 60-bus hour generates about 45 messages per bus") {
    ScenarioConfig config = small_config(60);
    const RunResult result = run_scenario(config, 42);
    const double per_bus = static_cast<double>(result.scheduled_publications) / 60.0;
    CHECK(per_bus > 40.0);
    CHECK(per_bus < 50.0);
    // with the calibrated pool the bulk of the workload is attempted
    CHECK(result.records.size() >
          static_cast<std::size_t>(0.8 * result.scheduled_publications));
}

TEST_CASE("identical config and seed give byte-identical exports") {
    const ScenarioConfig config = small_config(30);
    const RunResult a = run_scenario(config, 7);
    const RunResult b = run_scenario(config, 7);
    std::ostringstream outa;
    std::ostringstream outb;
    stats::write_records_csv(outa, a.records);
    stats::write_records_csv(outb, b.records);
    CHECK(outa.str() == outb.str());
    CHECK(a.scheduled_publications == b.scheduled_publications);
    CHECK(a.confirmed_bundles == b.confirmed_bundles);

    SUBCASE("a different seed gives a different run") {
        const RunResult c = run_scenario(config, 8);
        std::ostringstream outc;
        stats::write_records_csv(outc, c.records);
        CHECK(outa.str() != outc.str());
    }
}

TEST_CASE("an unfiltered pool with no eligible nodes is a configuration error") {
    ScenarioConfig config = small_config(5);
    config.pool.sync_fraction = 0.0;
    CHECK_THROWS_AS(run_scenario(config, 42), ConfigError);
}

TEST_CASE("milestones confirm most of the settled ledger") {
    const RunResult result = run_scenario(small_config(40), 42);
    CHECK(result.milestone_count == 60);
    CHECK(result.confirmed_bundles > 0);
    CHECK(result.confirmed_bundles <= result.successes);
    // everything attached more than a milestone period before the horizon
    // should be confirmed, so the fraction is high
    CHECK(static_cast<double>(result.confirmed_bundles) /
              static_cast<double>(result.successes) >
          0.8);
}

TEST_CASE("the ledger dump interface writes one file per replication") {
    ScenarioConfig config = small_config(5);
    const auto base = std::filesystem::temp_directory_path() / "tanglesim_ledger_dump";
    std::filesystem::remove_all(base);
    std::filesystem::create_directories(base);
    config.ledger_dump = (base / "ledger").string();
    run_scenario(config, 42, 3);
    const auto path = base / "ledger_rep03.csv";
    REQUIRE(std::filesystem::exists(path));
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "id,trunk,branch,timestamp,is_milestone,payload_len");
    std::filesystem::remove_all(base);
}

TEST_CASE("per-node counters add up") {
    const RunResult result = run_scenario(small_config(40), 42);
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    for (std::size_t i = 0; i < result.attempts_per_node.size(); ++i) {
        attempts += result.attempts_per_node[i];
        successes += result.successes_per_node[i];
        CHECK(result.successes_per_node[i] <= result.attempts_per_node[i]);
    }
    CHECK(attempts == result.records.size());
    CHECK(successes == result.successes);
}

TEST_CASE("a bus never has two outstanding requests") {
    // Reconstructed from records: for each bus, the node-interaction windows
    // of consecutive attempts must not overlap. Since deferral measures from
    // the scheduled time, we check completion ordering per bus instead:
    // records for one bus complete in submission order.
    const RunResult result = run_scenario(small_config(25), 42);
    std::map<std::string, double> last_submit;
    for (const auto& rec : result.records) {
        auto [it, inserted] = last_submit.try_emplace(rec.bus_id, rec.submit_time);
        if (!inserted) {
            CHECK(rec.submit_time >= it->second); // chain order preserved
            it->second = rec.submit_time;
        }
    }
}
