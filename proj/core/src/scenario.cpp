#include "tanglesim/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

#include "tanglesim/event_queue.hpp"
#include "tanglesim/mam.hpp"
#include "tanglesim/tangle.hpp"

namespace tanglesim {

namespace {

using client::BusAgent;
using client::SelectionPolicy;

struct InFlight {
    int bus_index = -1;
    int node_id = -1;
    double generation_time = 0.0; // when the message had to be published
    double launch_time = 0.0;     // when it was actually transmitted
    double tip_done_time = 0.0;
    double pow_done_time = 0.0;
    double network_delay = 0.0;
    bool failed = false;
    mam::MamBundle bundle;
    TxId data_tx; // set at attach time
    bool attached = false;
};

class ScenarioRun {
public:
    ScenarioRun(const ScenarioConfig& config, std::uint64_t seed, int replication)
        : config_(config), seed_(seed), replication_(replication),
          queue_(config.duration), milestone_rng_(seed, "milestone") {}

    RunResult run() {
        setup();
        while (auto event = queue_.pop()) {
            dispatch(*event);
        }
        return finish();
    }

private:
    void setup() {
        validate(config_);

        RngStream pool_rng(seed_, "pool");
        auto profiles = net::build_pool(config_.pool, pool_rng);
        eligible_ = net::filter_pool(profiles);
        if (eligible_.empty()) {
            throw ConfigError("scenario: no eligible nodes after pool filtering");
        }
        nodes_.reserve(profiles.size());
        node_rng_.reserve(profiles.size());
        for (std::size_t i = 0; i < profiles.size(); ++i) {
            nodes_.emplace_back(static_cast<int>(i), profiles[i]);
            node_rng_.emplace_back(seed_, "node/" + std::to_string(i));
        }
        attempts_per_node_.assign(nodes_.size(), 0);
        successes_per_node_.assign(nodes_.size(), 0);

        std::vector<client::BusSchedule> schedules;
        if (config_.trace == "synthetic") {
            schedules = client::synthetic_schedules(config_.bus_count, config_.duration,
                                                    config_.publish_rate_per_hour, seed_);
        } else {
            schedules =
                client::load_traces_file(config_.trace, config_.bus_count, config_.duration)
                    .buses;
        }

        buses_.reserve(schedules.size());
        select_rng_.reserve(schedules.size());
        channels_.reserve(schedules.size());
        for (std::size_t i = 0; i < schedules.size(); ++i) {
            BusAgent bus;
            bus.bus_id = schedules[i].bus_id;
            bus.index = static_cast<int>(i);
            bus.schedule = std::move(schedules[i].slots);
            scheduled_publications_ += bus.schedule.size();

            const Digest secret = DigestBuilder("bus.secret")
                                      .update_u64(seed_)
                                      .update(bus.bus_id)
                                      .finish();
            const Digest key_bytes = DigestBuilder("bus.key")
                                         .update_u64(seed_)
                                         .update(bus.bus_id)
                                         .finish();
            channels_.push_back(mam::MamChannel::create(
                std::vector<std::uint8_t>(secret.begin(), secret.end()),
                mam::ChannelKey::from_bytes(key_bytes)));
            select_rng_.emplace_back(seed_, "select/" + bus.bus_id);

            for (std::size_t s = 0; s < bus.schedule.size(); ++s) {
                SimEvent ev;
                ev.fire_time = bus.schedule[s].time;
                ev.kind = EventKind::BusPublish;
                ev.bus_index = bus.index;
                queue_.schedule(ev);
            }
            buses_.push_back(std::move(bus));
        }

        if (config_.estimator.shared) {
            shared_estimator_.emplace(nodes_.size(), config_.estimator.alpha,
                                      config_.estimator.beta);
        } else {
            bus_estimators_.reserve(buses_.size());
            for (std::size_t i = 0; i < buses_.size(); ++i) {
                bus_estimators_.emplace_back(nodes_.size(), config_.estimator.alpha,
                                             config_.estimator.beta);
            }
        }

        for (double t = config_.milestone_period; t <= config_.duration;
             t += config_.milestone_period) {
            SimEvent ev;
            ev.fire_time = t;
            ev.kind = EventKind::MilestoneTick;
            queue_.schedule(ev);
        }
        SimEvent end;
        end.fire_time = config_.duration;
        end.kind = EventKind::ScenarioEnd;
        queue_.schedule(end);
    }

    void dispatch(const SimEvent& event) {
        switch (event.kind) {
        case EventKind::BusPublish:
            on_bus_publish(event);
            break;
        case EventKind::NodeTipSelectionDone:
            on_tip_selection_done(event);
            break;
        case EventKind::NodePowDone:
            on_pow_done(event);
            break;
        case EventKind::RequestFailed:
            on_request_failed(event);
            break;
        case EventKind::OutcomeDelivered:
            on_outcome_delivered(event);
            break;
        case EventKind::MilestoneTick:
            tangle_.issue_milestone(queue_.now(), milestone_rng_);
            ++milestone_count_;
            break;
        case EventKind::ScenarioEnd:
            break; // workload is bounded by construction; in-flight work drains
        }
    }

    void on_bus_publish(const SimEvent& event) {
        BusAgent& bus = buses_[static_cast<std::size_t>(event.bus_index)];
        const std::size_t slot = bus.next_slot++;
        if (bus.pending) {
            bus.deferred.push_back(slot); // keep the MAM chain in order
            return;
        }
        start_publish(bus, slot, queue_.now(), /*was_deferred=*/false);
    }

    void start_publish(BusAgent& bus, std::size_t slot_index, double now,
                       bool was_deferred) {
        const client::PublishSlot& slot = bus.schedule[slot_index];
        // Latency is measured from the moment the message had to be
        // published. A deferred publication therefore carries the wait it
        // spent queued behind the bus's previous request.
        const double generation_time = slot.time;
        char payload[128];
        std::snprintf(payload, sizeof(payload), "bus=%s;seq=%u;t=%.3f;lat=%.5f;lon=%.5f",
                      bus.bus_id.c_str(), channels_[static_cast<std::size_t>(bus.index)]
                                              .message_index(),
                      slot.time, slot.lat, slot.lon);
        mam::MamBundle bundle =
            channels_[static_cast<std::size_t>(bus.index)].publish(std::string_view(payload));

        const int node_id = select_node(bus, was_deferred);
        net::AttachRequest request;
        request.request_id = next_request_id_++;
        request.bus_index = bus.index;
        request.bundle = std::move(bundle);
        request.submit_time = now;

        bus.pending = request.request_id;
        bus.pending_node = node_id;
        if (++busy_count_[node_id] == 1) {
            busy_nodes_.insert(node_id);
        }

        InFlight flight;
        flight.bus_index = bus.index;
        flight.node_id = node_id;
        flight.generation_time = generation_time;
        flight.launch_time = now;
        in_flight_.emplace(request.request_id, std::move(flight));

        auto plan = nodes_[static_cast<std::size_t>(node_id)].submit(
            std::move(request), now, node_rng_[static_cast<std::size_t>(node_id)],
            config_.pool.failure_load_factor);
        if (plan) {
            schedule_plan(node_id, std::move(*plan));
        }
    }

    int select_node(BusAgent& bus, bool was_deferred) {
        RngStream& rng = select_rng_[static_cast<std::size_t>(bus.index)];
        switch (config_.policy) {
        case SelectionPolicy::FixedRandom:
            return client::select_node_fixed_random(bus.pinned_node, eligible_, rng);
        case SelectionPolicy::DynamicRandom:
            return client::select_node_dynamic_random(eligible_, rng);
        case SelectionPolicy::AdaptiveRtt:
            return select_adaptive(bus, was_deferred, rng);
        }
        throw std::logic_error("scenario: unhandled policy");
    }

    int select_adaptive(BusAgent& bus, bool was_deferred, RngStream& rng) {
        std::set<int> busy;
        if (config_.estimator.busy_scope == BusyScope::Global) {
            // Saturated nodes: all service slots taken by our outstanding
            // requests, so a new one would queue behind them.
            for (int node : eligible_) {
                const auto it = busy_count_.find(node);
                if (it != busy_count_.end() &&
                    it->second >= nodes_[static_cast<std::size_t>(node)].profile().workers) {
                    busy.insert(node);
                }
            }
        } else if (was_deferred && bus.last_node) {
            // The publication fired while the previous request was pending;
            // that node counts as busy for this selection.
            busy.insert(*bus.last_node);
        }

        client::RttEstimator& estimator = estimator_for(bus.index);
        const std::size_t explore_target = std::min<std::size_t>(
            static_cast<std::size_t>(std::max(config_.estimator.min_known, 0)),
            eligible_.size());
        if (estimator.known_count() < explore_target) {
            // Cold-start exploration: sample nodes this bus has never used.
            std::vector<int> unknown;
            for (int node : eligible_) {
                if (!busy.contains(node) && estimator.entry(node) == nullptr) {
                    unknown.push_back(node);
                }
            }
            if (!unknown.empty()) {
                return unknown[rng.uniform_index(unknown.size())];
            }
        }
        return client::select_node_adaptive_rtt(estimator, eligible_, busy, rng);
    }

    client::RttEstimator& estimator_for(int bus_index) {
        if (shared_estimator_) {
            return *shared_estimator_;
        }
        return bus_estimators_[static_cast<std::size_t>(bus_index)];
    }

    void schedule_plan(int node_id, net::ServicePlan plan) {
        InFlight& flight = in_flight_.at(plan.request.request_id);
        flight.tip_done_time = plan.tip_done_time;
        flight.pow_done_time = plan.pow_done_time;
        flight.network_delay = plan.network_delay;
        flight.failed = plan.failed;
        flight.bundle = std::move(plan.request.bundle);

        SimEvent ev;
        ev.fire_time = plan.tip_done_time;
        ev.kind = plan.failed ? EventKind::RequestFailed : EventKind::NodeTipSelectionDone;
        ev.bus_index = flight.bus_index;
        ev.node_id = node_id;
        ev.request_id = plan.request.request_id;
        queue_.schedule(ev);
    }

    void on_tip_selection_done(const SimEvent& event) {
        const InFlight& flight = in_flight_.at(event.request_id);
        SimEvent ev;
        ev.fire_time = flight.pow_done_time;
        ev.kind = EventKind::NodePowDone;
        ev.bus_index = event.bus_index;
        ev.node_id = event.node_id;
        ev.request_id = event.request_id;
        queue_.schedule(ev);
    }

    void on_pow_done(const SimEvent& event) {
        InFlight& flight = in_flight_.at(event.request_id);
        const double now = queue_.now();

        // The node attaches the whole bundle: data first, then the two
        // signature transactions, each approving two freshly selected tips.
        RngStream& rng = node_rng_[static_cast<std::size_t>(event.node_id)];
        const auto attach_one = [&](std::vector<std::uint8_t> payload) {
            const auto [trunk, branch] = tangle_.select_tips(rng);
            return tangle_.attach(std::move(payload), trunk, branch, now);
        };
        flight.data_tx = attach_one(flight.bundle.data_transaction_payload());
        attach_one(flight.bundle.signature_payloads[0]);
        attach_one(flight.bundle.signature_payloads[1]);
        flight.attached = true;

        deliver_outcome(event, flight.pow_done_time);
        start_next_service(event.node_id);
    }

    void on_request_failed(const SimEvent& event) {
        const InFlight& flight = in_flight_.at(event.request_id);
        deliver_outcome(event, flight.tip_done_time);
        start_next_service(event.node_id);
    }

    void deliver_outcome(const SimEvent& event, double node_exit_time) {
        const InFlight& flight = in_flight_.at(event.request_id);
        SimEvent ev;
        ev.fire_time = node_exit_time + flight.network_delay;
        ev.kind = EventKind::OutcomeDelivered;
        ev.bus_index = event.bus_index;
        ev.node_id = event.node_id;
        ev.request_id = event.request_id;
        queue_.schedule(ev);
    }

    void start_next_service(int node_id) {
        auto plan = nodes_[static_cast<std::size_t>(node_id)].finish_service(
            queue_.now(), node_rng_[static_cast<std::size_t>(node_id)],
            config_.pool.failure_load_factor);
        if (plan) {
            schedule_plan(node_id, std::move(*plan));
        }
    }

    void on_outcome_delivered(const SimEvent& event) {
        auto it = in_flight_.find(event.request_id);
        InFlight flight = std::move(it->second);
        in_flight_.erase(it);

        BusAgent& bus = buses_[static_cast<std::size_t>(flight.bus_index)];
        if (!bus.pending || *bus.pending != event.request_id) {
            throw std::logic_error("scenario: outcome for a request the bus does not own");
        }
        bus.pending.reset();
        bus.pending_node.reset();
        if (--busy_count_[flight.node_id] == 0) {
            busy_nodes_.erase(flight.node_id);
        }

        const double now = queue_.now();
        stats::TxRecord record;
        record.bus_id = bus.bus_id;
        record.node_id = flight.node_id;
        record.policy = config_.policy;
        record.submit_time = flight.generation_time;
        record.replication_index = replication_;
        record.success = !flight.failed;

        // End-to-end latency runs from the scheduled publication time; the
        // wait spent deferred behind the bus's previous request and the wait
        // in the node's queue both land in the tip-selection component, so
        // total stays the exact sum of the three parts.
        const double wait_and_tip = flight.tip_done_time - flight.generation_time;
        // The node-interaction time is what the client would clock as RTT.
        const double node_rtt = (flight.failed ? flight.tip_done_time
                                               : flight.pow_done_time) -
                                flight.launch_time + flight.network_delay;
        if (flight.failed) {
            record.total_latency = wait_and_tip + flight.network_delay;
            ++failures_;
        } else {
            const double tip = wait_and_tip;
            const double pow = flight.pow_done_time - flight.tip_done_time;
            const double net = flight.network_delay;
            record.tip_selection_latency = tip;
            record.pow_latency = pow;
            record.network_latency = net;
            record.total_latency = tip + pow + net;
            ++successes_;
            ++successes_per_node_[static_cast<std::size_t>(flight.node_id)];
            successful_data_tx_.push_back(flight.data_tx);
        }
        ++attempts_per_node_[static_cast<std::size_t>(flight.node_id)];

        if (config_.policy == SelectionPolicy::AdaptiveRtt) {
            client::RttEstimator& estimator = estimator_for(flight.bus_index);
            if (flight.failed) {
                estimator.penalize(flight.node_id, config_.estimator.failure_penalty);
            } else {
                estimator.update(flight.node_id, node_rtt);
            }
        }

        records_.push_back(std::move(record));
        bus.last_node = flight.node_id;

        if (!bus.deferred.empty() && now < config_.duration) {
            const std::size_t slot = bus.deferred.front();
            bus.deferred.pop_front();
            start_publish(bus, slot, now, /*was_deferred=*/true);
        }
    }

    RunResult finish() {
        RunResult result;
        result.policy = config_.policy;
        result.bus_count = config_.bus_count;
        result.duration = config_.duration;
        result.seed = seed_;
        result.replication_index = replication_;
        result.scheduled_publications = scheduled_publications_;
        result.records = std::move(records_);
        result.successes = successes_;
        result.failures = failures_;
        result.ledger_size = tangle_.size();
        result.milestone_count = milestone_count_;
        result.attempts_per_node = std::move(attempts_per_node_);
        result.successes_per_node = std::move(successes_per_node_);

        const std::vector<bool> cone = tangle_.confirmation_cone();
        for (TxId id : successful_data_tx_) {
            if (cone[id.value]) {
                ++result.confirmed_bundles;
            }
        }

        if (!config_.ledger_dump.empty()) {
            char suffix[32];
            std::snprintf(suffix, sizeof(suffix), "_rep%02d.csv", replication_);
            const std::string path = config_.ledger_dump + suffix;
            std::ofstream out(path, std::ios::binary);
            if (!out) {
                throw IoError("scenario: cannot open ledger dump " + path);
            }
            tangle_.dump(out);
        }
        return result;
    }

    const ScenarioConfig& config_;
    std::uint64_t seed_;
    int replication_;

    EventQueue queue_;
    Tangle tangle_;
    RngStream milestone_rng_;

    std::vector<net::FullNode> nodes_;
    std::vector<RngStream> node_rng_;
    std::vector<int> eligible_;

    std::vector<BusAgent> buses_;
    std::vector<mam::MamChannel> channels_;
    std::vector<RngStream> select_rng_;

    std::optional<client::RttEstimator> shared_estimator_;
    std::vector<client::RttEstimator> bus_estimators_;

    std::unordered_map<std::uint64_t, InFlight> in_flight_;
    std::unordered_map<int, int> busy_count_;
    std::set<int> busy_nodes_;

    std::uint64_t next_request_id_ = 1;
    std::size_t scheduled_publications_ = 0;
    std::vector<stats::TxRecord> records_;
    std::size_t successes_ = 0;
    std::size_t failures_ = 0;
    std::size_t milestone_count_ = 0;
    std::vector<std::uint64_t> attempts_per_node_;
    std::vector<std::uint64_t> successes_per_node_;
    std::vector<TxId> successful_data_tx_;
};

} // namespace

RunResult run_scenario(const ScenarioConfig& config, std::uint64_t seed,
                       int replication_index) {
    ScenarioRun run(config, seed, replication_index);
    return run.run();
}

} // namespace tanglesim
