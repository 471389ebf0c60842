#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

namespace tanglesim {

enum class EventKind {
    BusPublish,
    NodeTipSelectionDone,
    NodePowDone,
    RequestFailed,
    OutcomeDelivered,
    MilestoneTick,
    ScenarioEnd,
};

struct SimEvent {
    double fire_time = 0.0;
    std::uint64_t sequence_no = 0; // assigned by the queue; breaks fire_time ties
    EventKind kind = EventKind::ScenarioEnd;
    int bus_index = -1;
    int node_id = -1;
    std::uint64_t request_id = 0;
};

/// Virtual clock of one scenario run. `horizon` bounds the workload: no new
/// publications or milestones are scheduled past it, but in-flight request
/// chains drain to completion afterwards.
struct SimClock {
    double now = 0.0;
    double horizon = 0.0;
};

/// Future event list ordered by (fire_time, sequence_no). Dispatching an
/// event advances the clock; scheduling into the past is a programming error
/// and throws.
class EventQueue {
public:
    explicit EventQueue(double horizon = 0.0) { clock_.horizon = horizon; }

    void schedule(SimEvent event);

    /// Pops the next event and advances the clock to its fire time.
    std::optional<SimEvent> pop();

    double now() const { return clock_.now; }
    double horizon() const { return clock_.horizon; }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const {
            if (a.fire_time != b.fire_time) {
                return a.fire_time > b.fire_time;
            }
            return a.sequence_no > b.sequence_no;
        }
    };

    SimClock clock_;
    std::uint64_t next_sequence_ = 0;
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
};

} // namespace tanglesim
