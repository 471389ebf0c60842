#include "tanglesim/event_queue.hpp"

#include <stdexcept>
#include <string>

namespace tanglesim {

void EventQueue::schedule(SimEvent event) {
    if (event.fire_time < clock_.now) {
        throw std::logic_error("EventQueue::schedule: fire_time " +
                               std::to_string(event.fire_time) +
                               " is before current clock " +
                               std::to_string(clock_.now));
    }
    event.sequence_no = next_sequence_++;
    heap_.push(event);
}

std::optional<SimEvent> EventQueue::pop() {
    if (heap_.empty()) {
        return std::nullopt;
    }
    SimEvent ev = heap_.top();
    heap_.pop();
    clock_.now = ev.fire_time;
    return ev;
}

} // namespace tanglesim
