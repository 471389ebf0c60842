#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tanglesim/event_queue.hpp"
#include "tanglesim/rng.hpp"

using namespace tanglesim;

namespace {

SimEvent at(double t, int bus = -1) {
    SimEvent ev;
    ev.fire_time = t;
    ev.kind = EventKind::BusPublish;
    ev.bus_index = bus;
    return ev;
}

} // namespace

TEST_CASE("events dispatch in fire-time order") {
    EventQueue q(10.0);
    q.schedule(at(5.0));
    q.schedule(at(3.0));
    CHECK(q.pop()->fire_time == 3.0);
    CHECK(q.pop()->fire_time == 5.0);
    CHECK_FALSE(q.pop().has_value());
}

TEST_CASE("simultaneous events dispatch in insertion order") {
    EventQueue q(10.0);
    q.schedule(at(7.0, 1)); // A
    q.schedule(at(7.0, 2)); // B
    q.schedule(at(7.0, 3)); // C
    CHECK(q.pop()->bus_index == 1);
    CHECK(q.pop()->bus_index == 2);
    CHECK(q.pop()->bus_index == 3);
}

TEST_CASE("scheduling into the past is a programming error") {
    EventQueue q(10.0);
    q.schedule(at(4.0));
    CHECK(q.pop().has_value());
    CHECK(q.now() == 4.0);
    CHECK_THROWS_AS(q.schedule(at(2.0)), std::logic_error);
}

TEST_CASE("clock never regresses while draining") {
    EventQueue q(100.0);
    RngStream rng(3, "t");
    double t = 0.0;
    for (int i = 0; i < 100; ++i) {
        t += rng.uniform01();
        q.schedule(at(t));
    }
    double last = 0.0;
    while (auto ev = q.pop()) {
        CHECK(q.now() >= last);
        last = q.now();
    }
}

TEST_CASE("scheduling at the current instant is allowed") {
    EventQueue q(10.0);
    q.schedule(at(4.0));
    q.pop();
    q.schedule(at(4.0));
    CHECK(q.pop()->fire_time == 4.0);
}
