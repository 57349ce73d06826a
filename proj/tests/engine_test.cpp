#include "gridwise/engine.hpp"

#include <doctest.h>

#include <string>
#include <vector>

using namespace gridwise;

namespace {

Event make_start(NodeId node) {
    return Event{0, 0, EventKind::TaskStart, TaskStartPayload{node}};
}

} // namespace

TEST_CASE("schedule and run_until process in (time, sequence) order") {
    Engine eng;
    std::vector<std::pair<SimTime, NodeId>> seen;
    eng.set_handler([&](const Event& ev) {
        seen.emplace_back(ev.fire_at_s, std::get<TaskStartPayload>(ev.payload).node);
    });

    eng.schedule(5, EventKind::TaskStart, TaskStartPayload{1});
    CHECK(eng.pending() == 1);
    eng.schedule(5, EventKind::TaskStart, TaskStartPayload{2}); // FIFO among ties
    eng.schedule(2, EventKind::TaskStart, TaskStartPayload{3});

    CHECK(eng.run_until(5) == 3);
    CHECK(eng.now() == 5);
    REQUIRE(seen.size() == 3);
    CHECK(seen[0] == std::pair<SimTime, NodeId>{2, 3});
    CHECK(seen[1] == std::pair<SimTime, NodeId>{5, 1});
    CHECK(seen[2] == std::pair<SimTime, NodeId>{5, 2});
}

TEST_CASE("scheduling into the past fails fast") {
    Engine eng;
    eng.set_handler([](const Event&) {});
    eng.schedule(1, EventKind::TaskStart, TaskStartPayload{0});
    eng.run_until(3);
    CHECK_THROWS_AS(eng.schedule(2.5, EventKind::TaskStart, TaskStartPayload{0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(eng.schedule(-1, EventKind::TaskStart, TaskStartPayload{0}),
                    std::invalid_argument);
}

TEST_CASE("empty queue run advances the clock and processes nothing") {
    Engine eng;
    CHECK(eng.run_until(100) == 0);
    CHECK(eng.now() == 100);
}

TEST_CASE("run_until(t) stops at t; later events stay queued") {
    Engine eng;
    int fired = 0;
    eng.set_handler([&](const Event&) { ++fired; });
    eng.schedule(1, EventKind::TaskStart, TaskStartPayload{0});
    eng.schedule(2, EventKind::TaskStart, TaskStartPayload{0});
    eng.schedule(3, EventKind::TaskStart, TaskStartPayload{0});
    CHECK(eng.run_until(2) == 2);
    CHECK(fired == 2);
    CHECK(eng.pending() == 1);
}

TEST_CASE("handler failure aborts the run identifying the event") {
    Engine eng;
    eng.set_handler([](const Event&) { throw std::runtime_error("boom"); });
    eng.schedule(4, EventKind::AnnounceTick, AnnounceTickPayload{7});
    try {
        eng.run_until(10);
        FAIL("expected EngineError");
    } catch (const EngineError& e) {
        const std::string what = e.what();
        CHECK(what.find("t=4") != std::string::npos);
        CHECK(what.find("AnnounceTick") != std::string::npos);
        CHECK(what.find("boom") != std::string::npos);
    }
}

TEST_CASE("clock never decreases and events within a handler honor the order") {
    Engine eng;
    std::vector<SimTime> times;
    eng.set_handler([&](const Event& ev) {
        times.push_back(eng.now());
        if (times.size() == 1)
            eng.schedule(eng.now(), EventKind::TaskStart, TaskStartPayload{9}); // same time, later seq
        (void)ev;
    });
    eng.schedule(1, EventKind::TaskStart, TaskStartPayload{0});
    eng.schedule(2, EventKind::TaskStart, TaskStartPayload{0});
    eng.run_until(5);
    REQUIRE(times.size() == 3);
    CHECK(times[0] == 1);
    CHECK(times[1] == 1); // the same-time event runs before t=2
    CHECK(times[2] == 2);
}

TEST_CASE("identical (seed, stream) reproduces identical draws; streams differ") {
    RngStream a(42, "node/1");
    RngStream b(42, "node/1");
    RngStream c(42, "node/2");
    bool any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        if (x != c.next_u64())
            any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("uniform stays in [0,1); exponential and triangular behave") {
    RngStream rng(11, "dist");
    double sum = 0;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.05));

    double esum = 0;
    for (int i = 0; i < 10000; ++i)
        esum += rng.exponential(460.0);
    CHECK(esum / 10000 == doctest::Approx(460.0).epsilon(0.05));

    for (int i = 0; i < 1000; ++i) {
        const double t = rng.triangular(0.62, 0.72, 0.82);
        CHECK(t >= 0.62);
        CHECK(t <= 0.82);
    }
}

TEST_CASE("execution_time: table arithmetic") {
    Task t;
    t.task_id = 1;
    t.length_mi = 45500;
    t.memory_mb = 1.93;
    t.deadline_s = 1200;

    NodeSpec slow;
    slow.grid_mips = 65;
    NodeSpec fast;
    fast.grid_mips = 140;

    CHECK(execution_time(t, slow) == doctest::Approx(700.0));
    CHECK(execution_time(t, fast) == doctest::Approx(325.0));

    Task zero = t;
    zero.length_mi = 0;
    CHECK_THROWS_AS(execution_time(zero, slow), std::invalid_argument);
}

TEST_CASE("sample_task_outcome follows the node dependability") {
    NodeSpec sure;
    sure.dependability = 1.0;
    NodeSpec doomed;
    doomed.dependability = 0.0;
    NodeSpec medium;
    medium.dependability = 0.72;

    RngStream rng(5, "outcomes");
    for (int i = 0; i < 200; ++i) {
        CHECK(sample_task_outcome(sure, rng) == TaskOutcome::WillSucceed);
        CHECK(sample_task_outcome(doomed, rng) == TaskOutcome::WillFail);
    }

    int fails = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        if (sample_task_outcome(medium, rng) == TaskOutcome::WillFail)
            ++fails;
    const double frac = static_cast<double>(fails) / draws;
    CHECK(frac == doctest::Approx(0.28).epsilon(0.072)); // 0.28 +- 0.02
}

TEST_CASE("event payload round-trips through the variant") {
    const Event ev = make_start(3);
    CHECK(std::get<TaskStartPayload>(ev.payload).node == 3);
}
