#include "gridwise/simulation.hpp"

#include "gridwise/metrics.hpp"

#include <doctest.h>

#include <map>
#include <vector>

using namespace gridwise;

namespace {

ScenarioConfig small_scenario() {
    ScenarioConfig cfg;
    cfg.local_schedulers = {{"LS1", 8, 65, 100, 0.8}};
    cfg.job_groups = {{"G", 2, 10, 1200, 1.93, 45500, 0.5, 0.5}};
    cfg.params.warmup.depth = 25;
    return cfg;
}

} // namespace

TEST_CASE("end-to-end run: deadline honesty and queue conservation") {
    const ScenarioConfig cfg = small_scenario();
    Simulation sim(cfg, 0, 0, SchedulerPolicy::Gnm, 42);
    const RunLog log = sim.run();

    CHECK(log.tasks.size() == 10);
    CHECK(log.events_processed > 0);

    std::map<TaskId, const TaskEntry*> entries;
    for (const auto& t : log.tasks) {
        entries[t.task_id] = &t;
        CHECK(t.terminal); // every task resolves by the horizon
        if (t.final == TaskFinal::Success) {
            REQUIRE(t.finished_at_s.has_value());
            CHECK(*t.finished_at_s <= t.submit_s + t.deadline_s); // zero late successes
        }
    }

    // every allocation belongs to a task and closes
    for (const auto& a : log.allocations) {
        REQUIRE(entries.count(a.task_id));
        CHECK(a.outcome.has_value());
        if (a.outcome == TaskState::Success) {
            REQUIRE(a.finished_at_s.has_value());
            const auto* t = entries[a.task_id];
            CHECK(*a.finished_at_s <= t->submit_s + t->deadline_s);
        }
    }

    // re-iteration only after Fail
    std::map<TaskId, std::vector<const AllocationRecord*>> by_task;
    for (const auto& a : log.allocations)
        by_task[a.task_id].push_back(&a);
    for (auto& [id, rows] : by_task) {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i]->attempt_number == rows[i - 1]->attempt_number + 1);
            CHECK(rows[i - 1]->outcome == TaskState::Fail);
            CHECK(rows[i - 1]->reiterated);
        }
    }

    // conservation: every admission is accounted for by a closed allocation
    CHECK(log.admissions == static_cast<long>(log.allocations.size()));
}

TEST_CASE("announcement freshness: one announcement per admission, completion and urgent edge") {
    const ScenarioConfig cfg = small_scenario();
    Simulation sim(cfg, 0, 0, SchedulerPolicy::Gnm, 7);
    const RunLog log = sim.run();

    CHECK(log.announce_initial == 8); // one per node
    CHECK(log.announce_admission == log.admissions);
    CHECK(log.announce_completion == log.completions);
    CHECK(log.announce_urgent == log.urgent_edges);
}

TEST_CASE("replay determinism: identical seed gives identical logs, metrics and traces") {
    const ScenarioConfig cfg = small_scenario();

    // three independent replays of the same (scenario, seed)
    std::vector<std::vector<std::string>> traces(3);
    std::vector<std::string> alloc_csv(3), metric_csv(3);
    for (int i = 0; i < 3; ++i) {
        Simulation sim(cfg, 0, 0, SchedulerPolicy::Gnm, 42);
        auto& trace = traces[i];
        sim.set_sinks({[&trace](const Event& ev) { trace.push_back(event_to_ndjson(ev)); }, {}});
        const RunLog log = sim.run();
        alloc_csv[i] = metrics::allocations_csv({log});
        metric_csv[i] = metrics::metrics_csv({metrics::compute(log)});
    }
    for (int i = 1; i < 3; ++i) {
        CHECK(alloc_csv[i] == alloc_csv[0]);
        CHECK(metric_csv[i] == metric_csv[0]);
        CHECK(traces[i] == traces[0]); // byte-identical event logs
    }

    Simulation c(cfg, 0, 0, SchedulerPolicy::Gnm, 43);
    const RunLog log_c = c.run();
    CHECK(alloc_csv[0] != metrics::allocations_csv({log_c}));
}

TEST_CASE("baseline policy: no announcements, no prediction data") {
    const ScenarioConfig cfg = small_scenario();
    Simulation sim(cfg, 0, 0, SchedulerPolicy::Random, 42);
    const RunLog log = sim.run();
    CHECK(log.policy == "random");
    CHECK(log.announce_initial == 0);
    CHECK(log.announce_admission == 0);
    CHECK(!metrics::prediction_accuracy(log).has_value());
    CHECK(log.admissions > 0);
}

TEST_CASE("job cancellation on give-up aborts the siblings") {
    ScenarioConfig cfg;
    cfg.local_schedulers = {{"LS1", 3, 65, 0, 0.0}}; // every task will fail
    cfg.job_groups = {{"G", 1, 6, 1200, 1.93, 45500, 0.5, 0.5}};
    cfg.params.warmup.depth = 0; // cold start: admissions by capacity only
    cfg.params.cancel_job_on_giveup = true;
    cfg.params.bursts.mean_interval_s = 0;

    Simulation sim(cfg, 0, 0, SchedulerPolicy::Gnm, 42);
    const RunLog log = sim.run();
    const auto m = metrics::compute(log);

    CHECK(m.tasks_success == 0);
    CHECK(m.iterations.give_ups >= 1);
    CHECK(m.tasks_aborted >= 1); // consumer cancelled the rest of the job
    for (const auto& t : log.tasks)
        CHECK(t.terminal);
}

TEST_CASE("urgent changes announce out-of-band during bursts") {
    ScenarioConfig cfg = small_scenario();
    cfg.params.bursts.mean_interval_s = 900; // frequent bursts over the ~1200 s horizon
    Simulation sim(cfg, 0, 0, SchedulerPolicy::Gnm, 11);

    long urgent_seen = 0;
    SimSinks sinks;
    sinks.announcements = [&](const NodeAnnouncement& a, AnnounceCause cause) {
        if (cause == AnnounceCause::UrgentBegin) {
            CHECK(!a.accepting);
            CHECK(a.non_accept_until_s > a.issued_at_s);
            ++urgent_seen;
        }
    };
    sim.set_sinks(sinks);
    const RunLog log = sim.run();
    CHECK(log.urgent_edges > 0);
    CHECK(urgent_seen > 0);
}
