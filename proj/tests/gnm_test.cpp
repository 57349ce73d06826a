#include "gridwise/gnm.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace gridwise;

namespace {

NodeSpec test_spec(double gmips = 65, double dependability = 1.0) {
    NodeSpec s;
    s.node_id = 0;
    s.local_scheduler_id = "T";
    s.grid_mips = gmips;
    s.total_ram_mb = 256;
    s.dtr_base = 1000; // transfers take microseconds unless a test lowers it
    s.dependability = dependability;
    s.standard_price_alpha = 10;
    s.price_tolerance_p = 0.2;
    return s;
}

Task test_task(TaskId id, double length_mi = 45500, Duration deadline = 1200,
               double memory = 1.93) {
    Task t;
    t.task_id = id;
    t.job_id = 1;
    t.length_mi = length_mi;
    t.memory_mb = memory;
    t.deadline_s = deadline;
    t.size_units = memory;
    return t;
}

TaskRecord nominal_record(TaskId id, double size_mi, TaskState state, double completion = 0) {
    TaskRecord r;
    r.task_id = id;
    r.cpu_load_at_submit = 0.2;
    r.free_ram_at_submit_mb = 200;
    r.task_size_mi = size_mi;
    r.priority = Priority::Normal;
    r.waiting_grid_tasks = 0;
    r.dtr_at_submit = 1000;
    r.final_state = state;
    if (state == TaskState::Success) {
        r.spent_time_s = completion;
        r.completion_time_s = completion;
        r.cost_price = 1.0;
    } else if (state == TaskState::Fail) {
        r.spent_time_s = 1.0;
    }
    return r;
}

} // namespace

TEST_CASE("success ratio: aborted tasks are neutral") {
    cbr::CaseBase records(0);
    for (int i = 0; i < 3; ++i)
        records.retain(nominal_record(i, 1000, TaskState::Success, 100));
    records.retain(nominal_record(3, 1000, TaskState::Fail));
    records.retain(nominal_record(4, 1000, TaskState::Aborted));
    records.retain(nominal_record(5, 1000, TaskState::Aborted));
    CHECK(compute_success_ratio(records) == doctest::Approx(0.75)); // 3 / (3 + 1)

    cbr::CaseBase empty(0);
    CHECK(compute_success_ratio(empty) == 1.0); // optimistic empty-denominator convention
    CHECK(compute_success_ratio(empty, false) == 0.0);

    cbr::CaseBase grim(0);
    for (int i = 0; i < 4; ++i)
        grim.retain(nominal_record(i, 1000, TaskState::Fail));
    CHECK(compute_success_ratio(grim) == 0.0);
}

TEST_CASE("ACT: mean completion over successes, no-data flag otherwise") {
    cbr::CaseBase records(0);
    records.retain(nominal_record(1, 1000, TaskState::Success, 700));
    records.retain(nominal_record(2, 1000, TaskState::Success, 325));
    records.retain(nominal_record(3, 1000, TaskState::Success, 475));
    records.retain(nominal_record(4, 1000, TaskState::Fail));
    const auto act = compute_act(records);
    CHECK(act.has_data);
    CHECK(act.act_s == doctest::Approx(500.0));

    cbr::CaseBase empty(0);
    const auto none = compute_act(empty);
    CHECK(!none.has_data);
    CHECK(none.act_s == 0.0);
}

TEST_CASE("ACT and ratio match the two-pass oracle on 10k random records") {
    RngStream rng(123, "stats-10k");
    cbr::CaseBase records(0);
    std::vector<TaskRecord> raw;
    for (int i = 0; i < 10000; ++i) {
        raw.push_back(oracles::random_record(rng, i));
        records.retain(raw.back());
    }
    const auto oracle = oracles::two_pass_stats(raw);
    CHECK(std::fabs(compute_success_ratio(records) - oracle.success_ratio) <=
          1e-9 * oracle.success_ratio);
    const auto act = compute_act(records);
    CHECK(act.has_data == oracle.act_has_data);
    CHECK(std::fabs(act.act_s - oracle.act) <= 1e-9 * oracle.act);
}

TEST_CASE("admission: capacity arithmetic from the tables") {
    GnmParams params;

    SUBCASE("empty queue, 45500 MI on 65 MIPS, 1200 s deadline: accepted") {
        GnmNode node(test_spec(), params, 1);
        const auto d = node.evaluate_task(test_task(1), 1200, 0);
        CHECK(d.admitted);
        CHECK(d.predicted_finish_s == doctest::Approx(700.0).epsilon(0.01));
    }

    SUBCASE("600 s of queued work pushes the finish past the deadline") {
        GnmNode node(test_spec(), params, 1);
        node.set_initial_backlog(600);
        const auto d = node.evaluate_task(test_task(1), 1200, 0);
        CHECK(!d.admitted);
        CHECK(d.reason == RejectReason::DeadlineInfeasible);
    }

    SUBCASE("not accepting rejects regardless of capacity") {
        GnmNode node(test_spec(), params, 1);
        node.set_initial_backlog(100000);
        Task big = test_task(1);
        big.memory_mb = 1e6; // would also fail the memory check
        const auto d = node.evaluate_task(big, 1e9, 0);
        CHECK(!d.admitted);
        CHECK(d.reason == RejectReason::NotAccepting);
    }

    SUBCASE("insufficient memory") {
        GnmNode node(test_spec(), params, 1);
        Task big = test_task(1, 100, 1e6);
        big.memory_mb = 1e6;
        const auto d = node.evaluate_task(big, 1e6, 0);
        CHECK(!d.admitted);
        CHECK(d.reason == RejectReason::InsufficientMemory);
    }
}

TEST_CASE("admission: a confident Fail prediction rejects") {
    GnmParams params;
    GnmNode node(test_spec(65, 0.5), params, 1);
    // history: tasks that look exactly like the incoming one always failed
    for (int i = 0; i < 30; ++i) {
        TaskRecord r = nominal_record(i, 45500, TaskState::Fail);
        node.preload_record(r, 1200);
    }
    REQUIRE(node.maybe_run_rsa(0));
    REQUIRE(node.model().has_value());

    Task t = test_task(1);
    const auto d = node.evaluate_task(t, 1200, 0);
    CHECK(!d.admitted);
    CHECK(d.reason == RejectReason::PredictedFail);
    REQUIRE(d.prediction.has_value());
    CHECK(d.prediction->predicted_state == TaskState::Fail);
    CHECK(d.prediction->confidence >= params.predicted_fail_threshold);
}

TEST_CASE("announce: idle node accepts with horizon now") {
    GnmNode node(test_spec(), GnmParams{}, 1);
    const auto a = node.announce(5.0);
    CHECK(a.accepting);
    CHECK(a.non_accept_until_s == 5.0);
    CHECK(a.issued_at_s == 5.0);
    CHECK(a.success_ratio == 1.0);
    CHECK(!a.act_has_data);
}

TEST_CASE("announce: 7200 s of queued work pushes the horizon about two hours out") {
    GnmNode node(test_spec(100), GnmParams{}, 1);
    // nominal probe from history: 1000 MI (10 s exec) with 70 s deadline -> 60 s slack
    for (int i = 0; i < 9; ++i)
        node.preload_record(nominal_record(i, 1000, TaskState::Success, 10), 70);
    node.set_initial_backlog(7200);

    const auto a = node.announce(0.0);
    CHECK(!a.accepting);
    CHECK(a.non_accept_until_s == doctest::Approx(7200.0).epsilon(0.01));
    CHECK(a.non_accept_until_s > a.issued_at_s); // invariant when not accepting
}

TEST_CASE("announcement price sits inside the band across random node states") {
    RngStream rng(9, "price-states");
    for (int i = 0; i < 500; ++i) {
        NodeSpec spec = test_spec();
        spec.standard_price_alpha = rng.uniform(1e-3, 100.0);
        spec.price_tolerance_p = rng.uniform(0.0, 0.5);
        GnmNode node(spec, GnmParams{}, i);
        const int preload = static_cast<int>(rng.uniform_int(20));
        for (int r = 0; r < preload; ++r)
            node.preload_record(nominal_record(r, 1000,
                                               rng.uniform() < 0.5 ? TaskState::Success
                                                                   : TaskState::Fail,
                                               100),
                                500);
        const auto a = node.announce(0.0);
        if (spec.price_tolerance_p < 1e-9) {
            CHECK(a.offered_price == spec.standard_price_alpha);
        } else {
            CHECK(a.offered_price > spec.standard_price_alpha * (1 - spec.price_tolerance_p));
            CHECK(a.offered_price < spec.standard_price_alpha * (1 + spec.price_tolerance_p));
        }
    }
}

TEST_CASE("price adjusting: neutral midpoint, saturated pressure, degenerate p") {
    GnmParams params;

    SUBCASE("empty queue and success ratio one half price exactly alpha") {
        GnmNode node(test_spec(), params, 1);
        node.preload_record(nominal_record(1, 1000, TaskState::Success, 100), 500);
        node.preload_record(nominal_record(2, 1000, TaskState::Fail), 500);
        CHECK(node.streaming_success_ratio() == doctest::Approx(0.5));
        CHECK(node.adjust_price(0) == doctest::Approx(10.0));
    }

    SUBCASE("full queue and a perfect record push the price just under the cap") {
        GnmNode node(test_spec(1000), params, 1);
        for (int i = 0; i < 5; ++i)
            node.preload_record(nominal_record(i, 1000, TaskState::Success, 100), 1e9);
        for (int i = 0; i < 10; ++i) { // queue_ref_len tasks waiting
            const auto d = node.admit_task(test_task(100 + i, 1000, 1e9, 0.5), 1e9, 0);
            REQUIRE(d.admitted);
        }
        const double price = node.adjust_price(0);
        CHECK(price < 12.0);
        CHECK(price == doctest::Approx(12.0).epsilon(1e-6));
    }

    SUBCASE("p = 0 always prices at alpha") {
        NodeSpec spec = test_spec();
        spec.price_tolerance_p = 0;
        GnmNode node(spec, params, 1);
        CHECK(node.adjust_price(0) == 10.0);
    }
}

TEST_CASE("urgent change: non-acceptance through the burst, recomputed after") {
    GnmNode node(test_spec(), GnmParams{}, 1);

    node.begin_local_burst(100, 400);
    const auto during = node.announce(100);
    CHECK(!during.accepting);
    CHECK(during.non_accept_until_s >= 400);
    CHECK(node.cpu_load(100) >= 0.95);

    node.end_local_burst(400);
    const auto after = node.announce(400);
    CHECK(after.accepting); // empty queue, back to normal

    SUBCASE("a burst while already bursting max-merges the horizon") {
        node.begin_local_burst(500, 900);
        node.begin_local_burst(600, 800); // shorter: horizon unchanged
        CHECK(node.local_load_until_s() == 900);
        node.begin_local_burst(700, 1200);
        CHECK(node.local_load_until_s() == 1200);
    }
}

TEST_CASE("a running task slides through a burst at the reduced rate") {
    // 100 MIPS, 1000 MI task: 10 s nominal; a half-rate burst over [2, 6]
    // contributes 4 s at 50 MIPS, so the finish moves from 10 to 12
    GnmParams params;
    params.burst_slowdown = 0.5;
    GnmNode node(test_spec(100), params, 1);
    const auto d = node.admit_task(test_task(1, 1000, 1e9, 1.0), 1e9, 0);
    REQUIRE(d.admitted);

    const auto started = node.try_start_next(d.transfer_s);
    REQUIRE(started.status == StartResult::Status::Started);
    CHECK(!started.will_fail);
    CHECK(started.at == doctest::Approx(d.transfer_s + 10.0));

    node.begin_local_burst(2, 6);
    const auto m = node.current_milestone(2);
    REQUIRE(m.has_value());
    CHECK(m->token != started.token); // the old milestone is stale
    CHECK(m->at == doctest::Approx(d.transfer_s + 12.0));

    const auto stale = node.on_finish_milestone(started.token, started.at);
    CHECK(!stale.has_value());
    const auto done = node.on_finish_milestone(m->token, m->at);
    REQUIRE(done.has_value());
    CHECK(done->record.final_state == TaskState::Success);
}

TEST_CASE("complete_task: record schema per outcome") {
    GnmParams params;

    SUBCASE("success fills spent, completion and cost") {
        GnmNode node(test_spec(65), params, 1);
        const auto d = node.admit_task(test_task(1), 1200, 0);
        REQUIRE(d.admitted);
        const auto started = node.try_start_next(d.transfer_s);
        REQUIRE(started.status == StartResult::Status::Started);
        const auto info = node.on_finish_milestone(started.token, started.at);
        REQUIRE(info.has_value());
        const auto& rec = info->record;
        CHECK(rec.final_state == TaskState::Success);
        REQUIRE(rec.completion_time_s.has_value());
        CHECK(*rec.completion_time_s == doctest::Approx(700.0).epsilon(0.01));
        REQUIRE(rec.spent_time_s.has_value());
        CHECK(*rec.spent_time_s == doctest::Approx(700.0));
        CHECK(*rec.spent_time_s <= *rec.completion_time_s);
        REQUIRE(rec.cost_price.has_value());
        CHECK(*rec.cost_price == doctest::Approx(d.offered_price * *rec.spent_time_s / 60.0));
    }

    SUBCASE("failure carries no completion time") {
        GnmNode node(test_spec(65, 0.0), params, 1); // always fails
        const auto d = node.admit_task(test_task(1), 1200, 0);
        REQUIRE(d.admitted);
        const auto started = node.try_start_next(d.transfer_s);
        REQUIRE(started.status == StartResult::Status::Started);
        CHECK(started.will_fail);
        const auto info = node.on_fail_milestone(started.token, started.at);
        REQUIRE(info.has_value());
        CHECK(info->record.final_state == TaskState::Fail);
        CHECK(!info->record.completion_time_s.has_value());
        CHECK(info->record.spent_time_s.has_value());
    }

    SUBCASE("aborting a waiting task excludes it from the ratio denominator") {
        GnmNode node(test_spec(65), params, 1);
        node.preload_record(nominal_record(50, 1000, TaskState::Success, 100), 500);
        const double ratio_before = node.streaming_success_ratio();
        const auto d = node.admit_task(test_task(7), 1e6, 0);
        REQUIRE(d.admitted);
        const auto info = node.complete_task(7, TaskState::Aborted, 1.0);
        CHECK(info.record.final_state == TaskState::Aborted);
        CHECK(node.streaming_success_ratio() == ratio_before);
        CHECK(node.waiting_count() == 0);
    }

    SUBCASE("unknown task id is a contract violation") {
        GnmNode node(test_spec(), params, 1);
        CHECK_THROWS_AS(node.complete_task(404, TaskState::Success, 0), std::logic_error);
    }
}

TEST_CASE("queue conservation: admitted = terminal + still queued") {
    GnmParams params;
    GnmNode node(test_spec(1000, 1.0), params, 1);
    long admitted = 0, terminal = 0;

    for (int i = 0; i < 6; ++i) {
        const auto d = node.admit_task(test_task(i, 2000, 1e9, 1.0), 1e9, 0);
        REQUIRE(d.admitted);
        ++admitted;
    }
    // run two to completion
    for (int i = 0; i < 2; ++i) {
        const auto started = node.try_start_next(1.0 + i * 10);
        REQUIRE(started.status == StartResult::Status::Started);
        const auto info = node.on_finish_milestone(started.token, started.at);
        REQUIRE(info.has_value());
        ++terminal;
    }
    // abort one waiting task
    REQUIRE(node.abort_task(4, 30.0).has_value());
    ++terminal;

    const long in_system = node.waiting_count() + (node.running() ? 1 : 0);
    CHECK(admitted - terminal == in_system);

    // streaming counters stay consistent with a full recomputation
    CHECK(std::fabs(node.streaming_success_ratio() - compute_success_ratio(node.records())) <= 1e-9);
}

TEST_CASE("memory accounting follows queue occupancy") {
    GnmParams params;
    GnmNode node(test_spec(1000), params, 1);
    const double before = node.free_ram_mb();
    const auto d = node.admit_task(test_task(1, 1000, 1e9, 10.0), 1e9, 0);
    REQUIRE(d.admitted);
    CHECK(node.free_ram_mb() == doctest::Approx(before - 10.0));
    node.complete_task(1, TaskState::Aborted, 1.0);
    CHECK(node.free_ram_mb() == doctest::Approx(before));
    CHECK(node.free_ram_mb() <= node.spec().total_ram_mb);
}
