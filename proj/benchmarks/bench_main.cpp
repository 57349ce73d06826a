#include "gridwise/cbr.hpp"
#include "gridwise/config.hpp"
#include "gridwise/engine.hpp"
#include "gridwise/roughset.hpp"
#include "gridwise/simulation.hpp"

#include <benchmark/benchmark.h>

using namespace gridwise;

namespace {

TaskRecord synth_record(RngStream& rng, long id) {
    TaskRecord r;
    r.task_id = id;
    r.cpu_load_at_submit = rng.uniform();
    r.free_ram_at_submit_mb = rng.uniform(16, 512);
    r.task_size_mi = rng.uniform(1000, 90000);
    r.priority = static_cast<Priority>(rng.uniform_int(3));
    r.waiting_grid_tasks = static_cast<int>(rng.uniform_int(12));
    r.dtr_at_submit = rng.uniform(0.2, 3.0);
    if (rng.uniform() < 0.7) {
        r.final_state = TaskState::Success;
        r.spent_time_s = rng.uniform(10, 1500);
        r.completion_time_s = *r.spent_time_s + rng.uniform(0, 800);
        r.cost_price = rng.uniform(0.5, 300);
    } else {
        r.final_state = TaskState::Fail;
        r.spent_time_s = rng.uniform(1, 900);
    }
    return r;
}

std::vector<TaskRecord> synth_records(int n) {
    RngStream rng(1, "bench/records");
    std::vector<TaskRecord> recs;
    recs.reserve(n);
    for (int i = 0; i < n; ++i)
        recs.push_back(synth_record(rng, i));
    return recs;
}

void BM_rule_model(benchmark::State& state) {
    const auto recs = synth_records(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(rs::build_rule_model(recs, 3, rs::BinMethod::EqualFrequency, 0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_rule_model)->Arg(25)->Arg(50)->Arg(100)->Arg(200);

void BM_cbr_predict(benchmark::State& state) {
    const auto recs = synth_records(static_cast<int>(state.range(0)));
    cbr::CaseBase base(0);
    for (const auto& r : recs)
        base.retain(r);
    const auto model = rs::build_rule_model(recs, 3, rs::BinMethod::EqualFrequency, 0);
    base.recode(model.disc);

    cbr::QueryCase q;
    q.size_mi = 45500;
    q.deadline_s = 1200;
    q.cpu_load = 0.3;
    q.free_ram_mb = 128;
    q.waiting = 2;
    q.dtr = 1.0;

    for (auto _ : state) {
        const auto ret = cbr::retrieve(base, model, rs::DecisionAttr::FinalStatus, q);
        benchmark::DoNotOptimize(cbr::predict(base, ret.case_indices, q, 5));
    }
}
BENCHMARK(BM_cbr_predict)->Arg(50)->Arg(200);

void BM_event_queue(benchmark::State& state) {
    for (auto _ : state) {
        Engine eng;
        eng.set_handler([](const Event&) {});
        RngStream rng(2, "bench/events");
        for (int i = 0; i < 10000; ++i)
            eng.schedule(rng.uniform(0, 1e6), EventKind::TaskStart, TaskStartPayload{0});
        benchmark::DoNotOptimize(eng.run_until(1e6));
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_event_queue);

void BM_desk_replication(benchmark::State& state) {
    const ScenarioConfig cfg = scaled(reference_scenario(), 0.1);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        Simulation sim(cfg, 0, 2, SchedulerPolicy::Gnm, seed++); // LS1 x Job_Group3
        benchmark::DoNotOptimize(sim.run());
    }
}
BENCHMARK(BM_desk_replication)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
