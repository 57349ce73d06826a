#include "gridwise/simulation.hpp"

#include "gridwise/workload.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace gridwise {

const char* to_string(SchedulerPolicy p) {
    return p == SchedulerPolicy::Gnm ? "gnm" : "random";
}

Simulation::Simulation(const ScenarioConfig& cfg, std::size_t ls_index, std::size_t group_index,
                       SchedulerPolicy policy, std::uint64_t seed)
    : cfg_(cfg), policy_(policy), seed_(seed) {
    if (ls_index >= cfg.local_schedulers.size())
        throw std::invalid_argument("simulation: local scheduler index out of range");
    if (group_index >= cfg.job_groups.size())
        throw std::invalid_argument("simulation: job group index out of range");
    ls_spec_ = cfg.local_schedulers[ls_index];
    group_spec_ = cfg.job_groups[group_index];
    log_.group = group_spec_.name;
    log_.ls_id = ls_spec_.ls_id;
    log_.policy = to_string(policy_);
    log_.seed = seed_;
    horizon_ = cfg_.params.submit_at_s + group_spec_.deadline_s + cfg_.params.horizon_margin_s;
}

void Simulation::build_population() {
    GnmParams gp = cfg_.params.gnm;
    gp.knowledge_enabled = policy_ == SchedulerPolicy::Gnm;

    auto specs = workload::build_nodes(ls_spec_, cfg_.params.build, seed_, 0);
    nodes_.reserve(specs.size());
    std::vector<NodeId> members;
    members.reserve(specs.size());
    for (auto& spec : specs) {
        members.push_back(spec.node_id);
        GnmNode node(spec, gp, seed_);
        const auto setup = workload::draw_runtime_setup(spec, ls_spec_, cfg_.params.build, seed_);
        node.set_local_profile(setup.local_cpu_load, setup.local_ram_used_mb);
        node.set_initial_backlog(setup.backlog_s);
        nodes_.push_back(std::move(node));
    }
    if (policy_ == SchedulerPolicy::Gnm)
        workload::warmup_history(nodes_, cfg_.params.warmup, seed_);

    for (auto& node : nodes_) {
        // legacy backlog milestone
        if (auto m = node.current_milestone(0))
            engine_.schedule(m->at, EventKind::TaskFinish, TaskFinishPayload{node.id(), m->token});
        // local load bursts
        for (const auto& w :
             workload::local_load_trace(node.id(), cfg_.params.bursts, horizon_, seed_)) {
            engine_.schedule(w.start_s, EventKind::LocalLoadChange,
                             LocalLoadChangePayload{node.id(), true, w.end_s});
            engine_.schedule(w.end_s, EventKind::LocalLoadChange,
                             LocalLoadChangePayload{node.id(), false, w.end_s});
        }
        if (policy_ == SchedulerPolicy::Gnm) {
            announce_node(node.id(), AnnounceCause::Initial);
            if (cfg_.params.announce_period_s > 0 &&
                cfg_.params.announce_period_s <= horizon_)
                engine_.schedule(cfg_.params.announce_period_s, EventKind::AnnounceTick,
                                 AnnounceTickPayload{node.id()});
            if (cfg_.params.rsa_tick_period_s > 0 && cfg_.params.rsa_tick_period_s <= horizon_)
                engine_.schedule(cfg_.params.rsa_tick_period_s, EventKind::RsaTick,
                                 RsaTickPayload{node.id()});
        }
    }

    ls_ = std::make_unique<LocalScheduler>(ls_spec_.ls_id, members, policy_, seed_);
    meta_.register_scheduler(ls_.get());
}

RunLog Simulation::run() {
    build_population();
    if (sinks_.trace)
        engine_.set_trace_sink(sinks_.trace);
    engine_.set_handler([this](const Event& ev) { handle(ev); });

    meta_.submit_job_group(engine_, group_spec_, ls_spec_.ls_id, cfg_.params.submit_at_s);
    log_.events_processed = engine_.run_until(horizon_);
    finalize();
    return log_;
}

void Simulation::handle(const Event& ev) {
    switch (ev.kind) {
    case EventKind::JobSubmitted:
        handle_job_submitted(std::get<JobSubmittedPayload>(ev.payload));
        break;
    case EventKind::TaskArrival: {
        const auto& p = std::get<TaskArrivalPayload>(ev.payload);
        try_start(p.node);
        break;
    }
    case EventKind::TaskStart: {
        const auto& p = std::get<TaskStartPayload>(ev.payload);
        try_start(p.node);
        break;
    }
    case EventKind::TaskFinish: {
        const auto& p = std::get<TaskFinishPayload>(ev.payload);
        auto info = nodes_[p.node].on_finish_milestone(p.token, engine_.now());
        if (!info)
            break; // stale milestone
        if (info->legacy)
            try_start(p.node);
        else
            handle_completion(p.node, *info);
        break;
    }
    case EventKind::TaskFail: {
        const auto& p = std::get<TaskFailPayload>(ev.payload);
        auto info = nodes_[p.node].on_fail_milestone(p.token, engine_.now());
        if (!info)
            break;
        handle_completion(p.node, *info);
        break;
    }
    case EventKind::LocalLoadChange: {
        const auto& p = std::get<LocalLoadChangePayload>(ev.payload);
        if (p.begin)
            nodes_[p.node].begin_local_burst(engine_.now(), p.until_s);
        else
            nodes_[p.node].end_local_burst(engine_.now());
        reschedule_milestone(p.node);
        ++log_.urgent_edges;
        if (policy_ == SchedulerPolicy::Gnm)
            engine_.schedule(engine_.now(), EventKind::UrgentChange, UrgentChangePayload{p.node});
        break;
    }
    case EventKind::AnnounceTick: {
        const auto& p = std::get<AnnounceTickPayload>(ev.payload);
        announce_node(p.node, AnnounceCause::Tick);
        const SimTime next = engine_.now() + cfg_.params.announce_period_s;
        if (next <= horizon_)
            engine_.schedule(next, EventKind::AnnounceTick, AnnounceTickPayload{p.node});
        break;
    }
    case EventKind::RsaTick: {
        const auto& p = std::get<RsaTickPayload>(ev.payload);
        nodes_[p.node].maybe_run_rsa(engine_.now());
        const SimTime next = engine_.now() + cfg_.params.rsa_tick_period_s;
        if (next <= horizon_)
            engine_.schedule(next, EventKind::RsaTick, RsaTickPayload{p.node});
        break;
    }
    case EventKind::UrgentChange: {
        const auto& p = std::get<UrgentChangePayload>(ev.payload);
        const auto cause = nodes_[p.node].burst_active(engine_.now()) ? AnnounceCause::UrgentBegin
                                                                      : AnnounceCause::UrgentEnd;
        announce_node(p.node, cause);
        break;
    }
    }
}

void Simulation::handle_job_submitted(const JobSubmittedPayload& p) {
    const SimTime now = engine_.now();
    sweep_scheduled_ = false;
    for (JobId id : p.jobs)
        ls_->submit_job(meta_.job(id), now, log_);
    ls_->expire_overdue(now, log_);
    auto actions = ls_->dispatch_round(std::span<GnmNode>(nodes_), now, log_);
    for (const auto& action : actions)
        execute_dispatch(action);
    if (ls_->has_pending())
        schedule_sweep();
}

void Simulation::schedule_sweep() {
    if (sweep_scheduled_)
        return;
    const SimTime next = engine_.now() + cfg_.params.round_period_s;
    if (next > horizon_)
        return;
    engine_.schedule(next, EventKind::JobSubmitted, JobSubmittedPayload{ls_spec_.ls_id, {}});
    sweep_scheduled_ = true;
}

void Simulation::execute_dispatch(const DispatchAction& action) {
    engine_.schedule(engine_.now() + action.transfer_s, EventKind::TaskArrival,
                     TaskArrivalPayload{action.node, action.task});
    if (policy_ == SchedulerPolicy::Gnm)
        announce_node(action.node, AnnounceCause::Admission);
}

void Simulation::try_start(NodeId node) {
    const auto res = nodes_[node].try_start_next(engine_.now());
    if (res.status == StartResult::Status::Started) {
        if (res.will_fail)
            engine_.schedule(res.at, EventKind::TaskFail, TaskFailPayload{node, res.token});
        else
            engine_.schedule(res.at, EventKind::TaskFinish, TaskFinishPayload{node, res.token});
    }
    // NotReady needs no action: the head task's own arrival event triggers it
}

void Simulation::reschedule_milestone(NodeId node) {
    if (auto m = nodes_[node].current_milestone(engine_.now())) {
        if (m->is_failure)
            engine_.schedule(m->at, EventKind::TaskFail, TaskFailPayload{node, m->token});
        else
            engine_.schedule(m->at, EventKind::TaskFinish, TaskFinishPayload{node, m->token});
    }
}

void Simulation::announce_node(NodeId node, AnnounceCause cause) {
    if (policy_ != SchedulerPolicy::Gnm)
        return;
    const NodeAnnouncement a = nodes_[node].announce(engine_.now());
    switch (cause) {
    case AnnounceCause::Initial: ++log_.announce_initial; break;
    case AnnounceCause::Admission: ++log_.announce_admission; break;
    case AnnounceCause::Completion: ++log_.announce_completion; break;
    case AnnounceCause::UrgentBegin:
    case AnnounceCause::UrgentEnd: ++log_.announce_urgent; break;
    case AnnounceCause::Tick: ++log_.announce_tick; break;
    }
    if (sinks_.announcements)
        sinks_.announcements(a, cause);
}

void Simulation::handle_completion(NodeId node, const CompletionInfo& info) {
    const SimTime now = engine_.now();
    ++log_.completions;
    const TaskId task_id = info.record.task_id;
    const SimTime started = info.record.start_time_s.value_or(now);
    auto action = ls_->on_attempt_finished(std::span<GnmNode>(nodes_), task_id, started,
                                           info.record.final_state, now, log_);
    if (action)
        execute_dispatch(*action);
    announce_node(node, AnnounceCause::Completion);
    try_start(node);

    if (cfg_.params.cancel_job_on_giveup && !action && ls_->task_known(task_id)) {
        const LsTask& t = ls_->task(task_id);
        if (t.terminal && log_.tasks[t.entry_index].final == TaskFinal::Fail)
            cancel_job_siblings(info.job_id);
    }
}

void Simulation::cancel_job_siblings(JobId job) {
    const SimTime now = engine_.now();
    for (TaskId task_id : ls_->active_job_tasks(job)) {
        const LsTask& t = ls_->task(task_id);
        if (t.pending) {
            ls_->mark_aborted(task_id, now, log_);
            continue;
        }
        if (t.open_allocation < 0)
            continue;
        const NodeId node = log_.allocations[t.open_allocation].node_id;
        auto info = nodes_[node].abort_task(task_id, now);
        if (info) {
            ++log_.completions;
            ls_->on_attempt_finished(std::span<GnmNode>(nodes_), task_id,
                                     info->record.start_time_s.value_or(now), TaskState::Aborted,
                                     now, log_);
            announce_node(node, AnnounceCause::Completion);
            try_start(node);
        }
    }
}

void Simulation::finalize() {
    const SimTime now = horizon_;
    ls_->expire_overdue(now, log_);
    // anything still held by a node is past its deadline: waiting tasks are
    // cancelled (neutral), the running task failed its deadline
    for (auto& node : nodes_) {
        std::vector<TaskId> waiting;
        for (const auto& q : node.queue())
            waiting.push_back(q.task.task_id);
        for (TaskId id : waiting) {
            auto info = node.abort_task(id, now);
            if (info) {
                ++log_.completions;
                ls_->on_attempt_finished(std::span<GnmNode>(nodes_), id,
                                         info->record.start_time_s.value_or(now),
                                         TaskState::Aborted, now, log_);
                announce_node(node.id(), AnnounceCause::Completion);
            }
        }
        if (node.running() && !node.running()->legacy) {
            const TaskId id = node.running()->item.task.task_id;
            auto info = node.complete_task(id, TaskState::Fail, now);
            ++log_.completions;
            ls_->on_attempt_finished(std::span<GnmNode>(nodes_), id,
                                     info.record.start_time_s.value_or(now), TaskState::Fail, now,
                                     log_);
            announce_node(node.id(), AnnounceCause::Completion);
        }
    }
}

std::string event_to_ndjson(const Event& ev) {
    using json = nlohmann::ordered_json;
    json j;
    j["t"] = ev.fire_at_s;
    j["seq"] = ev.sequence;
    j["kind"] = to_string(ev.kind);
    json payload;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TaskArrivalPayload>) {
                payload["node"] = p.node;
                payload["task"] = p.task;
            } else if constexpr (std::is_same_v<T, TaskStartPayload>) {
                payload["node"] = p.node;
            } else if constexpr (std::is_same_v<T, TaskFinishPayload> ||
                                 std::is_same_v<T, TaskFailPayload>) {
                payload["node"] = p.node;
                payload["token"] = p.token;
            } else if constexpr (std::is_same_v<T, LocalLoadChangePayload>) {
                payload["node"] = p.node;
                payload["begin"] = p.begin;
                payload["until_s"] = p.until_s;
            } else if constexpr (std::is_same_v<T, AnnounceTickPayload> ||
                                 std::is_same_v<T, RsaTickPayload> ||
                                 std::is_same_v<T, UrgentChangePayload>) {
                payload["node"] = p.node;
            } else if constexpr (std::is_same_v<T, JobSubmittedPayload>) {
                payload["ls"] = p.ls_id;
                payload["jobs"] = p.jobs;
            }
        },
        ev.payload);
    j["payload"] = std::move(payload);
    return j.dump();
}

std::string announcement_to_ndjson(const NodeAnnouncement& a, AnnounceCause cause) {
    using json = nlohmann::ordered_json;
    json j;
    j["t"] = a.issued_at_s;
    j["node"] = a.node_id;
    j["cause"] = to_string(cause);
    j["accepting"] = a.accepting;
    j["non_accept_until_s"] = a.non_accept_until_s;
    j["success_ratio"] = a.success_ratio;
    j["act_s"] = a.act_s;
    j["act_has_data"] = a.act_has_data;
    j["avg_cpu_idle"] = a.avg_cpu_idle;
    j["avg_free_ram_mb"] = a.avg_free_ram_mb;
    j["offered_price"] = a.offered_price;
    return j.dump();
}

std::vector<RunLog> run_matrix(const ScenarioConfig& cfg, const MatrixOptions& opts) {
    std::vector<RunLog> logs;
    for (std::size_t g = 0; g < cfg.job_groups.size(); ++g) {
        for (std::size_t l = 0; l < cfg.local_schedulers.size(); ++l) {
            for (int rep = 0; rep < opts.replications; ++rep) {
                const std::uint64_t seed = opts.base_seed + static_cast<std::uint64_t>(rep);
                {
                    Simulation sim(cfg, l, g, SchedulerPolicy::Gnm, seed);
                    sim.set_sinks(opts.sinks);
                    logs.push_back(sim.run());
                    if (opts.on_run_end)
                        opts.on_run_end(sim, logs.back());
                }
                if (opts.include_baseline) {
                    Simulation sim(cfg, l, g, SchedulerPolicy::Random, seed);
                    sim.set_sinks(opts.sinks);
                    logs.push_back(sim.run());
                    if (opts.on_run_end)
                        opts.on_run_end(sim, logs.back());
                }
            }
        }
    }
    return logs;
}

} // namespace gridwise
