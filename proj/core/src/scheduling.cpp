#include "gridwise/scheduling.hpp"

#include "gridwise/workload.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace gridwise {

const char* to_string(TaskFinal f) {
    switch (f) {
    case TaskFinal::Success: return "Success";
    case TaskFinal::Fail: return "Fail";
    case TaskFinal::Aborted: return "Aborted";
    case TaskFinal::Expired: return "Expired";
    }
    return "?";
}

const char* to_string(AnnounceCause c) {
    switch (c) {
    case AnnounceCause::Initial: return "initial";
    case AnnounceCause::Admission: return "admission";
    case AnnounceCause::Completion: return "completion";
    case AnnounceCause::UrgentBegin: return "urgent_begin";
    case AnnounceCause::UrgentEnd: return "urgent_end";
    case AnnounceCause::Tick: return "tick";
    }
    return "?";
}

std::vector<NodeId> rank_candidates(const std::vector<Bid>& bids, double reliability_weight,
                                    double completion_weight, Duration deadline_s) {
    struct Entry {
        double score;
        double price;
        NodeId id;
    };
    std::vector<Entry> entries;
    for (const auto& bid : bids) {
        if (!bid.admitted)
            continue;
        if (!bid.prediction)
            throw std::logic_error("admitted bid without a prediction");
        const double completion_term =
            deadline_s > 0 ? 1.0 - bid.prediction->predicted_completion_s / deadline_s : 0.0;
        const double score = reliability_weight * bid.announcement.success_ratio +
                             completion_weight * completion_term;
        entries.push_back({score, bid.announcement.offered_price, bid.node_id});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.price != b.price) return a.price < b.price;
        return a.id < b.id;
    });
    std::vector<NodeId> out;
    out.reserve(entries.size());
    for (const auto& e : entries)
        out.push_back(e.id);
    return out;
}

std::vector<NodeId> rank_candidates(const std::vector<Bid>& bids, const Job& job) {
    if (job.tasks.empty())
        throw std::invalid_argument("rank_candidates: job has no tasks");
    return rank_candidates(bids, job.reliability_weight, job.completion_weight,
                           job.tasks.front().deadline_s);
}

LocalScheduler::LocalScheduler(std::string ls_id, std::vector<NodeId> members,
                               SchedulerPolicy policy, std::uint64_t scenario_seed)
    : ls_id_(std::move(ls_id)),
      members_(std::move(members)),
      policy_(policy),
      rng_(scenario_seed, "ls/" + ls_id_) {
    std::sort(members_.begin(), members_.end());
}

rs::DecisionAttr LocalScheduler::active_attr(const LsTask& t) const {
    // what the consumer weighs most picks the decision attribute
    return t.reliability_weight >= t.completion_weight ? rs::DecisionAttr::FinalStatus
                                                       : rs::DecisionAttr::CompletionTimeClass;
}

void LocalScheduler::submit_job(const Job& job, SimTime now, RunLog& log) {
    for (const Task& task : job.tasks) {
        LsTask t;
        t.task = task;
        t.job_id = job.job_id;
        t.submit_s = now;
        t.absolute_deadline_s = now + task.deadline_s;
        t.reliability_weight = job.reliability_weight;
        t.completion_weight = job.completion_weight;

        TaskEntry entry;
        entry.task_id = task.task_id;
        entry.job_id = job.job_id;
        entry.submit_s = now;
        entry.deadline_s = task.deadline_s;
        t.entry_index = static_cast<int>(log.tasks.size());
        log.tasks.push_back(entry);

        tasks_.emplace(task.task_id, std::move(t));
        ++pending_count_;
    }
}

LocalScheduler::ProbeResult LocalScheduler::probe(GnmNode& node, const LsTask& t,
                                                  SimTime now) const {
    ProbeResult r;
    r.bid.node_id = node.id();
    r.bid.announcement = node.make_announcement(now);
    AdmitDecision d = node.evaluate_task(t.task, t.absolute_deadline_s, now, active_attr(t));
    r.bid.admitted = d.admitted;
    r.bid.prediction = d.prediction;
    r.bid.knowledge_backed = d.knowledge_backed;
    r.transfer_s = d.transfer_s;
    return r;
}

namespace {

bool contains(const std::vector<NodeId>& v, NodeId id) {
    return std::find(v.begin(), v.end(), id) != v.end();
}

} // namespace

std::optional<DispatchAction> LocalScheduler::dispatch_one(std::span<GnmNode> nodes, LsTask& t,
                                                           const std::vector<NodeId>& exclude,
                                                           SimTime now, RunLog& log,
                                                           bool record_retry_audit,
                                                           double* best_prediction_out) {
    auto commit_on = [&](NodeId id) -> std::optional<DispatchAction> {
        GnmNode& node = nodes[id];
        AdmitDecision commit = node.admit_task(t.task, t.absolute_deadline_s, now, active_attr(t));
        if (!commit.admitted)
            return std::nullopt;
        AllocationRecord row;
        row.task_id = t.task.task_id;
        row.job_id = t.job_id;
        row.attempt_number = ++t.attempts;
        row.node_id = id;
        row.dispatched_at_s = now;
        row.transfer_s = commit.transfer_s;
        row.prediction = commit.prediction.value_or(Prediction{});
        row.knowledge_backed = commit.knowledge_backed;
        t.open_allocation = static_cast<int>(log.allocations.size());
        log.allocations.push_back(row);
        log.tasks[t.entry_index].attempts = t.attempts;
        if (t.pending) {
            t.pending = false;
            --pending_count_;
        }
        ++log.admissions;
        return DispatchAction{id, t.task.task_id, commit.transfer_s};
    };

    if (policy_ == SchedulerPolicy::Random) {
        std::vector<NodeId> cands;
        for (NodeId id : members_)
            if (!contains(exclude, id) && !contains(t.faulted, id))
                cands.push_back(id);
        while (!cands.empty()) {
            const std::size_t pick = static_cast<std::size_t>(rng_.uniform_int(cands.size()));
            if (auto action = commit_on(cands[pick]))
                return action;
            cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        return std::nullopt;
    }

    std::vector<Bid> bids;
    for (NodeId id : members_) {
        if (contains(exclude, id) || contains(t.faulted, id))
            continue;
        GnmNode& node = nodes[id];
        if (!node.accepting())
            continue; // last published announcement said so
        bids.push_back(probe(node, t, now).bid);
    }

    double best_pred = std::numeric_limits<double>::infinity();
    bool any_admitted = false;
    for (const auto& bid : bids) {
        if (bid.admitted && bid.prediction) {
            any_admitted = true;
            best_pred = std::min(best_pred, bid.prediction->predicted_completion_s);
        }
    }
    if (best_prediction_out)
        *best_prediction_out = any_admitted ? best_pred : -1.0;
    if (!any_admitted)
        return std::nullopt;

    if (record_retry_audit) {
        // re-iteration budget rule: the remaining deadline budget must cover
        // the best predicted completion among currently admitting nodes
        if (t.absolute_deadline_s - now < best_pred)
            return std::nullopt;
    }

    const auto ranked =
        rank_candidates(bids, t.reliability_weight, t.completion_weight, t.task.deadline_s);
    for (NodeId id : ranked) {
        if (auto action = commit_on(id))
            return action;
    }
    return std::nullopt;
}

std::vector<DispatchAction> LocalScheduler::dispatch_round(std::span<GnmNode> nodes, SimTime now,
                                                           RunLog& log) {
    std::vector<DispatchAction> actions;
    std::vector<NodeId> used_this_round; // uniform allocation: one task per node per round
    for (auto& [id, t] : tasks_) {
        if (!t.pending || t.terminal)
            continue;
        if (now > t.absolute_deadline_s)
            continue; // expire_overdue will pick it up
        if (auto action = dispatch_one(nodes, t, used_this_round, now, log, false, nullptr)) {
            used_this_round.push_back(action->node);
            actions.push_back(*action);
        }
    }
    return actions;
}

std::optional<DispatchAction> LocalScheduler::on_attempt_finished(std::span<GnmNode> nodes,
                                                                  TaskId task_id,
                                                                  SimTime started_at_s,
                                                                  TaskState outcome, SimTime now,
                                                                  RunLog& log) {
    auto it = tasks_.find(task_id);
    if (it == tasks_.end())
        throw std::logic_error("on_attempt_finished: unknown task " + std::to_string(task_id));
    LsTask& t = it->second;
    if (t.open_allocation < 0)
        throw std::logic_error("on_attempt_finished: task has no open allocation");

    AllocationRecord& row = log.allocations[t.open_allocation];
    row.outcome = outcome;
    row.finished_at_s = now;
    row.started_at_s = started_at_s;
    const int closed_allocation = t.open_allocation;
    t.open_allocation = -1;

    TaskEntry& entry = log.tasks[t.entry_index];
    switch (outcome) {
    case TaskState::Success:
        t.terminal = true;
        entry.terminal = true;
        entry.final = TaskFinal::Success;
        entry.finished_at_s = now;
        return std::nullopt;
    case TaskState::Aborted:
        // abort comes from the consumer side; never re-iterated
        t.terminal = true;
        entry.terminal = true;
        entry.final = TaskFinal::Aborted;
        entry.finished_at_s = now;
        return std::nullopt;
    case TaskState::Fail:
        break;
    default:
        throw std::logic_error("on_attempt_finished: outcome must be terminal");
    }

    // replace the faulted node and restart, if the deadline budget allows
    t.faulted.push_back(row.node_id);
    log.allocations[closed_allocation].budget_remaining_s = t.absolute_deadline_s - now;

    if (policy_ == SchedulerPolicy::Random) {
        if (now <= t.absolute_deadline_s) {
            if (auto action = dispatch_one(nodes, t, {}, now, log, false, nullptr)) {
                log.allocations[closed_allocation].reiterated = true;
                return action;
            }
        }
    } else {
        double best_pred = -1.0;
        auto action = dispatch_one(nodes, t, {}, now, log, true, &best_pred);
        log.allocations[closed_allocation].best_retry_prediction_s = best_pred;
        if (action) {
            log.allocations[closed_allocation].reiterated = true;
            return action;
        }
    }

    log.allocations[closed_allocation].gave_up = true;
    t.terminal = true;
    entry.terminal = true;
    entry.final = TaskFinal::Fail;
    entry.finished_at_s = now;
    return std::nullopt;
}

void LocalScheduler::expire_overdue(SimTime now, RunLog& log) {
    for (auto& [id, t] : tasks_) {
        if (t.terminal || !t.pending)
            continue;
        if (now > t.absolute_deadline_s) {
            t.pending = false;
            t.terminal = true;
            --pending_count_;
            TaskEntry& entry = log.tasks[t.entry_index];
            entry.terminal = true;
            entry.final = TaskFinal::Expired;
        }
    }
}

std::vector<TaskId> LocalScheduler::active_job_tasks(JobId job) const {
    std::vector<TaskId> out;
    for (const auto& [id, t] : tasks_)
        if (t.job_id == job && !t.terminal)
            out.push_back(id);
    return out;
}

void LocalScheduler::mark_aborted(TaskId id, SimTime now, RunLog& log) {
    auto it = tasks_.find(id);
    if (it == tasks_.end())
        throw std::logic_error("mark_aborted: unknown task " + std::to_string(id));
    LsTask& t = it->second;
    if (t.terminal || !t.pending)
        throw std::logic_error("mark_aborted: task is not pending");
    t.pending = false;
    t.terminal = true;
    --pending_count_;
    TaskEntry& entry = log.tasks[t.entry_index];
    entry.terminal = true;
    entry.final = TaskFinal::Aborted;
    entry.finished_at_s = now;
}

void MetaScheduler::register_scheduler(LocalScheduler* ls) {
    schedulers_.push_back(ls);
}

LocalScheduler* MetaScheduler::find(const std::string& ls_id) {
    for (LocalScheduler* ls : schedulers_)
        if (ls->id() == ls_id)
            return ls;
    return nullptr;
}

SubmissionHandle MetaScheduler::submit_job_group(Engine& engine, const JobGroupSpec& group,
                                                 const std::string& target_ls, SimTime at_s) {
    LocalScheduler* ls = find(target_ls);
    if (!ls)
        throw std::invalid_argument("submit_job_group: unknown local scheduler '" + target_ls + "'");

    auto jobs = workload::build_jobs(group, next_job_id_, next_task_id_);
    SubmissionHandle handle{group.name, target_ls, at_s, {}};
    for (auto& job : jobs) {
        handle.job_ids.push_back(job.job_id);
        next_job_id_ = std::max(next_job_id_, job.job_id + 1);
        for (const auto& task : job.tasks)
            next_task_id_ = std::max(next_task_id_, task.task_id + 1);
        jobs_.emplace(job.job_id, std::move(job));
    }
    engine.schedule(at_s, EventKind::JobSubmitted, JobSubmittedPayload{target_ls, handle.job_ids});
    return handle;
}

} // namespace gridwise
