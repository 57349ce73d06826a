#include "gridwise/gnm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gridwise {

const char* to_string(RejectReason r) {
    switch (r) {
    case RejectReason::DeadlineInfeasible: return "DeadlineInfeasible";
    case RejectReason::InsufficientMemory: return "InsufficientMemory";
    case RejectReason::NotAccepting: return "NotAccepting";
    case RejectReason::PredictedFail: return "PredictedFail";
    }
    return "?";
}

double compute_success_ratio(const cbr::CaseBase& records, bool optimistic_prior) {
    long ns = 0, nf = 0;
    for (const auto& r : records.cases()) {
        if (r.final_state == TaskState::Success) ++ns;
        else if (r.final_state == TaskState::Fail) ++nf;
        // aborted tasks are neutral: not in the denominator
    }
    if (ns + nf == 0)
        return optimistic_prior ? 1.0 : 0.0;
    return static_cast<double>(ns) / static_cast<double>(ns + nf);
}

ActResult compute_act(const cbr::CaseBase& records) {
    double sum = 0;
    long n = 0;
    for (const auto& r : records.cases()) {
        if (r.final_state == TaskState::Success && r.completion_time_s) {
            sum += *r.completion_time_s;
            ++n;
        }
    }
    if (n == 0)
        return {0.0, false};
    return {sum / static_cast<double>(n), true};
}

GnmNode::GnmNode(NodeSpec spec, GnmParams params, std::uint64_t scenario_seed)
    : spec_(std::move(spec)),
      params_(params),
      rng_(scenario_seed, "node/" + std::to_string(spec_.node_id)),
      records_(spec_.node_id) {
    free_ram_mb_ = spec_.total_ram_mb;
    dtr_current_ = spec_.dtr_base;
}

void GnmNode::set_initial_backlog(Duration backlog_s) {
    if (backlog_s <= 0)
        return;
    RunningWork legacy;
    legacy.legacy = true;
    legacy.length_mi = backlog_s * spec_.grid_mips;
    legacy.started_at_s = 0;
    legacy.last_update_s = 0;
    legacy.token = running_token_++;
    running_ = std::move(legacy);
}

void GnmNode::set_local_profile(double cpu_load, double ram_used_mb) {
    local_cpu_load_ = std::clamp(cpu_load, 0.0, 1.0);
    local_ram_used_mb_ = std::clamp(ram_used_mb, 0.0, spec_.total_ram_mb);
    free_ram_mb_ = spec_.total_ram_mb - local_ram_used_mb_;
    for (const auto& q : queue_)
        free_ram_mb_ -= q.task.memory_mb;
    if (running_ && !running_->legacy)
        free_ram_mb_ -= running_->item.task.memory_mb;
}

void GnmNode::preload_record(const TaskRecord& warm, Duration deadline_s) {
    append_record(warm, deadline_s);
}

void GnmNode::append_record(const TaskRecord& rec, Duration deadline_s) {
    records_.retain(rec);
    switch (rec.final_state) {
    case TaskState::Success:
        ++n_success_;
        if (rec.completion_time_s)
            sum_completion_s_ += *rec.completion_time_s;
        break;
    case TaskState::Fail: ++n_fail_; break;
    case TaskState::Aborted: ++n_aborted_; break;
    default: break;
    }
    sum_cpu_load_ += rec.cpu_load_at_submit;
    sum_free_ram_ += rec.free_ram_at_submit_mb;
    seen_sizes_mi_.push_back(rec.task_size_mi);
    if (deadline_s > 0)
        seen_deadlines_s_.push_back(deadline_s);
}

double GnmNode::cpu_load(SimTime now) const {
    return burst_active(now) ? std::max(params_.burst_cpu_load, local_cpu_load_) : local_cpu_load_;
}

double GnmNode::queued_work_mi() const {
    double work = 0;
    if (running_)
        work += running_->length_mi - running_->done_mi;
    for (const auto& q : queue_)
        work += q.task.length_mi;
    return work;
}

Duration GnmNode::transfer_time(double size_units, double dtr) const {
    if (dtr <= 0)
        throw std::logic_error("transfer with non-positive DTR");
    return size_units / dtr;
}

double GnmNode::effective_rate(SimTime t) const {
    return spec_.grid_mips * (t < local_load_until_s_ ? params_.burst_slowdown : 1.0);
}

SimTime GnmNode::finish_time_for(double work_mi, SimTime from) const {
    if (work_mi <= 0)
        return from;
    if (from < local_load_until_s_) {
        const double slow = spec_.grid_mips * params_.burst_slowdown;
        const double burst_capacity = slow * (local_load_until_s_ - from);
        if (work_mi <= burst_capacity)
            return from + work_mi / slow;
        work_mi -= burst_capacity;
        from = local_load_until_s_;
    }
    return from + work_mi / spec_.grid_mips;
}

void GnmNode::advance_progress(SimTime now) {
    if (!running_)
        return;
    SimTime t = running_->last_update_s;
    if (t >= now)
        return;
    double did = 0;
    if (t < local_load_until_s_) {
        const SimTime end = std::min(now, local_load_until_s_);
        did += spec_.grid_mips * params_.burst_slowdown * (end - t);
        t = end;
    }
    if (t < now)
        did += spec_.grid_mips * (now - t);
    running_->done_mi = std::min(running_->done_mi + did, running_->length_mi);
    running_->last_update_s = now;
}

double GnmNode::median_or(const std::vector<double>& values, double fallback) const {
    if (values.empty())
        return fallback;
    std::vector<double> v(values);
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return v[mid];
}

double GnmNode::streaming_success_ratio() const {
    if (n_success_ + n_fail_ == 0)
        return params_.optimistic_prior ? 1.0 : 0.0;
    return static_cast<double>(n_success_) / static_cast<double>(n_success_ + n_fail_);
}

double GnmNode::adjust_price(SimTime now) const {
    (void)now;
    const double alpha = spec_.standard_price_alpha;
    const double p = spec_.price_tolerance_p;
    // pressure combines queue fill and the recent success record, equally
    // weighted; empty queue at ratio 0.5 sits exactly at the neutral point
    const double queue_fill =
        std::min(1.0, static_cast<double>(queue_.size()) / std::max(1.0, params_.queue_ref_len));
    const double ratio_signal = 2.0 * streaming_success_ratio() - 1.0;
    const double pressure = (queue_fill + ratio_signal) / 2.0;
    return clamp_offered_price(alpha, p, alpha * (1.0 + p * pressure));
}

NodeAnnouncement GnmNode::make_announcement(SimTime now) const {
    NodeAnnouncement a;
    a.node_id = spec_.node_id;
    a.issued_at_s = now;
    a.success_ratio = streaming_success_ratio();
    const long n = static_cast<long>(records_.size());
    if (n > 0) {
        a.avg_cpu_idle = 1.0 - sum_cpu_load_ / static_cast<double>(n);
        a.avg_free_ram_mb = sum_free_ram_ / static_cast<double>(n);
    } else {
        a.avg_cpu_idle = 1.0 - cpu_load(now);
        a.avg_free_ram_mb = free_ram_mb_;
    }
    if (n_success_ > 0) {
        a.act_s = sum_completion_s_ / static_cast<double>(n_success_);
        a.act_has_data = true;
    }

    // availability horizon: when the backlog has drained enough that a
    // nominal task (median historical size/deadline) would be feasible
    const double nominal_size = median_or(seen_sizes_mi_, params_.nominal_size_mi);
    const double nominal_deadline = median_or(seen_deadlines_s_, params_.nominal_deadline_s);
    const double slack_s = std::max(0.0, nominal_deadline - nominal_size / spec_.grid_mips);
    const SimTime drain_end = finish_time_for(queued_work_mi(), now);
    SimTime horizon = std::max(now, drain_end - slack_s);
    if (burst_active(now))
        horizon = std::max(horizon, local_load_until_s_);
    a.non_accept_until_s = horizon;
    a.accepting = horizon <= now;
    a.offered_price = adjust_price(now);
    return a;
}

NodeAnnouncement GnmNode::announce(SimTime now) {
    NodeAnnouncement a = make_announcement(now);
    accepting_ = a.accepting;
    return a;
}

AdmitDecision GnmNode::evaluate_task(const Task& task, SimTime absolute_deadline_s, SimTime now,
                                     rs::DecisionAttr active) const {
    AdmitDecision d;
    d.offered_price = params_.knowledge_enabled ? adjust_price(now) : spec_.standard_price_alpha;

    const double size_units = task.size_units > 0 ? task.size_units : task.memory_mb;
    d.transfer_s = transfer_time(size_units, dtr_current_);
    const Duration drain_s = finish_time_for(queued_work_mi(), now) - now;
    d.earliest_start_s = now + d.transfer_s + drain_s;
    d.predicted_finish_s = d.earliest_start_s + execution_time(task, spec_);

    if (!params_.knowledge_enabled) {
        // naive baseline: physical memory check only
        if (task.memory_mb > free_ram_mb_) {
            d.reason = RejectReason::InsufficientMemory;
            return d;
        }
        d.admitted = true;
        d.prediction = Prediction{TaskState::Success, d.predicted_finish_s - now, 0.0, 0.0};
        return d;
    }

    // a non-accepting announcement rejects regardless of capacity
    if (!make_announcement(now).accepting) {
        d.reason = RejectReason::NotAccepting;
        return d;
    }
    if (task.memory_mb > free_ram_mb_) {
        d.reason = RejectReason::InsufficientMemory;
        return d;
    }
    if (d.predicted_finish_s > absolute_deadline_s) {
        d.reason = RejectReason::DeadlineInfeasible;
        return d;
    }

    if (model_) {
        cbr::QueryCase q;
        q.size_mi = task.length_mi;
        q.memory_mb = task.memory_mb;
        q.deadline_s = task.deadline_s;
        q.priority = task.priority;
        q.cpu_load = cpu_load(now);
        q.free_ram_mb = free_ram_mb_;
        q.waiting = waiting_count();
        q.dtr = dtr_current_;
        const auto retrieval = cbr::retrieve(records_, *model_, active, q);
        Prediction pred = cbr::predict(records_, retrieval.case_indices, q, params_.k_neighbors);
        d.prediction = pred;
        d.knowledge_backed = true;
        if (pred.predicted_state == TaskState::Fail &&
            pred.confidence >= params_.predicted_fail_threshold) {
            d.reason = RejectReason::PredictedFail;
            return d;
        }
    } else {
        // cold start: capacity checks only; neutral prediction with zero
        // confidence from the static estimate
        d.prediction = Prediction{TaskState::Success, d.predicted_finish_s - now,
                                  d.offered_price * execution_time(task, spec_) / 60.0, 0.0};
    }

    d.admitted = true;
    return d;
}

AdmitDecision GnmNode::admit_task(const Task& task, SimTime absolute_deadline_s, SimTime now,
                                  rs::DecisionAttr active) {
    AdmitDecision d = evaluate_task(task, absolute_deadline_s, now, active);
    if (!d.admitted)
        return d;

    // DTR has upheaval sometimes: redraw at each dispatch
    dtr_current_ = spec_.dtr_base * (1.0 + params_.dtr_jitter * rng_.uniform(-1.0, 1.0));
    const double size_units = task.size_units > 0 ? task.size_units : task.memory_mb;
    d.transfer_s = transfer_time(size_units, dtr_current_);

    QueuedTask q;
    q.task = task;
    q.absolute_deadline_s = absolute_deadline_s;
    q.submitted_at_s = now;
    q.ready_at_s = now + d.transfer_s;
    q.admitted_price = d.offered_price;
    q.prediction = d.prediction.value_or(Prediction{});

    TaskRecord rec;
    rec.task_id = task.task_id;
    rec.cpu_load_at_submit = cpu_load(now);
    rec.free_ram_at_submit_mb = free_ram_mb_;
    rec.task_size_mi = task.length_mi;
    rec.priority = task.priority;
    rec.waiting_grid_tasks = waiting_count();
    rec.dtr_at_submit = dtr_current_;
    q.record = rec;

    free_ram_mb_ -= task.memory_mb;
    queue_.push_back(std::move(q));
    return d;
}

StartResult GnmNode::try_start_next(SimTime now) {
    StartResult r;
    if (running_)
        return r; // single allocated grid CPU stream
    if (queue_.empty())
        return r;
    const QueuedTask& head = queue_.front();
    if (head.ready_at_s > now) {
        r.status = StartResult::Status::NotReady;
        r.at = head.ready_at_s;
        return r;
    }

    RunningWork w;
    w.item = queue_.front();
    queue_.pop_front();
    w.started_at_s = now;
    w.last_update_s = now;
    w.length_mi = w.item.task.length_mi;
    w.token = running_token_++;
    if (sample_task_outcome(spec_, rng_) == TaskOutcome::WillFail)
        w.fail_after_mi = rng_.uniform() * w.length_mi;
    running_ = std::move(w);

    r.status = StartResult::Status::Started;
    r.will_fail = running_->fail_after_mi >= 0;
    r.token = running_->token;
    const double target = r.will_fail ? running_->fail_after_mi : running_->length_mi;
    r.at = finish_time_for(target, now);
    return r;
}

std::optional<GnmNode::Milestone> GnmNode::current_milestone(SimTime now) const {
    if (!running_)
        return std::nullopt;
    Milestone m;
    m.is_failure = running_->fail_after_mi >= 0;
    m.token = running_->token;
    const double target = m.is_failure ? running_->fail_after_mi : running_->length_mi;
    m.at = finish_time_for(std::max(0.0, target - running_->done_mi), now);
    return m;
}

std::optional<CompletionInfo> GnmNode::on_finish_milestone(std::uint64_t token, SimTime now) {
    if (!running_ || running_->token != token || running_->fail_after_mi >= 0)
        return std::nullopt;
    if (running_->legacy) {
        CompletionInfo info;
        info.legacy = true;
        running_.reset();
        return info;
    }
    advance_progress(now);
    return finalize(now <= running_->item.absolute_deadline_s ? TaskState::Success : TaskState::Fail,
                    now, true);
}

std::optional<CompletionInfo> GnmNode::on_fail_milestone(std::uint64_t token, SimTime now) {
    if (!running_ || running_->token != token || running_->fail_after_mi < 0)
        return std::nullopt;
    advance_progress(now);
    return finalize(TaskState::Fail, now, true);
}

CompletionInfo GnmNode::finalize(TaskState outcome, SimTime now, bool from_running) {
    CompletionInfo info;
    TaskRecord rec;
    if (from_running) {
        rec = running_->item.record;
        rec.start_time_s = running_->started_at_s;
        rec.spent_time_s = now - running_->started_at_s;
        if (outcome == TaskState::Success) {
            rec.completion_time_s = now - running_->item.submitted_at_s;
            rec.cost_price = running_->item.admitted_price * (*rec.spent_time_s) / 60.0;
        }
        rec.final_state = outcome;
        info.job_id = running_->item.task.job_id;
        info.submitted_at_s = running_->item.submitted_at_s;
        info.absolute_deadline_s = running_->item.absolute_deadline_s;
        free_ram_mb_ += running_->item.task.memory_mb;
        append_record(rec, running_->item.task.deadline_s);
        running_.reset();
    }
    info.record = rec;
    info.rsa_ran = maybe_run_rsa(now);
    return info;
}

std::optional<CompletionInfo> GnmNode::abort_task(TaskId task_id, SimTime now) {
    // waiting task: drop from the queue, no start/spent times
    for (auto it = queue_.begin(); it != queue_.end(); ++it) {
        if (it->task.task_id == task_id) {
            CompletionInfo info;
            TaskRecord rec = it->record;
            rec.final_state = TaskState::Aborted;
            info.job_id = it->task.job_id;
            info.submitted_at_s = it->submitted_at_s;
            info.absolute_deadline_s = it->absolute_deadline_s;
            free_ram_mb_ += it->task.memory_mb;
            append_record(rec, it->task.deadline_s);
            queue_.erase(it);
            info.record = rec;
            info.rsa_ran = maybe_run_rsa(now);
            return info;
        }
    }
    if (running_ && !running_->legacy && running_->item.task.task_id == task_id) {
        advance_progress(now);
        return finalize(TaskState::Aborted, now, true);
    }
    return std::nullopt;
}

CompletionInfo GnmNode::complete_task(TaskId task_id, TaskState outcome, SimTime now) {
    if (outcome == TaskState::Aborted) {
        auto info = abort_task(task_id, now);
        if (!info)
            throw std::logic_error("complete_task: unknown task id " + std::to_string(task_id));
        return *info;
    }
    if (!running_ || running_->legacy || running_->item.task.task_id != task_id)
        throw std::logic_error("complete_task: task " + std::to_string(task_id) + " is not running");
    advance_progress(now);
    if (outcome != TaskState::Success && outcome != TaskState::Fail)
        throw std::logic_error("complete_task: outcome must be terminal");
    return finalize(outcome, now, true);
}

void GnmNode::begin_local_burst(SimTime now, SimTime until_s) {
    advance_progress(now); // progress so far ran at the old rate
    local_load_until_s_ = std::max(local_load_until_s_, until_s);
    if (running_)
        ++running_->token;
    accepting_ = false;
}

void GnmNode::end_local_burst(SimTime now) {
    if (now < local_load_until_s_)
        return; // superseded by a merged, longer burst
    advance_progress(now);
    if (running_)
        ++running_->token;
}

bool GnmNode::maybe_run_rsa(SimTime now) {
    if (!params_.knowledge_enabled || records_.empty())
        return false;
    if (!rs::should_run_rsa(rsa_state_, static_cast<long>(records_.size()), now,
                            params_.rsa_new_fraction, params_.rsa_min_interval_s))
        return false;
    model_ = rs::build_rule_model(records_.cases(), params_.bins, params_.bin_method, now);
    records_.recode(model_->disc);
    rsa_state_ = {now, static_cast<long>(records_.size())};
    return true;
}

} // namespace gridwise
