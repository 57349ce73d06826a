#pragma once

#include "gridwise/cbr.hpp"
#include "gridwise/domain.hpp"
#include "gridwise/engine.hpp"
#include "gridwise/roughset.hpp"

#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace gridwise {

// Node-module tunables; one instance shared by all nodes of a scenario.
struct GnmParams {
    int bins = 3;
    rs::BinMethod bin_method = rs::BinMethod::EqualFrequency;
    int k_neighbors = 5;
    double predicted_fail_threshold = 0.7; // reject when a Fail prediction is at least this confident
    double rsa_new_fraction = 0.01;
    Duration rsa_min_interval_s = 86400;
    double dtr_jitter = 0.2;        // DTR perturbation amplitude at each dispatch
    double burst_slowdown = 0.5;    // effective grid MIPS factor during local bursts
    double burst_cpu_load = 0.95;
    double queue_ref_len = 10;      // queue length regarded as full for pricing
    bool optimistic_prior = true;   // empty-history success ratio = 1
    double nominal_size_mi = 20000; // availability probe when no history
    Duration nominal_deadline_s = 1200;
    bool knowledge_enabled = true;  // false: naive baseline, memory check only
};

enum class RejectReason { DeadlineInfeasible, InsufficientMemory, NotAccepting, PredictedFail };
const char* to_string(RejectReason r);

struct AdmitDecision {
    bool admitted = false;
    RejectReason reason = RejectReason::NotAccepting; // valid when !admitted
    std::optional<Prediction> prediction;             // present on accept and on PredictedFail
    bool knowledge_backed = false;                    // prediction came from rule-filtered CBR
    double offered_price = 0;
    Duration transfer_s = 0;
    SimTime earliest_start_s = 0;
    SimTime predicted_finish_s = 0; // static capacity estimate, not the CBR view
};

struct QueuedTask {
    Task task;
    SimTime absolute_deadline_s = 0;
    SimTime submitted_at_s = 0;
    SimTime ready_at_s = 0; // transfer completes
    double admitted_price = 0;
    Prediction prediction;
    TaskRecord record; // submission-time fields captured at admit
};

struct RunningWork {
    bool legacy = false; // pre-existing backlog: no record, no notifications
    QueuedTask item;
    SimTime started_at_s = 0;
    double length_mi = 0;
    double done_mi = 0;
    double fail_after_mi = -1; // < 0: sampled to succeed
    SimTime last_update_s = 0;
    std::uint64_t token = 0;
};

struct StartResult {
    enum class Status { Started, NotReady, Idle };
    Status status = Status::Idle;
    SimTime at = 0; // milestone time when Started, ready time when NotReady
    bool will_fail = false;
    std::uint64_t token = 0;
};

struct CompletionInfo {
    TaskRecord record;
    JobId job_id = -1;
    SimTime submitted_at_s = 0;
    SimTime absolute_deadline_s = 0;
    bool legacy = false;
    bool rsa_ran = false;
};

double compute_success_ratio(const cbr::CaseBase& records, bool optimistic_prior = true);

struct ActResult {
    Duration act_s = 0;
    bool has_data = false;
};
ActResult compute_act(const cbr::CaseBase& records);

// The per-node Grid Node's Module: admission control, task queue and record
// table, announcer statistics, urgent-change handling and price adjustment.
// All operations run inside the single simulation context.
class GnmNode {
public:
    GnmNode(NodeSpec spec, GnmParams params, std::uint64_t scenario_seed);

    const NodeSpec& spec() const { return spec_; }
    NodeId id() const { return spec_.node_id; }

    // scenario build hooks
    void set_initial_backlog(Duration backlog_s);
    void set_local_profile(double cpu_load, double ram_used_mb);
    void preload_record(const TaskRecord& warm, Duration deadline_s);

    // visible state
    double cpu_load(SimTime now) const;
    double free_ram_mb() const { return free_ram_mb_; }
    double dtr_current() const { return dtr_current_; }
    int waiting_count() const { return static_cast<int>(queue_.size()); }
    bool burst_active(SimTime now) const { return now < local_load_until_s_; }
    SimTime local_load_until_s() const { return local_load_until_s_; }
    bool accepting() const { return accepting_; }
    bool idle() const { return !running_ && queue_.empty(); }
    double queued_work_mi() const;
    const cbr::CaseBase& records() const { return records_; }
    const std::optional<rs::RuleModel>& model() const { return model_; }
    const rs::RsaTriggerState& rsa_state() const { return rsa_state_; }
    const std::deque<QueuedTask>& queue() const { return queue_; }
    const std::optional<RunningWork>& running() const { return running_; }

    // Probe: full admission decision without mutating anything. The active
    // decision attribute reflects what the consumer weighs most.
    AdmitDecision evaluate_task(const Task& task, SimTime absolute_deadline_s, SimTime now,
                                rs::DecisionAttr active = rs::DecisionAttr::FinalStatus) const;

    // Commit: re-evaluates, then enqueues in Wait state, reserves memory,
    // redraws the DTR and captures the submission record fields.
    AdmitDecision admit_task(const Task& task, SimTime absolute_deadline_s, SimTime now,
                             rs::DecisionAttr active = rs::DecisionAttr::FinalStatus);

    // Starts the next ready queued task if the CPU is free; samples the
    // outcome and failure point on the node's own stream.
    StartResult try_start_next(SimTime now);

    // Milestone handlers; stale tokens return nothing.
    std::optional<CompletionInfo> on_finish_milestone(std::uint64_t token, SimTime now);
    std::optional<CompletionInfo> on_fail_milestone(std::uint64_t token, SimTime now);

    // Scheduler-driven abort of a waiting or running task.
    std::optional<CompletionInfo> abort_task(TaskId task_id, SimTime now);

    // Unified completion entry point (unknown ids are contract violations).
    CompletionInfo complete_task(TaskId task_id, TaskState outcome, SimTime now);

    // Local load burst edges. begin returns true when the burst changed the
    // node to non-accepting or rescheduled the running milestone.
    void begin_local_burst(SimTime now, SimTime until_s);
    void end_local_burst(SimTime now);

    // Milestone of the currently running work under the current rate, if any.
    struct Milestone {
        SimTime at = 0;
        bool is_failure = false;
        std::uint64_t token = 0;
    };
    std::optional<Milestone> current_milestone(SimTime now) const;

    double adjust_price(SimTime now) const;
    NodeAnnouncement make_announcement(SimTime now) const;
    // make_announcement + caches the accepting flag (the published view).
    NodeAnnouncement announce(SimTime now);

    // Rebuilds the three rule matrices when the trigger conditions hold.
    bool maybe_run_rsa(SimTime now);

    // streaming statistics (kept in step with the record table)
    long success_count() const { return n_success_; }
    long fail_count() const { return n_fail_; }
    long aborted_count() const { return n_aborted_; }
    double streaming_success_ratio() const;

private:
    Duration transfer_time(double size_units, double dtr) const;
    double effective_rate(SimTime t) const;
    SimTime finish_time_for(double work_mi, SimTime from) const;
    void advance_progress(SimTime now);
    CompletionInfo finalize(TaskState outcome, SimTime now, bool from_running);
    void append_record(const TaskRecord& rec, Duration deadline_s);
    double median_or(const std::vector<double>& values, double fallback) const;

    NodeSpec spec_;
    GnmParams params_;
    RngStream rng_;

    std::deque<QueuedTask> queue_;
    std::optional<RunningWork> running_;
    std::uint64_t running_token_ = 1;
    double local_cpu_load_ = 0.1;
    double local_ram_used_mb_ = 0;
    double free_ram_mb_ = 0;
    double dtr_current_ = 0;
    SimTime local_load_until_s_ = -1;
    bool accepting_ = true;

    cbr::CaseBase records_;
    std::optional<rs::RuleModel> model_;
    rs::RsaTriggerState rsa_state_;

    long n_success_ = 0;
    long n_fail_ = 0;
    long n_aborted_ = 0;
    double sum_completion_s_ = 0;
    double sum_cpu_load_ = 0;
    double sum_free_ram_ = 0;
    std::vector<double> seen_sizes_mi_;
    std::vector<double> seen_deadlines_s_;
};

} // namespace gridwise
