#pragma once

#include "gridwise/domain.hpp"
#include "gridwise/engine.hpp"
#include "gridwise/gnm.hpp"
#include "gridwise/runlog.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gridwise {

// A node's reply in one sealed-bid dispatch round.
struct Bid {
    NodeId node_id = -1;
    NodeAnnouncement announcement;
    std::optional<Prediction> prediction; // present whenever admitted
    bool admitted = false;
    bool knowledge_backed = false;
};

// score = reliability_weight * success_ratio
//       + completion_weight * (1 - predicted_completion / deadline),
// descending; ties break to the lower offered price, then to the lower
// node id. Only admitted bids are ranked.
std::vector<NodeId> rank_candidates(const std::vector<Bid>& bids, double reliability_weight,
                                    double completion_weight, Duration deadline_s);
std::vector<NodeId> rank_candidates(const std::vector<Bid>& bids, const Job& job);

enum class SchedulerPolicy { Gnm, Random };

struct DispatchAction {
    NodeId node = -1;
    TaskId task = -1;
    Duration transfer_s = 0;
};

// Scheduler-side view of one task's lifecycle.
struct LsTask {
    Task task;
    JobId job_id = -1;
    SimTime submit_s = 0;
    SimTime absolute_deadline_s = 0;
    double reliability_weight = 0;
    double completion_weight = 0;
    std::vector<NodeId> faulted; // nodes that already failed this task
    int attempts = 0;
    bool pending = true;
    bool terminal = false;
    int open_allocation = -1; // index into RunLog::allocations
    int entry_index = -1;     // index into RunLog::tasks
};

// Manages a pool of provider nodes: runs the per-round sealed-bid auction,
// dispatches tasks one-per-node-per-round, and re-iterates failed tasks onto
// replacement nodes while the deadline budget lasts.
class LocalScheduler {
public:
    LocalScheduler(std::string ls_id, std::vector<NodeId> members, SchedulerPolicy policy,
                   std::uint64_t scenario_seed);

    const std::string& id() const { return ls_id_; }
    const std::vector<NodeId>& members() const { return members_; }
    SchedulerPolicy policy() const { return policy_; }

    void submit_job(const Job& job, SimTime now, RunLog& log);

    // One scheduling round over pending tasks; commits admissions on the
    // winning nodes and returns the dispatches for event scheduling.
    std::vector<DispatchAction> dispatch_round(std::span<GnmNode> nodes, SimTime now, RunLog& log);

    // Outcome of a dispatched attempt. A Fail outcome triggers the failure
    // re-iteration auction; the returned dispatch, if any, is the replacement.
    std::optional<DispatchAction> on_attempt_finished(std::span<GnmNode> nodes, TaskId task_id,
                                                      SimTime started_at_s, TaskState outcome,
                                                      SimTime now, RunLog& log);

    // Marks deadline-passed pending tasks as expired.
    void expire_overdue(SimTime now, RunLog& log);

    bool has_pending() const { return pending_count_ > 0; }
    bool task_known(TaskId id) const { return tasks_.count(id) > 0; }
    const LsTask& task(TaskId id) const { return tasks_.at(id); }

    // Non-terminal sibling tasks of a job, for consumer-side cancellation.
    std::vector<TaskId> active_job_tasks(JobId job) const;
    // Marks a still-pending task aborted (cancelled before any dispatch).
    void mark_aborted(TaskId id, SimTime now, RunLog& log);

private:
    struct ProbeResult {
        Bid bid;
        Duration transfer_s = 0;
    };
    ProbeResult probe(GnmNode& node, const LsTask& t, SimTime now) const;
    std::optional<DispatchAction> dispatch_one(std::span<GnmNode> nodes, LsTask& t,
                                               const std::vector<NodeId>& exclude, SimTime now,
                                               RunLog& log, bool record_retry_audit,
                                               double* best_prediction_out);
    rs::DecisionAttr active_attr(const LsTask& t) const;

    std::string ls_id_;
    std::vector<NodeId> members_;
    SchedulerPolicy policy_;
    RngStream rng_; // baseline node picks
    std::map<TaskId, LsTask> tasks_;
    long pending_count_ = 0;
};

struct SubmissionHandle {
    std::string group;
    std::string ls_id;
    SimTime submitted_at_s = 0;
    std::vector<JobId> job_ids;
};

// Thin top-level router: expands a job group and forwards its jobs to the
// named local scheduler via a JobSubmitted event.
class MetaScheduler {
public:
    void register_scheduler(LocalScheduler* ls);
    LocalScheduler* find(const std::string& ls_id);

    SubmissionHandle submit_job_group(Engine& engine, const JobGroupSpec& group,
                                      const std::string& target_ls, SimTime at_s);

    const Job& job(JobId id) const { return jobs_.at(id); }
    const std::map<JobId, Job>& jobs() const { return jobs_; }

private:
    std::vector<LocalScheduler*> schedulers_;
    std::map<JobId, Job> jobs_;
    JobId next_job_id_ = 0;
    TaskId next_task_id_ = 0;
};

} // namespace gridwise
