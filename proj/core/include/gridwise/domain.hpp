#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gridwise {

using SimTime = double;   // seconds since simulation start
using Duration = double;  // seconds
using NodeId = std::int32_t;
using JobId = std::int64_t;
using TaskId = std::int64_t;

enum class Priority { Low, Normal, High };

// Static description of a provider node. Dynamic state lives in GnmNode.
struct NodeSpec {
    NodeId node_id = -1;
    std::string local_scheduler_id;
    double grid_mips = 0;            // CPU rate allocated to grid tasks (MI/s)
    double total_ram_mb = 0;
    double dtr_base = 0;             // data transmission rate, units/s
    double dependability = 1.0;      // P(accepted task runs to completion), in [0,1]
    double standard_price_alpha = 0; // standard price, currency/min
    double price_tolerance_p = 0;    // allowed price variation fraction, in [0, 0.5]
};

struct Task {
    TaskId task_id = -1;
    JobId job_id = -1;
    double length_mi = 0;   // million instructions
    double memory_mb = 0;
    Duration deadline_s = 0; // relative to submission, resolved to absolute at submit
    Priority priority = Priority::Normal;
    double size_units = 0;  // transfer size; defaults to memory_mb when unset
};

struct Job {
    JobId job_id = -1;
    std::string consumer_id;
    std::vector<Task> tasks;
    double reliability_weight = 0;
    double completion_weight = 0;   // the two weights sum to 1
};

// Wait -> Running -> {Success, Fail}; Aborted reachable from Wait or Running.
// Aborted is its own terminal state, not a flavor of Fail: aborted tasks are
// neutral and stay out of the success-ratio denominator.
enum class TaskState { Wait, Running, Success, Fail, Aborted };

bool is_terminal(TaskState s);
bool can_transition(TaskState from, TaskState to);

// One row of a node's local history table; the decision-table row consumed by
// the rough-set analyzer and the case base.
struct TaskRecord {
    TaskId task_id = -1;
    double cpu_load_at_submit = 0;
    double free_ram_at_submit_mb = 0;
    double task_size_mi = 0;
    Priority priority = Priority::Normal;
    int waiting_grid_tasks = 0;
    double dtr_at_submit = 0;
    std::optional<SimTime> start_time_s;
    std::optional<Duration> spent_time_s;
    std::optional<Duration> completion_time_s; // present iff final_state == Success
    TaskState final_state = TaskState::Wait;
    std::optional<double> cost_price;
};

struct NodeAnnouncement {
    NodeId node_id = -1;
    bool accepting = true;
    SimTime non_accept_until_s = 0; // availability horizon; > issued_at when not accepting
    double success_ratio = 1.0;
    Duration act_s = 0;             // mean completion time over successful tasks
    bool act_has_data = false;      // false when the node has no successes yet
    double avg_cpu_idle = 1.0;
    double avg_free_ram_mb = 0;
    double offered_price = 0;       // within [alpha*(1-p), alpha*(1+p)]
    SimTime issued_at_s = 0;
};

struct Prediction {
    TaskState predicted_state = TaskState::Success; // Success or Fail only
    Duration predicted_completion_s = 0;
    double predicted_cost = 0;
    double confidence = 0; // in [0,1]; 0 iff the training set was empty
};

// One row of the local-scheduler description table.
struct LocalSchedulerSpec {
    std::string ls_id;
    int node_count = 0;
    double gmips = 0;
    Duration queue_deadline_status_s = 0; // consumed as initial backlog mean
    double medium_dependability = 1.0;    // population median dependability
};

// One row of the job-group table; expands to job_count jobs splitting
// total_tasks identical tasks.
struct JobGroupSpec {
    std::string name;
    int job_count = 0;
    int total_tasks = 0;
    Duration deadline_s = 0;
    double memory_mb = 0;
    double length_mi = 0;
    double reliability_weight = 0;
    double completion_weight = 0;
};

struct Violation {
    std::string path;    // e.g. "local_schedulers[1].medium_dependability"
    std::string message;
};

// Collects every invariant violation instead of stopping at the first.
// An empty result means the scenario is valid.
std::vector<Violation> validate_scenario(const std::vector<LocalSchedulerSpec>& ls_specs,
                                         const std::vector<JobGroupSpec>& jg_specs);

// Clamps a raw price strictly inside (alpha*(1-p), alpha*(1+p)); returns alpha
// exactly when p is zero (degenerate tolerance).
double clamp_offered_price(double alpha, double p, double raw_price);

const char* to_string(Priority p);
const char* to_string(TaskState s);
std::optional<Priority> priority_from_string(const std::string& s);
std::optional<TaskState> task_state_from_string(const std::string& s);

} // namespace gridwise
