#pragma once

#include "gridwise/domain.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gridwise {

// One dispatched attempt of a task on a node. Every metric is recomputable
// from these rows plus the task entries.
struct AllocationRecord {
    TaskId task_id = -1;
    JobId job_id = -1;
    int attempt_number = 1; // increments only via failure re-iteration
    NodeId node_id = -1;
    SimTime dispatched_at_s = 0;
    std::optional<TaskState> outcome; // empty while pending/running
    std::optional<SimTime> finished_at_s;
    Duration transfer_s = 0;
    std::optional<SimTime> started_at_s;
    Prediction prediction;      // as returned at admission
    bool knowledge_backed = false; // prediction came from rule-filtered CBR
    bool reiterated = false;    // a successor attempt was dispatched after this one failed
    bool gave_up = false;       // failed with no budget (or no node) to retry
    Duration budget_remaining_s = 0;      // at failure-handling time
    double best_retry_prediction_s = -1;  // min predicted completion offered; <0 none
};

enum class TaskFinal { Success, Fail, Aborted, Expired };
const char* to_string(TaskFinal f);

struct TaskEntry {
    TaskId task_id = -1;
    JobId job_id = -1;
    SimTime submit_s = 0;
    Duration deadline_s = 0; // absolute deadline = submit_s + deadline_s
    int attempts = 0;
    bool terminal = false;
    TaskFinal final = TaskFinal::Expired;
    std::optional<SimTime> finished_at_s;
};

enum class AnnounceCause { Initial, Admission, Completion, UrgentBegin, UrgentEnd, Tick };
const char* to_string(AnnounceCause c);

struct RunLog {
    std::string group;
    std::string ls_id;
    std::string policy; // "gnm" or "random"
    std::uint64_t seed = 0;

    std::vector<AllocationRecord> allocations;
    std::vector<TaskEntry> tasks;

    // announcement-freshness audit counters
    long announce_initial = 0;
    long announce_admission = 0;
    long announce_completion = 0;
    long announce_urgent = 0;
    long announce_tick = 0;
    long admissions = 0;
    long completions = 0; // non-legacy task completions (any terminal state)
    long urgent_edges = 0;

    std::size_t events_processed = 0;
};

} // namespace gridwise
