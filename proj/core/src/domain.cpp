#include "gridwise/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gridwise {

bool is_terminal(TaskState s) {
    return s == TaskState::Success || s == TaskState::Fail || s == TaskState::Aborted;
}

bool can_transition(TaskState from, TaskState to) {
    switch (from) {
    case TaskState::Wait:
        return to == TaskState::Running || to == TaskState::Aborted;
    case TaskState::Running:
        return to == TaskState::Success || to == TaskState::Fail || to == TaskState::Aborted;
    case TaskState::Success:
    case TaskState::Fail:
    case TaskState::Aborted:
        return false;
    }
    return false;
}

double clamp_offered_price(double alpha, double p, double raw_price) {
    if (p < 1e-9)
        return alpha;
    const double eps = 1e-9 * alpha;
    const double lo = alpha * (1.0 - p) + eps;
    const double hi = alpha * (1.0 + p) - eps;
    return std::min(std::max(raw_price, lo), hi);
}

const char* to_string(Priority p) {
    switch (p) {
    case Priority::Low: return "Low";
    case Priority::Normal: return "Normal";
    case Priority::High: return "High";
    }
    return "?";
}

const char* to_string(TaskState s) {
    switch (s) {
    case TaskState::Wait: return "Wait";
    case TaskState::Running: return "Running";
    case TaskState::Success: return "Success";
    case TaskState::Fail: return "Fail";
    case TaskState::Aborted: return "Aborted";
    }
    return "?";
}

std::optional<Priority> priority_from_string(const std::string& s) {
    if (s == "Low") return Priority::Low;
    if (s == "Normal") return Priority::Normal;
    if (s == "High") return Priority::High;
    return std::nullopt;
}

std::optional<TaskState> task_state_from_string(const std::string& s) {
    if (s == "Wait") return TaskState::Wait;
    if (s == "Running") return TaskState::Running;
    if (s == "Success") return TaskState::Success;
    if (s == "Fail") return TaskState::Fail;
    if (s == "Aborted") return TaskState::Aborted;
    return std::nullopt;
}

namespace {

std::string idx_path(const char* array, std::size_t i, const char* field) {
    std::ostringstream os;
    os << array << '[' << i << "]." << field;
    return os.str();
}

void require(std::vector<Violation>& out, bool ok, std::string path, std::string msg) {
    if (!ok)
        out.push_back({std::move(path), std::move(msg)});
}

} // namespace

std::vector<Violation> validate_scenario(const std::vector<LocalSchedulerSpec>& ls_specs,
                                         const std::vector<JobGroupSpec>& jg_specs) {
    std::vector<Violation> v;

    std::vector<std::string> seen_ls;
    for (std::size_t i = 0; i < ls_specs.size(); ++i) {
        const auto& ls = ls_specs[i];
        require(v, !ls.ls_id.empty(), idx_path("local_schedulers", i, "ls_id"), "identifier is empty");
        if (!ls.ls_id.empty()) {
            bool dup = std::find(seen_ls.begin(), seen_ls.end(), ls.ls_id) != seen_ls.end();
            require(v, !dup, idx_path("local_schedulers", i, "ls_id"), "duplicate identifier '" + ls.ls_id + "'");
            seen_ls.push_back(ls.ls_id);
        }
        require(v, ls.node_count > 0, idx_path("local_schedulers", i, "node_count"), "must be > 0");
        require(v, ls.gmips > 0, idx_path("local_schedulers", i, "gmips"), "must be > 0");
        require(v, ls.queue_deadline_status_s >= 0,
                idx_path("local_schedulers", i, "queue_deadline_status_s"), "must be >= 0");
        require(v, ls.medium_dependability >= 0.0 && ls.medium_dependability <= 1.0,
                idx_path("local_schedulers", i, "medium_dependability"), "dependability \xE2\x88\x89 [0,1]");
    }

    std::vector<std::string> seen_jg;
    for (std::size_t i = 0; i < jg_specs.size(); ++i) {
        const auto& jg = jg_specs[i];
        require(v, !jg.name.empty(), idx_path("job_groups", i, "name"), "identifier is empty");
        if (!jg.name.empty()) {
            bool dup = std::find(seen_jg.begin(), seen_jg.end(), jg.name) != seen_jg.end();
            require(v, !dup, idx_path("job_groups", i, "name"), "duplicate identifier '" + jg.name + "'");
            seen_jg.push_back(jg.name);
        }
        require(v, jg.job_count > 0, idx_path("job_groups", i, "job_count"), "must be > 0");
        require(v, jg.total_tasks > 0, idx_path("job_groups", i, "total_tasks"), "must be > 0");
        require(v, jg.total_tasks >= jg.job_count, idx_path("job_groups", i, "total_tasks"),
                "fewer tasks than jobs leaves a job with no tasks");
        require(v, jg.deadline_s > 0, idx_path("job_groups", i, "deadline_s"), "must be > 0");
        require(v, jg.memory_mb > 0, idx_path("job_groups", i, "memory_mb"), "must be > 0");
        require(v, jg.length_mi > 0, idx_path("job_groups", i, "length_mi"), "must be > 0");
        require(v, jg.reliability_weight >= 0.0 && jg.reliability_weight <= 1.0,
                idx_path("job_groups", i, "reliability_weight"), "must be in [0,1]");
        require(v, jg.completion_weight >= 0.0 && jg.completion_weight <= 1.0,
                idx_path("job_groups", i, "completion_weight"), "must be in [0,1]");
        require(v, std::fabs(jg.reliability_weight + jg.completion_weight - 1.0) <= 1e-9,
                idx_path("job_groups", i, "reliability_weight"),
                "reliability_weight + completion_weight must equal 1");
    }

    return v;
}

} // namespace gridwise
