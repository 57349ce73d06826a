#pragma once

#include "gridwise/runlog.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gridwise::metrics {

// Success tasks over total tasks of the run (successes are audited elsewhere
// to have finished within their deadline).
double completion_ratio(const RunLog& log);

// Fraction of CBR-backed dispatched attempts whose predicted state matched
// the attempt's terminal state; aborted attempts are excluded. nullopt when
// no attempt carried a prediction.
std::optional<double> prediction_accuracy(const RunLog& log);

struct IterationStats {
    long total_reiterations = 0;
    long give_ups = 0;
    int max_attempts = 0;
};
IterationStats iteration_stats(const RunLog& log);

// Timeline decomposition of each Success task:
// selection + transfer + execution = finish - submit, slack = deadline - finish.
struct OverheadRow {
    TaskId task_id = -1;
    double selection_s = 0; // waiting at the scheduler, across rounds and attempts
    double transfer_s = 0;  // sum over attempts
    double execution_s = 0; // node residency (queue wait + run), sum over attempts
    double slack_s = 0;
};
std::vector<OverheadRow> overhead_accounting(const RunLog& log);

struct RunMetrics {
    std::string group;
    std::string ls_id;
    std::string policy;
    std::uint64_t seed = 0;
    long tasks_total = 0;
    long tasks_success = 0;
    long tasks_failed = 0;
    long tasks_aborted = 0;
    long tasks_expired = 0;
    double completion = 0;
    std::optional<double> prediction_accuracy;
    IterationStats iterations;
    double mean_selection_s = 0;
    double mean_transfer_s = 0;
    double mean_execution_s = 0;
    double mean_slack_s = 0;
};
RunMetrics compute(const RunLog& log);

struct Aggregate {
    double mean = 0;
    double stddev = 0; // sample standard deviation
    long n = 0;
};
Aggregate aggregate(const std::vector<double>& xs);

std::string metrics_csv(const std::vector<RunMetrics>& rows);
std::string allocations_csv(const std::vector<RunLog>& logs);
std::string summary_json(const std::vector<RunMetrics>& rows);
std::string long_csv(const std::vector<RunMetrics>& rows);

} // namespace gridwise::metrics
