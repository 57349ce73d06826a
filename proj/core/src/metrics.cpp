#include "gridwise/metrics.hpp"

#include "csvfmt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

namespace gridwise::metrics {

double completion_ratio(const RunLog& log) {
    if (log.tasks.empty())
        return 0;
    long success = 0;
    for (const auto& t : log.tasks)
        if (t.terminal && t.final == TaskFinal::Success)
            ++success;
    return static_cast<double>(success) / static_cast<double>(log.tasks.size());
}

std::optional<double> prediction_accuracy(const RunLog& log) {
    long considered = 0;
    long correct = 0;
    for (const auto& a : log.allocations) {
        if (!a.knowledge_backed || !a.outcome)
            continue;
        if (*a.outcome == TaskState::Aborted)
            continue; // neutral
        ++considered;
        if (a.prediction.predicted_state == *a.outcome)
            ++correct;
    }
    if (considered == 0)
        return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(considered);
}

IterationStats iteration_stats(const RunLog& log) {
    IterationStats s;
    for (const auto& a : log.allocations) {
        if (a.reiterated)
            ++s.total_reiterations;
        if (a.gave_up)
            ++s.give_ups;
        s.max_attempts = std::max(s.max_attempts, a.attempt_number);
    }
    return s;
}

std::vector<OverheadRow> overhead_accounting(const RunLog& log) {
    std::map<TaskId, std::vector<const AllocationRecord*>> by_task;
    for (const auto& a : log.allocations)
        by_task[a.task_id].push_back(&a);

    std::vector<OverheadRow> rows;
    for (const auto& t : log.tasks) {
        if (!t.terminal || t.final != TaskFinal::Success || !t.finished_at_s)
            continue;
        OverheadRow row;
        row.task_id = t.task_id;
        auto it = by_task.find(t.task_id);
        if (it != by_task.end()) {
            for (const AllocationRecord* a : it->second) {
                row.transfer_s += a->transfer_s;
                if (a->finished_at_s)
                    row.execution_s += *a->finished_at_s - (a->dispatched_at_s + a->transfer_s);
            }
        }
        const double total = *t.finished_at_s - t.submit_s;
        row.selection_s = total - row.transfer_s - row.execution_s;
        row.slack_s = (t.submit_s + t.deadline_s) - *t.finished_at_s;
        rows.push_back(row);
    }
    return rows;
}

RunMetrics compute(const RunLog& log) {
    RunMetrics m;
    m.group = log.group;
    m.ls_id = log.ls_id;
    m.policy = log.policy;
    m.seed = log.seed;
    m.tasks_total = static_cast<long>(log.tasks.size());
    for (const auto& t : log.tasks) {
        if (!t.terminal)
            continue;
        switch (t.final) {
        case TaskFinal::Success: ++m.tasks_success; break;
        case TaskFinal::Fail: ++m.tasks_failed; break;
        case TaskFinal::Aborted: ++m.tasks_aborted; break;
        case TaskFinal::Expired: ++m.tasks_expired; break;
        }
    }
    m.completion = completion_ratio(log);
    m.prediction_accuracy = prediction_accuracy(log);
    m.iterations = iteration_stats(log);

    const auto rows = overhead_accounting(log);
    if (!rows.empty()) {
        for (const auto& r : rows) {
            m.mean_selection_s += r.selection_s;
            m.mean_transfer_s += r.transfer_s;
            m.mean_execution_s += r.execution_s;
            m.mean_slack_s += r.slack_s;
        }
        const double n = static_cast<double>(rows.size());
        m.mean_selection_s /= n;
        m.mean_transfer_s /= n;
        m.mean_execution_s /= n;
        m.mean_slack_s /= n;
    }
    return m;
}

Aggregate aggregate(const std::vector<double>& xs) {
    Aggregate a;
    a.n = static_cast<long>(xs.size());
    if (a.n == 0)
        return a;
    double sum = 0;
    for (double x : xs)
        sum += x;
    a.mean = sum / static_cast<double>(a.n);
    if (a.n >= 2) {
        double ss = 0;
        for (double x : xs)
            ss += (x - a.mean) * (x - a.mean);
        a.stddev = std::sqrt(ss / static_cast<double>(a.n - 1));
    }
    return a;
}

std::string metrics_csv(const std::vector<RunMetrics>& rows) {
    std::ostringstream os;
    os << "group,ls,policy,seed,tasks_total,tasks_success,tasks_failed,tasks_aborted,"
          "tasks_expired,completion_ratio,prediction_accuracy,reiterations,give_ups,"
          "max_attempts,mean_selection_s,mean_transfer_s,mean_execution_s,mean_slack_s\n";
    for (const auto& m : rows) {
        os << m.group << ',' << m.ls_id << ',' << m.policy << ',' << m.seed << ','
           << m.tasks_total << ',' << m.tasks_success << ',' << m.tasks_failed << ','
           << m.tasks_aborted << ',' << m.tasks_expired << ','
           << detail::fmt_double(m.completion) << ','
           << (m.prediction_accuracy ? detail::fmt_double(*m.prediction_accuracy) : std::string())
           << ',' << m.iterations.total_reiterations << ',' << m.iterations.give_ups << ','
           << m.iterations.max_attempts << ',' << detail::fmt_double(m.mean_selection_s) << ','
           << detail::fmt_double(m.mean_transfer_s) << ',' << detail::fmt_double(m.mean_execution_s)
           << ',' << detail::fmt_double(m.mean_slack_s) << '\n';
    }
    return os.str();
}

std::string allocations_csv(const std::vector<RunLog>& logs) {
    std::ostringstream os;
    os << "group,ls,policy,seed,task_id,job_id,attempt,node_id,dispatched_at,outcome,finished_at\n";
    for (const auto& log : logs) {
        for (const auto& a : log.allocations) {
            os << log.group << ',' << log.ls_id << ',' << log.policy << ',' << log.seed << ','
               << a.task_id << ',' << a.job_id << ',' << a.attempt_number << ',' << a.node_id << ','
               << detail::fmt_double(a.dispatched_at_s) << ','
               << (a.outcome ? to_string(*a.outcome) : "pending") << ','
               << (a.finished_at_s ? detail::fmt_double(*a.finished_at_s) : std::string()) << '\n';
        }
    }
    return os.str();
}

std::string summary_json(const std::vector<RunMetrics>& rows) {
    using json = nlohmann::ordered_json;
    // group x ls x policy, seeds aggregated
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<const RunMetrics*>> cells;
    for (const auto& m : rows)
        cells[{m.group, m.ls_id, m.policy}].push_back(&m);

    json out = json::array();
    for (const auto& [key, ms] : cells) {
        std::vector<double> completion, accuracy;
        long reiterations = 0, give_ups = 0;
        for (const RunMetrics* m : ms) {
            completion.push_back(m->completion);
            if (m->prediction_accuracy)
                accuracy.push_back(*m->prediction_accuracy);
            reiterations += m->iterations.total_reiterations;
            give_ups += m->iterations.give_ups;
        }
        const Aggregate comp = aggregate(completion);
        json cell;
        cell["group"] = std::get<0>(key);
        cell["ls"] = std::get<1>(key);
        cell["policy"] = std::get<2>(key);
        cell["replications"] = comp.n;
        cell["completion_ratio_mean"] = comp.mean;
        cell["completion_ratio_stddev"] = comp.stddev;
        if (!accuracy.empty()) {
            const Aggregate acc = aggregate(accuracy);
            cell["prediction_accuracy_mean"] = acc.mean;
            cell["prediction_accuracy_stddev"] = acc.stddev;
        }
        cell["total_reiterations"] = reiterations;
        cell["total_give_ups"] = give_ups;
        out.push_back(std::move(cell));
    }
    return out.dump(2) + "\n";
}

std::string long_csv(const std::vector<RunMetrics>& rows) {
    std::ostringstream os;
    os << "group,ls,policy,seed,metric,value\n";
    auto emit = [&](const RunMetrics& m, const char* name, double v) {
        os << m.group << ',' << m.ls_id << ',' << m.policy << ',' << m.seed << ',' << name << ','
           << detail::fmt_double(v) << '\n';
    };
    for (const auto& m : rows) {
        emit(m, "completion_ratio", m.completion);
        if (m.prediction_accuracy)
            emit(m, "prediction_accuracy", *m.prediction_accuracy);
        emit(m, "reiterations", static_cast<double>(m.iterations.total_reiterations));
        emit(m, "give_ups", static_cast<double>(m.iterations.give_ups));
        emit(m, "max_attempts", static_cast<double>(m.iterations.max_attempts));
        emit(m, "mean_selection_s", m.mean_selection_s);
        emit(m, "mean_transfer_s", m.mean_transfer_s);
        emit(m, "mean_execution_s", m.mean_execution_s);
        emit(m, "mean_slack_s", m.mean_slack_s);
    }
    return os.str();
}

} // namespace gridwise::metrics
