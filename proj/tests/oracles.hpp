#pragma once

// Test-side oracles, kept independent of the library implementations they
// check: plain O(n^2) definitions and full sorts.

#include "gridwise/cbr.hpp"
#include "gridwise/domain.hpp"
#include "gridwise/engine.hpp"
#include "gridwise/roughset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace oracles {

using gridwise::TaskRecord;
using gridwise::TaskState;
namespace rs = gridwise::rs;

// pairwise-equality grouping on the projected columns
inline std::vector<std::vector<int>> brute_partition(const rs::DecisionTable& t,
                                                     const std::vector<int>& attrs) {
    const int n = static_cast<int>(t.row_count());
    std::vector<std::vector<int>> blocks;
    std::vector<bool> placed(n, false);
    for (int i = 0; i < n; ++i) {
        if (placed[i])
            continue;
        std::vector<int> block{i};
        placed[i] = true;
        for (int j = i + 1; j < n; ++j) {
            if (placed[j])
                continue;
            bool equal = true;
            for (int a : attrs)
                if (t.rows[i][a] != t.rows[j][a]) { equal = false; break; }
            if (equal) {
                block.push_back(j);
                placed[j] = true;
            }
        }
        blocks.push_back(std::move(block));
    }
    return blocks;
}

inline bool rows_equal_full(const rs::DecisionTable& t, int i, int j) {
    for (std::size_t a = 0; a < t.condition_fields.size(); ++a)
        if (t.rows[i][a] != t.rows[j][a])
            return false;
    return true;
}

// r is in the lower approximation iff every indiscernible row (r included)
// is in the concept
inline std::vector<int> brute_lower(const rs::DecisionTable& t, const std::vector<int>& concept_rows) {
    const std::set<int> c(concept_rows.begin(), concept_rows.end());
    std::vector<int> out;
    const int n = static_cast<int>(t.row_count());
    for (int r = 0; r < n; ++r) {
        bool all_in = true;
        for (int s = 0; s < n; ++s)
            if (rows_equal_full(t, r, s) && !c.count(s)) { all_in = false; break; }
        if (all_in)
            out.push_back(r);
    }
    return out;
}

// r is in the upper approximation iff some indiscernible row is in the concept
inline std::vector<int> brute_upper(const rs::DecisionTable& t, const std::vector<int>& concept_rows) {
    const std::set<int> c(concept_rows.begin(), concept_rows.end());
    std::vector<int> out;
    const int n = static_cast<int>(t.row_count());
    for (int r = 0; r < n; ++r) {
        for (int s = 0; s < n; ++s) {
            if (rows_equal_full(t, r, s) && c.count(s)) {
                out.push_back(r);
                break;
            }
        }
    }
    return out;
}

// random discretized table, <= max_rows x max_attrs, values in [0, max_values)
inline rs::DecisionTable random_table(gridwise::RngStream& rng, int max_rows = 8,
                                      int max_attrs = 4, int max_values = 3) {
    rs::DecisionTable t;
    const int rows = 1 + static_cast<int>(rng.uniform_int(max_rows));
    const int attrs = 1 + static_cast<int>(rng.uniform_int(max_attrs));
    for (int a = 0; a < attrs; ++a)
        t.condition_fields.push_back(static_cast<rs::Field>(a));
    t.decision_field = rs::Field::FinalStatus;
    for (int r = 0; r < rows; ++r) {
        std::vector<rs::Code> row;
        for (int a = 0; a < attrs; ++a)
            row.push_back(static_cast<rs::Code>(rng.uniform_int(max_values)));
        t.rows.push_back(std::move(row));
        t.decisions.push_back(static_cast<rs::Code>(rng.uniform_int(max_values)));
    }
    return t;
}

// full-sort nearest neighbors with its own similarity computation
struct OracleNeighbor {
    int index;
    double sim;
};

inline std::vector<OracleNeighbor> knn_oracle(const gridwise::cbr::CaseBase& base,
                                              const std::vector<int>& training,
                                              const gridwise::cbr::QueryCase& q, int k) {
    auto attrs_of = [](const TaskRecord& r) {
        return std::vector<double>{r.cpu_load_at_submit,
                                   r.free_ram_at_submit_mb,
                                   r.task_size_mi,
                                   static_cast<double>(static_cast<int>(r.priority)),
                                   static_cast<double>(r.waiting_grid_tasks),
                                   r.dtr_at_submit};
    };
    const std::vector<double> qa{q.cpu_load,
                                 q.free_ram_mb,
                                 q.size_mi,
                                 static_cast<double>(static_cast<int>(q.priority)),
                                 static_cast<double>(q.waiting),
                                 q.dtr};
    const std::vector<bool> categorical{false, false, false, true, false, false};

    std::vector<double> lo(6, 0), hi(6, 0);
    bool first = true;
    for (int idx : training) {
        const auto a = attrs_of(base.at(idx));
        for (int i = 0; i < 6; ++i) {
            if (first || a[i] < lo[i]) lo[i] = a[i];
            if (first || a[i] > hi[i]) hi[i] = a[i];
        }
        first = false;
    }

    std::vector<OracleNeighbor> all;
    for (int idx : training) {
        const auto a = attrs_of(base.at(idx));
        double dist = 0;
        for (int i = 0; i < 6; ++i) {
            if (categorical[i])
                dist += a[i] != qa[i] ? 1.0 : 0.0;
            else {
                const double width = hi[i] - lo[i];
                dist += width > 0 ? std::min(1.0, std::fabs(a[i] - qa[i]) / width) : 0.0;
            }
        }
        all.push_back({idx, 1.0 - dist / 6.0});
    }
    std::sort(all.begin(), all.end(), [](const OracleNeighbor& a, const OracleNeighbor& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        return a.index > b.index;
    });
    if (static_cast<int>(all.size()) > k)
        all.resize(k);
    return all;
}

// random finished record with plausible field ranges
inline TaskRecord random_record(gridwise::RngStream& rng, long id) {
    TaskRecord r;
    r.task_id = id;
    r.cpu_load_at_submit = rng.uniform();
    r.free_ram_at_submit_mb = rng.uniform(16.0, 512.0);
    r.task_size_mi = rng.uniform(1000.0, 90000.0);
    r.priority = static_cast<gridwise::Priority>(rng.uniform_int(3));
    r.waiting_grid_tasks = static_cast<int>(rng.uniform_int(12));
    r.dtr_at_submit = rng.uniform(0.2, 3.0);
    const double roll = rng.uniform();
    if (roll < 0.6) {
        r.final_state = TaskState::Success;
        r.spent_time_s = rng.uniform(10.0, 1500.0);
        r.completion_time_s = *r.spent_time_s + rng.uniform(0.0, 800.0);
        r.cost_price = rng.uniform(0.5, 300.0);
    } else if (roll < 0.9) {
        r.final_state = TaskState::Fail;
        r.spent_time_s = rng.uniform(1.0, 900.0);
    } else {
        r.final_state = TaskState::Aborted;
    }
    return r;
}

// two-pass recomputation of the announcer statistics, long double accumulation
struct TwoPassStats {
    double success_ratio;
    bool ratio_has_data;
    double act;
    bool act_has_data;
};

inline TwoPassStats two_pass_stats(const std::vector<TaskRecord>& records) {
    long ns = 0, nf = 0, ok = 0;
    for (const auto& r : records) {
        if (r.final_state == TaskState::Success) ++ns;
        if (r.final_state == TaskState::Fail) ++nf;
        if (r.final_state == TaskState::Success && r.completion_time_s) ++ok;
    }
    long double sum = 0;
    for (const auto& r : records)
        if (r.final_state == TaskState::Success && r.completion_time_s)
            sum += *r.completion_time_s;
    TwoPassStats s{};
    s.ratio_has_data = ns + nf > 0;
    s.success_ratio = s.ratio_has_data ? static_cast<double>(ns) / (ns + nf) : 1.0;
    s.act_has_data = ok > 0;
    s.act = ok > 0 ? static_cast<double>(sum / ok) : 0.0;
    return s;
}

} // namespace oracles
