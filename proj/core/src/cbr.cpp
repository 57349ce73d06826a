#include "gridwise/cbr.hpp"

#include "csvfmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gridwise::cbr {

void CaseBase::retain(const TaskRecord& finished) {
    if (!is_terminal(finished.final_state))
        throw std::invalid_argument("retain: record state is not terminal");
    cases_.push_back(finished);
    if (disc_)
        coded_.push_back(disc_->code_record(finished));
}

void CaseBase::recode(const rs::Discretization& disc) {
    disc_ = disc;
    coded_.clear();
    coded_.reserve(cases_.size());
    for (const auto& c : cases_)
        coded_.push_back(disc_->code_record(c));
}

std::string CaseBase::to_csv() const {
    std::ostringstream os;
    os << "task_id,cpu_load,free_ram_mb,task_size_mi,priority,waiting,dtr,"
          "start_time_s,spent_time_s,completion_time_s,final_state,cost_price\n";
    for (const auto& r : cases_) {
        os << r.task_id << ',' << detail::fmt_double(r.cpu_load_at_submit) << ','
           << detail::fmt_double(r.free_ram_at_submit_mb) << ','
           << detail::fmt_double(r.task_size_mi) << ',' << to_string(r.priority) << ','
           << r.waiting_grid_tasks << ',' << detail::fmt_double(r.dtr_at_submit) << ','
           << detail::fmt_opt(r.start_time_s) << ',' << detail::fmt_opt(r.spent_time_s) << ','
           << detail::fmt_opt(r.completion_time_s) << ',' << to_string(r.final_state) << ','
           << detail::fmt_opt(r.cost_price) << '\n';
    }
    return os.str();
}

std::array<rs::Code, rs::kConditionFieldCount> code_query(const rs::Discretization& disc,
                                                          const QueryCase& query) {
    using rs::Field;
    std::array<rs::Code, rs::kConditionFieldCount> c{};
    c[static_cast<int>(Field::CpuLoad)] = disc.code_continuous(Field::CpuLoad, query.cpu_load);
    c[static_cast<int>(Field::FreeRam)] = disc.code_continuous(Field::FreeRam, query.free_ram_mb);
    c[static_cast<int>(Field::TaskSize)] = disc.code_continuous(Field::TaskSize, query.size_mi);
    c[static_cast<int>(Field::Priority)] = rs::Discretization::priority_code(query.priority);
    c[static_cast<int>(Field::Waiting)] = disc.code_continuous(Field::Waiting, query.waiting);
    c[static_cast<int>(Field::Dtr)] = disc.code_continuous(Field::Dtr, query.dtr);
    return c;
}

Retrieval retrieve(const CaseBase& base, const rs::RuleModel& model, rs::DecisionAttr active,
                   const QueryCase& query) {
    Retrieval out;
    if (base.empty())
        return out;
    if (!base.has_codes()) {
        // codes not in step with the model; degrade to the declared fallback
        out.fallback = true;
        out.case_indices.resize(base.size());
        for (std::size_t i = 0; i < base.size(); ++i)
            out.case_indices[i] = static_cast<int>(i);
        return out;
    }

    const auto qcodes = code_query(model.disc, query);
    const auto& matrix = model.matrix_for(active);

    // a rule can fire only if every condition is on an attribute the query
    // knows (outcome-class conditions cannot be evaluated for a new task)
    std::vector<const rs::Rule*> fired;
    for (const auto& rule : matrix.rules) {
        bool applicable = true;
        for (const auto& [field, value] : rule.conditions) {
            const int fi = static_cast<int>(field);
            if (fi >= rs::kConditionFieldCount || qcodes[fi] != value) {
                applicable = false;
                break;
            }
        }
        if (applicable)
            fired.push_back(&rule);
    }

    if (fired.empty()) {
        out.fallback = true;
        out.case_indices.resize(base.size());
        for (std::size_t i = 0; i < base.size(); ++i)
            out.case_indices[i] = static_cast<int>(i);
        return out;
    }

    const auto& codes = base.codes();
    for (std::size_t i = 0; i < codes.size(); ++i) {
        for (const rs::Rule* rule : fired) {
            if (rule->matches(codes[i])) {
                out.case_indices.push_back(static_cast<int>(i));
                break;
            }
        }
    }
    return out;
}

double similarity(std::span<const double> a, std::span<const double> b,
                  std::span<const AttrRange> ranges, std::span<const bool> categorical) {
    if (a.size() != b.size() || a.size() != ranges.size() || a.size() != categorical.size())
        throw std::invalid_argument("similarity: attribute schemas differ");
    if (a.empty())
        return 1.0;
    double total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double dist;
        const bool a_absent = std::isnan(a[i]);
        const bool b_absent = std::isnan(b[i]);
        if (a_absent || b_absent) {
            dist = (a_absent && b_absent) ? 0.0 : 1.0;
        } else if (categorical[i]) {
            dist = (a[i] != b[i]) ? 1.0 : 0.0;
        } else {
            const double width = ranges[i].hi - ranges[i].lo;
            dist = width > 0 ? std::min(1.0, std::fabs(a[i] - b[i]) / width) : 0.0;
        }
        total += dist;
    }
    return 1.0 - total / static_cast<double>(a.size());
}

namespace {

constexpr std::size_t kQueryAttrs = 6;

std::array<double, kQueryAttrs> query_attrs(const QueryCase& q) {
    return {q.cpu_load, q.free_ram_mb, q.size_mi, static_cast<double>(static_cast<int>(q.priority)),
            static_cast<double>(q.waiting), q.dtr};
}

std::array<double, kQueryAttrs> case_attrs(const TaskRecord& r) {
    return {r.cpu_load_at_submit, r.free_ram_at_submit_mb, r.task_size_mi,
            static_cast<double>(static_cast<int>(r.priority)),
            static_cast<double>(r.waiting_grid_tasks), r.dtr_at_submit};
}

constexpr std::array<bool, kQueryAttrs> kCategorical = {false, false, false, true, false, false};

} // namespace

std::vector<Neighbor> nearest_neighbors(const CaseBase& base, const std::vector<int>& training,
                                        const QueryCase& query, int k) {
    if (k < 1)
        throw std::invalid_argument("nearest_neighbors: k must be >= 1");

    // ranges over the training population
    std::array<AttrRange, kQueryAttrs> ranges{};
    bool first = true;
    for (int idx : training) {
        const auto attrs = case_attrs(base.at(idx));
        for (std::size_t i = 0; i < kQueryAttrs; ++i) {
            if (first || attrs[i] < ranges[i].lo) ranges[i].lo = attrs[i];
            if (first || attrs[i] > ranges[i].hi) ranges[i].hi = attrs[i];
        }
        first = false;
    }

    const auto qa = query_attrs(query);
    std::vector<Neighbor> all;
    all.reserve(training.size());
    for (int idx : training) {
        const auto ca = case_attrs(base.at(idx));
        all.push_back({idx, similarity(qa, ca, ranges, kCategorical)});
    }
    // ties in similarity break toward the newer (higher-index) case
    std::sort(all.begin(), all.end(), [](const Neighbor& x, const Neighbor& y) {
        if (x.sim != y.sim) return x.sim > y.sim;
        return x.case_index > y.case_index;
    });
    if (all.size() > static_cast<std::size_t>(k))
        all.resize(static_cast<std::size_t>(k));
    return all;
}

Prediction predict(const CaseBase& base, const std::vector<int>& training, const QueryCase& query,
                   int k) {
    Prediction p;
    p.predicted_state = TaskState::Success; // optimistic default
    p.predicted_completion_s = query.deadline_s > 0 ? query.deadline_s : 1.0;
    p.predicted_cost = 0;
    p.confidence = 0;
    if (training.empty())
        return p;

    const auto neighbors = nearest_neighbors(base, training, query, k);

    int success_votes = 0;
    int fail_votes = 0;
    double sim_sum = 0;
    for (const auto& n : neighbors) {
        sim_sum += n.sim;
        switch (base.at(n.case_index).final_state) {
        case TaskState::Success: ++success_votes; break;
        case TaskState::Fail: ++fail_votes; break;
        default: break; // aborted neighbors are neutral
        }
    }
    const int votes = success_votes + fail_votes;
    p.predicted_state = (success_votes >= fail_votes) ? TaskState::Success : TaskState::Fail;
    const double majority_share =
        votes > 0 ? static_cast<double>(std::max(success_votes, fail_votes)) / votes : 0.0;
    const double mean_sim = sim_sum / static_cast<double>(neighbors.size());

    // completion/cost from successful evidence: neighbors first, then the
    // whole training set, else the query deadline as a pessimistic stand-in
    auto weighted_mean = [&](auto getter, const std::vector<Neighbor>& pool,
                             bool* found) -> double {
        double num = 0, den = 0, plain = 0;
        int cnt = 0;
        for (const auto& n : pool) {
            const auto& rec = base.at(n.case_index);
            if (rec.final_state != TaskState::Success)
                continue;
            const auto v = getter(rec);
            if (!v)
                continue;
            num += n.sim * *v;
            den += n.sim;
            plain += *v;
            ++cnt;
        }
        *found = cnt > 0;
        if (cnt == 0)
            return 0;
        return den > 0 ? num / den : plain / cnt;
    };

    std::vector<Neighbor> whole;
    auto ensure_whole = [&]() -> const std::vector<Neighbor>& {
        if (whole.empty()) {
            whole.reserve(training.size());
            for (int idx : training)
                whole.push_back({idx, 1.0});
        }
        return whole;
    };

    bool found = false;
    double completion = weighted_mean([](const TaskRecord& r) { return r.completion_time_s; },
                                      neighbors, &found);
    if (!found)
        completion = weighted_mean([](const TaskRecord& r) { return r.completion_time_s; },
                                   ensure_whole(), &found);
    if (found && completion > 0)
        p.predicted_completion_s = completion;

    bool cost_found = false;
    double cost = weighted_mean([](const TaskRecord& r) { return r.cost_price; }, neighbors,
                                &cost_found);
    if (!cost_found)
        cost = weighted_mean([](const TaskRecord& r) { return r.cost_price; }, ensure_whole(),
                             &cost_found);
    if (cost_found)
        p.predicted_cost = cost;

    // non-empty evidence never reports exactly zero confidence
    p.confidence = std::max(majority_share * mean_sim, 1e-9);
    return p;
}

} // namespace gridwise::cbr
