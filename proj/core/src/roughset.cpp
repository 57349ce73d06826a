#include "gridwise/roughset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gridwise::rs {

const char* to_string(Field f) {
    switch (f) {
    case Field::CpuLoad: return "cpu_load";
    case Field::FreeRam: return "free_ram";
    case Field::TaskSize: return "task_size";
    case Field::Priority: return "priority";
    case Field::Waiting: return "waiting";
    case Field::Dtr: return "dtr";
    case Field::FinalStatus: return "final_status";
    case Field::CompletionClass: return "completion_class";
    case Field::CostClass: return "cost_class";
    }
    return "?";
}

const char* to_string(DecisionAttr a) {
    switch (a) {
    case DecisionAttr::FinalStatus: return "FinalStatus";
    case DecisionAttr::CompletionTimeClass: return "CompletionTimeClass";
    case DecisionAttr::CostPriceClass: return "CostPriceClass";
    }
    return "?";
}

Field decision_field(DecisionAttr a) {
    switch (a) {
    case DecisionAttr::FinalStatus: return Field::FinalStatus;
    case DecisionAttr::CompletionTimeClass: return Field::CompletionClass;
    case DecisionAttr::CostPriceClass: return Field::CostClass;
    }
    return Field::FinalStatus;
}

Code Discretization::state_code(TaskState s) {
    switch (s) {
    case TaskState::Success: return 0;
    case TaskState::Fail: return 1;
    case TaskState::Aborted: return 2;
    default: return kAbsent; // non-terminal states never appear in retained records
    }
}

namespace {

std::vector<double> fit_edges(std::vector<double> values, int bins, BinMethod method) {
    std::vector<double> edges;
    if (values.empty())
        return edges;
    std::sort(values.begin(), values.end());
    const double lo = values.front();
    const double hi = values.back();
    if (lo == hi)
        return edges; // degenerate column, single bin
    if (method == BinMethod::EqualWidth) {
        for (int i = 1; i < bins; ++i)
            edges.push_back(lo + (hi - lo) * i / bins);
    } else {
        const std::size_t n = values.size();
        for (int i = 1; i < bins; ++i) {
            const std::size_t pos = n * static_cast<std::size_t>(i) / static_cast<std::size_t>(bins);
            if (pos == 0 || pos >= n)
                continue;
            if (values[pos - 1] < values[pos])
                edges.push_back((values[pos - 1] + values[pos]) / 2.0);
        }
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

} // namespace

Discretization Discretization::fit(const std::vector<TaskRecord>& records, int bins, BinMethod method) {
    if (records.empty())
        throw std::invalid_argument("discretize: records must be non-empty");
    if (bins < 2)
        throw std::invalid_argument("discretize: bins must be >= 2");

    Discretization d;
    d.bins_ = bins;
    d.method_ = method;

    auto column = [&](auto getter) {
        std::vector<double> vals;
        vals.reserve(records.size());
        for (const auto& r : records) {
            auto v = getter(r);
            if (v)
                vals.push_back(*v);
        }
        return vals;
    };

    using R = TaskRecord;
    d.edges_[static_cast<int>(Field::CpuLoad)] =
        fit_edges(column([](const R& r) { return std::optional<double>(r.cpu_load_at_submit); }), bins, method);
    d.edges_[static_cast<int>(Field::FreeRam)] =
        fit_edges(column([](const R& r) { return std::optional<double>(r.free_ram_at_submit_mb); }), bins, method);
    d.edges_[static_cast<int>(Field::TaskSize)] =
        fit_edges(column([](const R& r) { return std::optional<double>(r.task_size_mi); }), bins, method);
    d.edges_[static_cast<int>(Field::Waiting)] =
        fit_edges(column([](const R& r) { return std::optional<double>(r.waiting_grid_tasks); }), bins, method);
    d.edges_[static_cast<int>(Field::Dtr)] =
        fit_edges(column([](const R& r) { return std::optional<double>(r.dtr_at_submit); }), bins, method);
    d.edges_[static_cast<int>(Field::CompletionClass)] =
        fit_edges(column([](const R& r) { return r.completion_time_s; }), bins, method);
    d.edges_[static_cast<int>(Field::CostClass)] =
        fit_edges(column([](const R& r) { return r.cost_price; }), bins, method);
    return d;
}

Code Discretization::code_continuous(Field f, double value) const {
    const auto& e = edges_[static_cast<int>(f)];
    // bin index = number of edges <= value
    return static_cast<Code>(std::upper_bound(e.begin(), e.end(), value) - e.begin());
}

const std::vector<double>& Discretization::edges(Field f) const {
    return edges_[static_cast<int>(f)];
}

CodedRecord Discretization::code_record(const TaskRecord& r) const {
    CodedRecord c{};
    c[static_cast<int>(Field::CpuLoad)] = code_continuous(Field::CpuLoad, r.cpu_load_at_submit);
    c[static_cast<int>(Field::FreeRam)] = code_continuous(Field::FreeRam, r.free_ram_at_submit_mb);
    c[static_cast<int>(Field::TaskSize)] = code_continuous(Field::TaskSize, r.task_size_mi);
    c[static_cast<int>(Field::Priority)] = priority_code(r.priority);
    c[static_cast<int>(Field::Waiting)] = code_continuous(Field::Waiting, r.waiting_grid_tasks);
    c[static_cast<int>(Field::Dtr)] = code_continuous(Field::Dtr, r.dtr_at_submit);
    c[static_cast<int>(Field::FinalStatus)] = state_code(r.final_state);
    c[static_cast<int>(Field::CompletionClass)] =
        r.completion_time_s ? code_continuous(Field::CompletionClass, *r.completion_time_s) : kAbsent;
    c[static_cast<int>(Field::CostClass)] =
        r.cost_price ? code_continuous(Field::CostClass, *r.cost_price) : kAbsent;
    return c;
}

namespace {

DecisionTable make_table(const std::vector<CodedRecord>& coded, DecisionAttr which) {
    const Field dec = decision_field(which);
    DecisionTable t;
    t.decision_field = dec;
    for (int f = 0; f < kFieldCount; ++f)
        if (static_cast<Field>(f) != dec)
            t.condition_fields.push_back(static_cast<Field>(f));
    t.rows.reserve(coded.size());
    t.decisions.reserve(coded.size());
    for (const auto& c : coded) {
        std::vector<Code> row;
        row.reserve(t.condition_fields.size());
        for (Field f : t.condition_fields)
            row.push_back(c[static_cast<int>(f)]);
        t.rows.push_back(std::move(row));
        t.decisions.push_back(c[static_cast<int>(dec)]);
    }
    return t;
}

} // namespace

TableSet discretize(const std::vector<TaskRecord>& records, int bins, BinMethod method) {
    TableSet set{Discretization::fit(records, bins, method), {}, {}, {}};
    std::vector<CodedRecord> coded;
    coded.reserve(records.size());
    for (const auto& r : records)
        coded.push_back(set.disc.code_record(r));
    set.final_status = make_table(coded, DecisionAttr::FinalStatus);
    set.completion_class = make_table(coded, DecisionAttr::CompletionTimeClass);
    set.cost_class = make_table(coded, DecisionAttr::CostPriceClass);
    return set;
}

std::vector<std::vector<int>> indiscernibility(const DecisionTable& table,
                                               const std::vector<int>& attr_indices) {
    for (int a : attr_indices)
        if (a < 0 || a >= static_cast<int>(table.condition_fields.size()))
            throw std::out_of_range("indiscernibility: attribute index out of range");

    std::vector<std::vector<int>> blocks;
    std::map<std::vector<Code>, int> index_of; // projected tuple -> block id
    for (int row = 0; row < static_cast<int>(table.row_count()); ++row) {
        std::vector<Code> key;
        key.reserve(attr_indices.size());
        for (int a : attr_indices)
            key.push_back(table.rows[row][a]);
        auto [it, inserted] = index_of.try_emplace(std::move(key), static_cast<int>(blocks.size()));
        if (inserted)
            blocks.emplace_back();
        blocks[it->second].push_back(row);
    }
    return blocks; // ordered by first row occurrence; rows ascending in each
}

namespace {

std::vector<int> all_condition_indices(const DecisionTable& table) {
    std::vector<int> idx(table.condition_fields.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = static_cast<int>(i);
    return idx;
}

std::vector<bool> concept_mask(const DecisionTable& table, const std::vector<int>& concept_rows) {
    std::vector<bool> mask(table.row_count(), false);
    for (int r : concept_rows) {
        if (r < 0 || r >= static_cast<int>(table.row_count()))
            throw std::out_of_range("concept row index out of range");
        mask[r] = true;
    }
    return mask;
}

} // namespace

std::vector<int> lower_approximation(const DecisionTable& table, const std::vector<int>& concept_rows) {
    const auto mask = concept_mask(table, concept_rows);
    std::vector<int> out;
    for (const auto& block : indiscernibility(table, all_condition_indices(table))) {
        bool all_in = true;
        for (int r : block)
            if (!mask[r]) { all_in = false; break; }
        if (all_in)
            out.insert(out.end(), block.begin(), block.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> upper_approximation(const DecisionTable& table, const std::vector<int>& concept_rows) {
    const auto mask = concept_mask(table, concept_rows);
    std::vector<int> out;
    for (const auto& block : indiscernibility(table, all_condition_indices(table))) {
        bool any_in = false;
        for (int r : block)
            if (mask[r]) { any_in = true; break; }
        if (any_in)
            out.insert(out.end(), block.begin(), block.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Rule::matches(const CodedRecord& row) const {
    for (const auto& [field, value] : conditions)
        if (row[static_cast<int>(field)] != value)
            return false;
    return true;
}

namespace {

// Match/support counts of a condition list against the table, as exact counts.
struct MatchCount {
    int matching = 0;
    int with_decision = 0;
};

MatchCount count_matches(const DecisionTable& table,
                         const std::vector<std::pair<int, Code>>& conds, Code decision) {
    MatchCount mc;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const auto& row = table.rows[r];
        bool ok = true;
        for (const auto& [attr, value] : conds)
            if (row[attr] != value) { ok = false; break; }
        if (!ok)
            continue;
        ++mc.matching;
        if (table.decisions[r] == decision)
            ++mc.with_decision;
    }
    return mc;
}

} // namespace

RuleMatrix induce_rules(const DecisionTable& table, DecisionAttr which, SimTime built_at_s) {
    if (table.row_count() == 0)
        throw std::invalid_argument("induce_rules: table must be non-empty");

    RuleMatrix m;
    m.decision_attr = which;
    m.condition_fields = table.condition_fields;
    m.built_at_s = built_at_s;
    m.source_row_count = static_cast<int>(table.row_count());

    const auto blocks = indiscernibility(table, all_condition_indices(table));
    std::set<std::pair<std::vector<std::pair<int, Code>>, Code>> seen;

    auto emit = [&](const std::vector<int>& block, Code decision) {
        // start from the block's full attribute tuple, then drop attributes
        // greedily while the rule's certainty is unchanged
        std::vector<std::pair<int, Code>> conds;
        conds.reserve(table.condition_fields.size());
        const auto& proto = table.rows[block.front()];
        for (std::size_t a = 0; a < proto.size(); ++a)
            conds.emplace_back(static_cast<int>(a), proto[a]);

        MatchCount base = count_matches(table, conds, decision);
        // reverse schema order drops the outcome-class columns first, so the
        // kept conditions skew toward attributes an incoming task can satisfy
        for (std::size_t k = proto.size(); k-- > 0 && conds.size() > 1;) {
            const auto drop = k;
            auto it = std::find_if(conds.begin(), conds.end(),
                                   [&](const auto& c) { return c.first == static_cast<int>(drop); });
            if (it == conds.end())
                continue;
            std::vector<std::pair<int, Code>> cand(conds);
            cand.erase(cand.begin() + (it - conds.begin()));
            MatchCount mc = count_matches(table, cand, decision);
            // exact rational comparison: with/matching == base ratio
            if (static_cast<long>(mc.with_decision) * base.matching ==
                static_cast<long>(base.with_decision) * mc.matching) {
                conds = std::move(cand);
                base = mc;
            }
        }
        Rule rule;
        for (const auto& [attr, value] : conds)
            rule.conditions.emplace_back(table.condition_fields[attr], value);
        rule.decision_value = decision;
        rule.support = base.with_decision;
        rule.certainty = static_cast<double>(base.with_decision) / base.matching;
        if (seen.emplace(conds, decision).second)
            m.rules.push_back(std::move(rule));
    };

    for (const auto& block : blocks) {
        // decisions present in this block, ordered by code
        std::map<Code, int> counts;
        for (int r : block)
            ++counts[table.decisions[r]];
        for (const auto& entry : counts)
            emit(block, entry.first);
    }
    return m;
}

const RuleMatrix& RuleModel::matrix_for(DecisionAttr a) const {
    switch (a) {
    case DecisionAttr::FinalStatus: return final_status;
    case DecisionAttr::CompletionTimeClass: return completion_time;
    case DecisionAttr::CostPriceClass: return cost_price;
    }
    return final_status;
}

RuleModel build_rule_model(const std::vector<TaskRecord>& records, int bins, BinMethod method,
                           SimTime now_s) {
    TableSet set = discretize(records, bins, method);
    RuleModel model{std::move(set.disc), {}, {}, {}, now_s, static_cast<int>(records.size())};
    model.final_status = induce_rules(set.final_status, DecisionAttr::FinalStatus, now_s);
    model.completion_time = induce_rules(set.completion_class, DecisionAttr::CompletionTimeClass, now_s);
    model.cost_price = induce_rules(set.cost_class, DecisionAttr::CostPriceClass, now_s);
    return model;
}

bool should_run_rsa(const RsaTriggerState& state, long total_records, SimTime now_s,
                    double new_fraction, Duration min_interval_s) {
    const long new_records = total_records - state.records_at_last_rsa;
    const bool enough_new =
        static_cast<double>(new_records) > new_fraction * static_cast<double>(state.records_at_last_rsa);
    const bool interval_ok = (now_s - state.last_rsa_s) >= min_interval_s;
    return enough_new && interval_ok;
}

std::string to_csv(const DecisionTable& table) {
    std::ostringstream os;
    for (std::size_t i = 0; i < table.condition_fields.size(); ++i)
        os << to_string(table.condition_fields[i]) << ',';
    os << to_string(table.decision_field) << '\n';
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        for (Code c : table.rows[r]) {
            if (c != kAbsent)
                os << static_cast<int>(c);
            os << ',';
        }
        if (table.decisions[r] != kAbsent)
            os << static_cast<int>(table.decisions[r]);
        os << '\n';
    }
    return os.str();
}

namespace {

Field field_from_name(const std::string& name) {
    for (int f = 0; f < kFieldCount; ++f)
        if (name == to_string(static_cast<Field>(f)))
            return static_cast<Field>(f);
    throw std::invalid_argument("unknown attribute name: " + name);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

} // namespace

DecisionTable decision_table_from_csv(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("decision table CSV is empty");
    auto header = split_csv_line(line);
    if (header.size() < 2)
        throw std::invalid_argument("decision table CSV needs conditions plus a decision column");

    DecisionTable t;
    for (std::size_t i = 0; i + 1 < header.size(); ++i)
        t.condition_fields.push_back(field_from_name(header[i]));
    t.decision_field = field_from_name(header.back());

    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("decision table CSV row width mismatch");
        std::vector<Code> row;
        for (std::size_t i = 0; i + 1 < cells.size(); ++i)
            row.push_back(cells[i].empty() ? kAbsent : static_cast<Code>(std::stoi(cells[i])));
        t.rows.push_back(std::move(row));
        t.decisions.push_back(cells.back().empty() ? kAbsent : static_cast<Code>(std::stoi(cells.back())));
    }
    return t;
}

namespace {

nlohmann::ordered_json matrix_json(const RuleMatrix& matrix);

} // namespace

std::string to_json(const RuleMatrix& matrix) {
    return matrix_json(matrix).dump(2);
}

std::string to_json(const RuleModel& model) {
    nlohmann::ordered_json j;
    j["built_at_s"] = model.built_at_s;
    j["source_row_count"] = model.source_row_count;
    j["matrices"] = nlohmann::ordered_json::array();
    j["matrices"].push_back(matrix_json(model.final_status));
    j["matrices"].push_back(matrix_json(model.completion_time));
    j["matrices"].push_back(matrix_json(model.cost_price));
    return j.dump(2);
}

namespace {

nlohmann::ordered_json matrix_json(const RuleMatrix& matrix) {
    nlohmann::ordered_json j;
    j["decision_attr"] = to_string(matrix.decision_attr);
    j["built_at_s"] = matrix.built_at_s;
    j["source_row_count"] = matrix.source_row_count;
    j["condition_attrs"] = nlohmann::ordered_json::array();
    for (Field f : matrix.condition_fields)
        j["condition_attrs"].push_back(to_string(f));
    j["rules"] = nlohmann::ordered_json::array();
    for (const auto& rule : matrix.rules) {
        nlohmann::ordered_json jr;
        jr["conditions"] = nlohmann::ordered_json::object();
        for (const auto& [field, value] : rule.conditions)
            jr["conditions"][to_string(field)] = value;
        jr["decision"] = rule.decision_value;
        jr["support"] = rule.support;
        jr["certainty"] = rule.certainty;
        j["rules"].push_back(std::move(jr));
    }
    return j;
}

} // namespace

} // namespace gridwise::rs
