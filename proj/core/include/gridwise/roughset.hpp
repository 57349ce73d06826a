#pragma once

#include "gridwise/domain.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace gridwise::rs {

// Discretized attribute value. kAbsent is a real category (e.g. the missing
// completion time of a failed task), not an unknown.
using Code = std::int16_t;
constexpr Code kAbsent = -1;

// Canonical column set of the node history table once discretized.
enum class Field : int {
    CpuLoad = 0,
    FreeRam,
    TaskSize,
    Priority,
    Waiting,
    Dtr,
    FinalStatus,
    CompletionClass,
    CostClass,
};
constexpr int kFieldCount = 9;
constexpr int kConditionFieldCount = 6; // fields a not-yet-run task can know

const char* to_string(Field f);

enum class DecisionAttr { FinalStatus, CompletionTimeClass, CostPriceClass };
const char* to_string(DecisionAttr a);
Field decision_field(DecisionAttr a);

enum class BinMethod { EqualFrequency, EqualWidth };

using CodedRecord = std::array<Code, kFieldCount>;

// Bin cutpoints fitted per continuous attribute; categorical attributes pass
// through. A query must be coded with the same cutpoints as the rule matrices
// it is matched against.
class Discretization {
public:
    // bins >= 2; an all-identical column degenerates to a single bin.
    static Discretization fit(const std::vector<TaskRecord>& records, int bins, BinMethod method);

    Code code_continuous(Field f, double value) const;
    CodedRecord code_record(const TaskRecord& r) const;

    int bins() const { return bins_; }
    BinMethod method() const { return method_; }
    const std::vector<double>& edges(Field f) const;

    static Code priority_code(Priority p) { return static_cast<Code>(p); }
    static Code state_code(TaskState s);

private:
    int bins_ = 0;
    BinMethod method_ = BinMethod::EqualFrequency;
    std::array<std::vector<double>, kFieldCount> edges_; // empty for categorical fields
};

// Objects described by condition attributes plus one decision attribute.
// For each of the three decision attributes the other two join the condition
// set, so every table has eight condition columns.
struct DecisionTable {
    std::vector<Field> condition_fields;
    Field decision_field = Field::FinalStatus;
    std::vector<std::vector<Code>> rows; // condition codes, row-major
    std::vector<Code> decisions;         // one per row

    std::size_t row_count() const { return rows.size(); }
};

struct TableSet {
    Discretization disc;
    DecisionTable final_status;
    DecisionTable completion_class;
    DecisionTable cost_class;
};

// Discretizes a record table into the three decision tables sharing one
// fitted discretization.
TableSet discretize(const std::vector<TaskRecord>& records, int bins,
                    BinMethod method = BinMethod::EqualFrequency);

// Rows equal on all listed condition columns share a block. Blocks are
// ordered by first row index; an empty attribute set yields a single block.
std::vector<std::vector<int>> indiscernibility(const DecisionTable& table,
                                               const std::vector<int>& attr_indices);

// Union of blocks fully contained in / intersecting the concept, over the
// table's full condition set. Returned row indices are sorted.
std::vector<int> lower_approximation(const DecisionTable& table, const std::vector<int>& concept_rows);
std::vector<int> upper_approximation(const DecisionTable& table, const std::vector<int>& concept_rows);

struct Rule {
    std::vector<std::pair<Field, Code>> conditions; // ascending by field
    Code decision_value = 0;
    int support = 0;        // rows matching the conditions that carry the decision
    double certainty = 0;   // support / rows matching the conditions; 1 for certain rules

    bool matches(const CodedRecord& row) const;
};

// Rules induced for one decision attribute, in matrix form
// (rows = rules, columns = attribute conditions).
struct RuleMatrix {
    DecisionAttr decision_attr = DecisionAttr::FinalStatus;
    std::vector<Field> condition_fields;
    std::vector<Rule> rules;
    SimTime built_at_s = 0;
    int source_row_count = 0;
};

// Certain rules come from lower-approximation blocks (certainty 1), possible
// rules from boundary blocks (certainty < 1). Redundant conditions are
// dropped greedily, value-reduct style, while certainty is unchanged.
RuleMatrix induce_rules(const DecisionTable& table, DecisionAttr which, SimTime built_at_s = 0);

// Output of one analyzer run: the shared discretization plus exactly three
// rule matrices.
struct RuleModel {
    Discretization disc;
    RuleMatrix final_status;
    RuleMatrix completion_time;
    RuleMatrix cost_price;
    SimTime built_at_s = 0;
    int source_row_count = 0;

    const RuleMatrix& matrix_for(DecisionAttr a) const;
};

RuleModel build_rule_model(const std::vector<TaskRecord>& records, int bins, BinMethod method,
                           SimTime now_s);

constexpr SimTime kNeverRun = -std::numeric_limits<SimTime>::infinity();

struct RsaTriggerState {
    SimTime last_rsa_s = kNeverRun;
    long records_at_last_rsa = 0;
};

// True iff new records exceed new_fraction of the records present at the last
// run AND at least min_interval_s has passed. A never-run node triggers on its
// first record.
bool should_run_rsa(const RsaTriggerState& state, long total_records, SimTime now_s,
                    double new_fraction = 0.01, Duration min_interval_s = 86400.0);

// CSV with a header row naming attributes; codes as integers, absent as an
// empty cell.
std::string to_csv(const DecisionTable& table);
DecisionTable decision_table_from_csv(const std::string& csv);

std::string to_json(const RuleMatrix& matrix);
std::string to_json(const RuleModel& model); // all three matrices in one document

} // namespace gridwise::rs
