#pragma once

#include "gridwise/domain.hpp"
#include "gridwise/roughset.hpp"

#include <array>
#include <span>
#include <vector>

namespace gridwise::cbr {

// Append-only store of a node's finished task records. Case codes are kept in
// step with the owning node's current discretization so rule-filtered
// retrieval never re-codes the whole base per query.
class CaseBase {
public:
    CaseBase() = default;
    explicit CaseBase(NodeId owner) : owner_(owner) {}

    NodeId owner() const { return owner_; }
    std::size_t size() const { return cases_.size(); }
    bool empty() const { return cases_.empty(); }
    const std::vector<TaskRecord>& cases() const { return cases_; }
    const TaskRecord& at(std::size_t i) const { return cases_[i]; }

    // Only terminal records may be retained.
    void retain(const TaskRecord& finished);

    // Re-codes every case with the given discretization (called after each
    // analyzer run); retain() keeps codes current afterwards.
    void recode(const rs::Discretization& disc);
    bool has_codes() const { return coded_.size() == cases_.size() && !cases_.empty(); }
    const std::vector<rs::CodedRecord>& codes() const { return coded_; }

    // CSV in the record-table schema shared with the analyzer exports.
    std::string to_csv() const;

private:
    NodeId owner_ = -1;
    std::vector<TaskRecord> cases_;
    std::vector<rs::CodedRecord> coded_;
    std::optional<rs::Discretization> disc_; // set by recode()
};

// Attributes of an incoming task paired with the candidate node's snapshot.
struct QueryCase {
    double size_mi = 0;
    double memory_mb = 0;
    Duration deadline_s = 0;
    Priority priority = Priority::Normal;
    double cpu_load = 0;
    double free_ram_mb = 0;
    int waiting = 0;
    double dtr = 0;
};

std::array<rs::Code, rs::kConditionFieldCount> code_query(const rs::Discretization& disc,
                                                          const QueryCase& query);

struct Retrieval {
    std::vector<int> case_indices; // ascending
    bool fallback = false;         // no rule fired; whole base returned, low confidence
};

// Two-step retrieval: rules of the active matrix whose conditions the query
// satisfies select the training set; with no fired rule the whole case base
// is returned flagged low-confidence.
Retrieval retrieve(const CaseBase& base, const rs::RuleModel& model, rs::DecisionAttr active,
                   const QueryCase& query);

// Per-attribute ranges used to normalize continuous distances. A zero-width
// range contributes distance 0.
struct AttrRange {
    double lo = 0;
    double hi = 0;
};

// 1 - mean per-attribute distance; continuous attributes use range-normalized
// absolute difference, categorical 0/1 mismatch. NaN marks an absent value:
// one side absent is a full mismatch, both absent match exactly.
double similarity(std::span<const double> a, std::span<const double> b,
                  std::span<const AttrRange> ranges, std::span<const bool> categorical);

struct Neighbor {
    int case_index = -1;
    double sim = 0;
};

// k most similar cases (all if fewer); ties in similarity break toward the
// newer case.
std::vector<Neighbor> nearest_neighbors(const CaseBase& base, const std::vector<int>& training,
                                        const QueryCase& query, int k);

// Majority vote over the neighbors' final states (Success wins ties, aborted
// neighbors are neutral); completion and cost are similarity-weighted means
// over successful neighbors; confidence = majority share x mean similarity.
Prediction predict(const CaseBase& base, const std::vector<int>& training, const QueryCase& query,
                   int k);

} // namespace gridwise::cbr
