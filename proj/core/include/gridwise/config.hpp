#pragma once

#include "gridwise/domain.hpp"
#include "gridwise/gnm.hpp"
#include "gridwise/workload.hpp"

#include <string>
#include <vector>

namespace gridwise {

// Everything a run needs beyond the two tables.
struct SimParams {
    GnmParams gnm;
    workload::BuildParams build;
    workload::WarmupParams warmup;
    workload::LocalLoadParams bursts;
    Duration round_period_s = 30;      // pending tasks retry each round
    Duration announce_period_s = 600;  // periodic announcement tick
    Duration rsa_tick_period_s = 3600; // periodic analyzer trigger check
    bool cancel_job_on_giveup = false; // consumer cancels siblings of a given-up task
    SimTime submit_at_s = 0;
    Duration horizon_margin_s = 1.0;
};

struct ScenarioConfig {
    std::vector<LocalSchedulerSpec> local_schedulers;
    std::vector<JobGroupSpec> job_groups;
    SimParams params;
};

// Canonical structured-text form (JSON, keys mirroring the field names).
// serialize(parse(serialize(c))) is byte-identical to serialize(c).
std::string scenario_to_string(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_string(const std::string& text); // throws on malformed/unknown keys

ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& cfg, const std::string& path);

std::vector<Violation> validate(const ScenarioConfig& cfg);

// Shrinks node counts and task counts proportionally (desk-scale runs);
// job counts are capped so no job ends up empty.
ScenarioConfig scaled(const ScenarioConfig& cfg, double factor);

// Tables of the bundled reference scenario.
ScenarioConfig reference_scenario();

} // namespace gridwise
