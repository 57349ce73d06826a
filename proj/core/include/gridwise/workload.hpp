#pragma once

#include "gridwise/domain.hpp"
#include "gridwise/engine.hpp"
#include "gridwise/gnm.hpp"

#include <cstdint>
#include <vector>

namespace gridwise::workload {

// Population synthesis knobs: the scheduler tables give per-pool medians
// only, so the rest of each node is drawn inside these bands.
struct BuildParams {
    double dependability_width = 0.1; // triangular half-width around the medium
    double alpha_lo = 8.0;            // standard price band, currency/min
    double alpha_hi = 12.0;
    double price_tolerance_p = 0.2;
    double dtr_lo = 0.5; // data units/s
    double dtr_hi = 2.0;
    double ram_lo_mb = 64;
    double ram_hi_mb = 512;
    double local_cpu_lo = 0.05; // routine local load fraction
    double local_cpu_hi = 0.35;
    double local_ram_frac_lo = 0.05;
    double local_ram_frac_hi = 0.25;
};

// node_count nodes at the pool's grid MIPS; dependability drawn around the
// pool medium (read as the population median).
std::vector<NodeSpec> build_nodes(const LocalSchedulerSpec& spec, const BuildParams& params,
                                  std::uint64_t seed, NodeId first_node_id = 0);

// Per-node dynamic starting point: routine local load, occupied RAM, and the
// initial queued-work backlog drawn exponential with the pool's
// queue-deadline-status figure as mean.
struct NodeRuntimeSetup {
    double local_cpu_load = 0;
    double local_ram_used_mb = 0;
    Duration backlog_s = 0;
};
NodeRuntimeSetup draw_runtime_setup(const NodeSpec& node, const LocalSchedulerSpec& pool,
                                    const BuildParams& params, std::uint64_t seed);

// Uniform split of total_tasks identical tasks over job_count jobs;
// non-divisible counts round-robin the remainder.
std::vector<Job> build_jobs(const JobGroupSpec& spec, JobId first_job_id = 0,
                            TaskId first_task_id = 0);

struct WarmupParams {
    int depth = 50; // records synthesized per node
    double size_lo_mi = 20000;
    double size_hi_mi = 80000;
    Duration deadline_lo_s = 600;
    Duration deadline_hi_s = 2400;
    double memory_lo_mb = 1.0;
    double memory_hi_mb = 8.0;
};

// Synthesizes past task records through the execution/failure model so rule
// matrices and case bases are non-empty at t=0 (runs the initial analyzer
// pass when records exist).
void warmup_node(GnmNode& node, const WarmupParams& params, std::uint64_t seed);
void warmup_history(std::vector<GnmNode>& nodes, const WarmupParams& params, std::uint64_t seed);

struct BurstWindow {
    SimTime start_s = 0;
    SimTime end_s = 0;
};

struct LocalLoadParams {
    Duration mean_interval_s = 4 * 3600.0; // <= 0 disables bursts
    Duration min_duration_s = 300;
    Duration max_duration_s = 1800;
};

// Poisson-arriving local load bursts over [0, horizon); overlapping draws are
// merged so windows never overlap on one node.
std::vector<BurstWindow> local_load_trace(NodeId node, const LocalLoadParams& params,
                                          Duration horizon_s, std::uint64_t seed);

} // namespace gridwise::workload
