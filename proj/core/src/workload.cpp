#include "gridwise/workload.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gridwise::workload {

std::vector<NodeSpec> build_nodes(const LocalSchedulerSpec& spec, const BuildParams& params,
                                  std::uint64_t seed, NodeId first_node_id) {
    if (spec.node_count <= 0)
        throw std::invalid_argument("build_nodes: node_count must be > 0");

    std::vector<NodeSpec> nodes;
    nodes.reserve(spec.node_count);
    for (int i = 0; i < spec.node_count; ++i) {
        RngStream rng(seed, "build/" + spec.ls_id + "/" + std::to_string(i));
        NodeSpec n;
        n.node_id = first_node_id + i;
        n.local_scheduler_id = spec.ls_id;
        n.grid_mips = spec.gmips;
        const double w = params.dependability_width;
        const double med = spec.medium_dependability;
        n.dependability = std::clamp(w > 0 ? rng.triangular(med - w, med, med + w) : med, 0.0, 1.0);
        n.standard_price_alpha = rng.uniform(params.alpha_lo, params.alpha_hi);
        n.price_tolerance_p = params.price_tolerance_p;
        n.dtr_base = rng.uniform(params.dtr_lo, params.dtr_hi);
        n.total_ram_mb = rng.uniform(params.ram_lo_mb, params.ram_hi_mb);
        nodes.push_back(std::move(n));
    }
    return nodes;
}

NodeRuntimeSetup draw_runtime_setup(const NodeSpec& node, const LocalSchedulerSpec& pool,
                                    const BuildParams& params, std::uint64_t seed) {
    RngStream rng(seed, "setup/" + std::to_string(node.node_id));
    NodeRuntimeSetup s;
    s.local_cpu_load = rng.uniform(params.local_cpu_lo, params.local_cpu_hi);
    s.local_ram_used_mb =
        node.total_ram_mb * rng.uniform(params.local_ram_frac_lo, params.local_ram_frac_hi);
    s.backlog_s = pool.queue_deadline_status_s > 0 ? rng.exponential(pool.queue_deadline_status_s) : 0;
    return s;
}

std::vector<Job> build_jobs(const JobGroupSpec& spec, JobId first_job_id, TaskId first_task_id) {
    if (spec.job_count <= 0 || spec.total_tasks <= 0)
        throw std::invalid_argument("build_jobs: counts must be > 0");

    std::vector<Job> jobs(spec.job_count);
    TaskId next_task = first_task_id;
    for (int j = 0; j < spec.job_count; ++j) {
        jobs[j].job_id = first_job_id + j;
        jobs[j].consumer_id = "C" + std::to_string(j + 1);
        jobs[j].reliability_weight = spec.reliability_weight;
        jobs[j].completion_weight = spec.completion_weight;
    }
    for (int t = 0; t < spec.total_tasks; ++t) {
        Job& job = jobs[t % spec.job_count]; // round-robin split
        Task task;
        task.task_id = next_task++;
        task.job_id = job.job_id;
        task.length_mi = spec.length_mi;
        task.memory_mb = spec.memory_mb;
        task.deadline_s = spec.deadline_s;
        task.priority = Priority::Normal;
        task.size_units = spec.memory_mb;
        job.tasks.push_back(std::move(task));
    }
    return jobs;
}

void warmup_node(GnmNode& node, const WarmupParams& params, std::uint64_t seed) {
    const NodeSpec& spec = node.spec();
    RngStream rng(seed, "warmup/" + std::to_string(spec.node_id));
    for (int i = 0; i < params.depth; ++i) {
        TaskRecord r;
        r.task_id = -(static_cast<TaskId>(spec.node_id) * 100000 + i + 1); // synthetic past ids
        r.task_size_mi = rng.uniform(params.size_lo_mi, params.size_hi_mi);
        const Duration deadline = rng.uniform(params.deadline_lo_s, params.deadline_hi_s);
        r.priority = static_cast<Priority>(rng.uniform_int(3));
        r.cpu_load_at_submit = rng.uniform(0.05, 0.6);
        r.free_ram_at_submit_mb = spec.total_ram_mb * rng.uniform(0.3, 0.95);
        r.waiting_grid_tasks = static_cast<int>(rng.uniform_int(8));
        r.dtr_at_submit = spec.dtr_base * (1.0 + 0.2 * rng.uniform(-1.0, 1.0));

        const Duration exec_s = r.task_size_mi / spec.grid_mips;
        const double price = clamp_offered_price(spec.standard_price_alpha, spec.price_tolerance_p,
                                                 spec.standard_price_alpha *
                                                     (1.0 + spec.price_tolerance_p * rng.uniform(-1.0, 1.0)));
        if (rng.uniform() < spec.dependability) {
            // completions are execution-dominated with a modest queueing tail
            const Duration start_delay = rng.uniform(0.0, 0.25 * exec_s);
            r.final_state = TaskState::Success;
            r.spent_time_s = exec_s;
            r.completion_time_s = start_delay + exec_s;
            r.cost_price = price * exec_s / 60.0;
        } else {
            r.final_state = TaskState::Fail;
            r.spent_time_s = rng.uniform() * exec_s;
        }
        node.preload_record(r, deadline);
    }
    // a warm table is eligible immediately: first analyzer pass runs at t=0
    node.maybe_run_rsa(0.0);
}

void warmup_history(std::vector<GnmNode>& nodes, const WarmupParams& params, std::uint64_t seed) {
    for (auto& node : nodes)
        warmup_node(node, params, seed);
}

std::vector<BurstWindow> local_load_trace(NodeId node, const LocalLoadParams& params,
                                          Duration horizon_s, std::uint64_t seed) {
    std::vector<BurstWindow> raw;
    if (params.mean_interval_s <= 0 || horizon_s <= 0)
        return raw;
    if (params.max_duration_s < params.min_duration_s)
        throw std::invalid_argument("local_load_trace: duration band inverted");

    RngStream rng(seed, "burst/" + std::to_string(node));
    SimTime t = rng.exponential(params.mean_interval_s);
    while (t < horizon_s) {
        const Duration dur = rng.uniform(params.min_duration_s, params.max_duration_s);
        raw.push_back({t, t + dur});
        t += rng.exponential(params.mean_interval_s);
    }

    // merge colliding windows
    std::vector<BurstWindow> merged;
    for (const auto& w : raw) {
        if (!merged.empty() && w.start_s <= merged.back().end_s)
            merged.back().end_s = std::max(merged.back().end_s, w.end_s);
        else
            merged.push_back(w);
    }
    return merged;
}

} // namespace gridwise::workload
