#pragma once

#include "gridwise/config.hpp"
#include "gridwise/engine.hpp"
#include "gridwise/gnm.hpp"
#include "gridwise/runlog.hpp"
#include "gridwise/scheduling.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace gridwise {

struct SimSinks {
    std::function<void(const Event&)> trace;
    std::function<void(const NodeAnnouncement&, AnnounceCause)> announcements;
};

// One replication: one job group submitted to one local scheduler pool, run
// to its deadline horizon. Owns the engine, the node population and the
// scheduler; produces the run log everything else is computed from.
class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, std::size_t ls_index, std::size_t group_index,
               SchedulerPolicy policy, std::uint64_t seed);

    void set_sinks(SimSinks sinks) { sinks_ = std::move(sinks); }

    RunLog run();

    const std::vector<GnmNode>& nodes() const { return nodes_; }
    SimTime horizon_s() const { return horizon_; }

private:
    void build_population();
    void handle(const Event& ev);
    void handle_job_submitted(const JobSubmittedPayload& p);
    void handle_completion(NodeId node, const CompletionInfo& info);
    void execute_dispatch(const DispatchAction& action);
    void try_start(NodeId node);
    void reschedule_milestone(NodeId node);
    void announce_node(NodeId node, AnnounceCause cause);
    void schedule_sweep();
    void cancel_job_siblings(JobId job);
    void finalize();

    ScenarioConfig cfg_;
    LocalSchedulerSpec ls_spec_;
    JobGroupSpec group_spec_;
    SchedulerPolicy policy_;
    std::uint64_t seed_;

    Engine engine_;
    std::vector<GnmNode> nodes_; // indexed by node id
    std::unique_ptr<LocalScheduler> ls_;
    MetaScheduler meta_;
    RunLog log_;
    SimSinks sinks_;
    SimTime horizon_ = 0;
    bool sweep_scheduled_ = false;
};

std::string event_to_ndjson(const Event& ev);
std::string announcement_to_ndjson(const NodeAnnouncement& a, AnnounceCause cause);

struct MatrixOptions {
    std::uint64_t base_seed = 42;
    int replications = 15;
    bool include_baseline = false;
    SimSinks sinks;
    // called after each run while the population is still alive (record dumps)
    std::function<void(const Simulation&, const RunLog&)> on_run_end;
};

// Every job group on every local scheduler, replications seeds apart, rows in
// deterministic (group, ls, seed, policy) order.
std::vector<RunLog> run_matrix(const ScenarioConfig& cfg, const MatrixOptions& opts);

const char* to_string(SchedulerPolicy p);

} // namespace gridwise
