#pragma once

#include "gridwise/domain.hpp"

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gridwise {

enum class EventKind {
    TaskArrival,     // task data finished transferring to a node
    TaskStart,       // node CPU picks the next queued task
    TaskFinish,      // running work reaches its completion milestone
    TaskFail,        // running work reaches its sampled failure point
    LocalLoadChange, // local (non-grid) load burst begins or ends
    AnnounceTick,    // periodic status announcement
    RsaTick,         // periodic rough-set trigger check
    UrgentChange,    // out-of-band announcement after a local load edge
    JobSubmitted,    // jobs handed to a local scheduler; empty list = retry sweep
};

const char* to_string(EventKind k);

struct TaskArrivalPayload { NodeId node = -1; TaskId task = -1; };
struct TaskStartPayload { NodeId node = -1; };
// Milestone events carry a token; the node ignores stale tokens after a
// reschedule (rate changes invalidate previously scheduled milestones).
struct TaskFinishPayload { NodeId node = -1; std::uint64_t token = 0; };
struct TaskFailPayload { NodeId node = -1; std::uint64_t token = 0; };
struct LocalLoadChangePayload { NodeId node = -1; bool begin = false; SimTime until_s = 0; };
struct AnnounceTickPayload { NodeId node = -1; };
struct RsaTickPayload { NodeId node = -1; };
struct UrgentChangePayload { NodeId node = -1; };
struct JobSubmittedPayload { std::string ls_id; std::vector<JobId> jobs; };

using EventPayload = std::variant<TaskArrivalPayload, TaskStartPayload, TaskFinishPayload,
                                  TaskFailPayload, LocalLoadChangePayload, AnnounceTickPayload,
                                  RsaTickPayload, UrgentChangePayload, JobSubmittedPayload>;

struct Event {
    SimTime fire_at_s = 0;
    std::uint64_t sequence = 0; // FIFO tiebreak among events at the same time
    EventKind kind = EventKind::TaskArrival;
    EventPayload payload;
};

// Thrown when an event handler fails; identifies the offending event.
struct EngineError : std::runtime_error {
    explicit EngineError(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic discrete-event core: virtual clock plus an event queue ordered
// by (fire_at_s, sequence). Strictly single-context.
class Engine {
public:
    using Handler = std::function<void(const Event&)>;

    SimTime now() const { return now_; }
    std::size_t pending() const { return queue_.size(); }

    void set_handler(Handler h) { handler_ = std::move(h); }
    // Invoked for every event before its handler runs; used for trace output.
    void set_trace_sink(Handler h) { trace_ = std::move(h); }

    // Scheduling into the past is a contract violation.
    void schedule(SimTime fire_at_s, EventKind kind, EventPayload payload);

    // Processes every event with fire_at_s <= t_end_s in (time, sequence)
    // order, leaves the clock at t_end_s, and returns the number processed.
    std::size_t run_until(SimTime t_end_s);

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.fire_at_s != b.fire_at_s) return a.fire_at_s > b.fire_at_s;
            return a.sequence > b.sequence;
        }
    };

    SimTime now_ = 0;
    std::uint64_t next_sequence_ = 0;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    Handler handler_;
    Handler trace_;
};

// Seeded deterministic random stream; identical (seed, stream_id) pairs
// reproduce identical draw sequences. One independent stream per node and per
// generator keeps replications reproducible regardless of interleaving.
class RngStream {
public:
    RngStream() : RngStream(0, "") {}
    RngStream(std::uint64_t seed, std::string_view stream_id);

    std::uint64_t next_u64();
    double uniform();                         // [0, 1)
    double uniform(double lo, double hi);
    std::uint64_t uniform_int(std::uint64_t n); // [0, n)
    double exponential(double mean);
    // Symmetric triangular distribution on [lo, hi] with the given mode.
    double triangular(double lo, double mode, double hi);

private:
    std::uint64_t state_;
};

// time = length / rate; MI over MI/s yields seconds.
Duration execution_time(const Task& task, const NodeSpec& node);

enum class TaskOutcome { WillSucceed, WillFail };

// Bernoulli draw on the node's own stream: fails with probability
// 1 - dependability.
TaskOutcome sample_task_outcome(const NodeSpec& node, RngStream& rng);

} // namespace gridwise
