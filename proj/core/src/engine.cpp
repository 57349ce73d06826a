#include "gridwise/engine.hpp"

#include <cmath>
#include <sstream>

namespace gridwise {

const char* to_string(EventKind k) {
    switch (k) {
    case EventKind::TaskArrival: return "TaskArrival";
    case EventKind::TaskStart: return "TaskStart";
    case EventKind::TaskFinish: return "TaskFinish";
    case EventKind::TaskFail: return "TaskFail";
    case EventKind::LocalLoadChange: return "LocalLoadChange";
    case EventKind::AnnounceTick: return "AnnounceTick";
    case EventKind::RsaTick: return "RsaTick";
    case EventKind::UrgentChange: return "UrgentChange";
    case EventKind::JobSubmitted: return "JobSubmitted";
    }
    return "?";
}

void Engine::schedule(SimTime fire_at_s, EventKind kind, EventPayload payload) {
    if (fire_at_s < now_) {
        std::ostringstream os;
        os << "schedule into the past: " << to_string(kind) << " at t=" << fire_at_s
           << " while clock=" << now_;
        throw std::invalid_argument(os.str());
    }
    queue_.push(Event{fire_at_s, next_sequence_++, kind, std::move(payload)});
}

std::size_t Engine::run_until(SimTime t_end_s) {
    if (t_end_s < now_)
        throw std::invalid_argument("run_until into the past");
    std::size_t processed = 0;
    while (!queue_.empty() && queue_.top().fire_at_s <= t_end_s) {
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.fire_at_s; // never decreases: queue entries are >= clock at insert
        if (trace_)
            trace_(ev);
        if (handler_) {
            try {
                handler_(ev);
            } catch (const std::exception& e) {
                std::ostringstream os;
                os << "event handler failed at t=" << ev.fire_at_s << " seq=" << ev.sequence
                   << " kind=" << to_string(ev.kind) << ": " << e.what();
                throw EngineError(os.str());
            }
        }
        ++processed;
    }
    now_ = t_end_s;
    return processed;
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view stream_id) {
    state_ = seed ^ fnv1a(stream_id);
    // warm the state so nearby seeds decorrelate
    splitmix64(state_);
    splitmix64(state_);
}

std::uint64_t RngStream::next_u64() {
    return splitmix64(state_);
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
    if (n == 0)
        throw std::invalid_argument("uniform_int(0)");
    return next_u64() % n;
}

double RngStream::exponential(double mean) {
    if (mean <= 0)
        throw std::invalid_argument("exponential mean must be > 0");
    return -mean * std::log1p(-uniform());
}

double RngStream::triangular(double lo, double mode, double hi) {
    if (!(lo <= mode && mode <= hi))
        throw std::invalid_argument("triangular requires lo <= mode <= hi");
    if (hi == lo)
        return lo;
    const double u = uniform();
    const double fc = (mode - lo) / (hi - lo);
    if (u < fc)
        return lo + std::sqrt(u * (hi - lo) * (mode - lo));
    return hi - std::sqrt((1.0 - u) * (hi - lo) * (hi - mode));
}

Duration execution_time(const Task& task, const NodeSpec& node) {
    if (task.length_mi <= 0)
        throw std::invalid_argument("task length_mi must be > 0");
    if (node.grid_mips <= 0)
        throw std::invalid_argument("node grid_mips must be > 0");
    return task.length_mi / node.grid_mips;
}

TaskOutcome sample_task_outcome(const NodeSpec& node, RngStream& rng) {
    return rng.uniform() < node.dependability ? TaskOutcome::WillSucceed : TaskOutcome::WillFail;
}

} // namespace gridwise
