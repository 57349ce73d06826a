#include "gridwise/log.hpp"

#include <cstdlib>
#include <iostream>

namespace gridwise {

namespace {

LogLevel parse_env() {
    const char* raw = std::getenv("GRIDSIM_LOG");
    if (!raw)
        return LogLevel::Warn;
    std::string s(raw);
    if (s == "error" || s == "0") return LogLevel::Error;
    if (s == "warn" || s == "1") return LogLevel::Warn;
    if (s == "info" || s == "2") return LogLevel::Info;
    if (s == "debug" || s == "3") return LogLevel::Debug;
    return LogLevel::Warn;
}

LogLevel& current() {
    static LogLevel level = parse_env();
    return level;
}

const char* tag(LogLevel level) {
    switch (level) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
    }
    return "?";
}

} // namespace

LogLevel log_level() { return current(); }
void set_log_level(LogLevel level) { current() = level; }
bool log_enabled(LogLevel level) { return static_cast<int>(level) <= static_cast<int>(current()); }

void log_line(LogLevel level, const std::string& msg) {
    std::cerr << "[" << tag(level) << "] " << msg << '\n';
}

} // namespace gridwise
