#pragma once

#include <sstream>
#include <string>

namespace gridwise {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Verbosity comes from the GRIDSIM_LOG environment variable
// (error|warn|info|debug or 0..3); default is warn.
LogLevel log_level();
void set_log_level(LogLevel level);
bool log_enabled(LogLevel level);
void log_line(LogLevel level, const std::string& msg);

} // namespace gridwise

#define GRIDWISE_LOG(level, expr)                                        \
    do {                                                                 \
        if (::gridwise::log_enabled(level)) {                            \
            std::ostringstream gw_log_os_;                               \
            gw_log_os_ << expr;                                          \
            ::gridwise::log_line(level, gw_log_os_.str());               \
        }                                                                \
    } while (0)
