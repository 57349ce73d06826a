#pragma once

#include <cstdio>
#include <optional>
#include <string>

namespace gridwise::detail {

// Deterministic double formatting for CSV/NDJSON output (replay determinism
// rides on byte-identical logs).
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt_double(*v) : std::string();
}

} // namespace gridwise::detail
