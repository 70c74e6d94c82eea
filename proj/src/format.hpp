#pragma once

#include <charconv>
#include <string>

namespace slicetrain::detail {

// Shortest representation that round-trips; locale independent.
inline std::string fmt_double(double v) {
    if (v == 0.0) v = 0.0;  // drop negative zero
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace slicetrain::detail
