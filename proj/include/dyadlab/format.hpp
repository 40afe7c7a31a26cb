#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace dyadlab {

inline std::string num(double v, int prec = 6) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

}  // namespace dyadlab
