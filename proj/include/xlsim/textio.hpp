#ifndef XLSIM_TEXTIO_HPP
#define XLSIM_TEXTIO_HPP

#include <cstdio>
#include <cstdlib>
#include <string>

namespace xlsim {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

}  // namespace xlsim

#endif
