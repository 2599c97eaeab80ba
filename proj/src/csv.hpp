#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace dgbo::csv {

// Round-trip representation; "nan" and "inf"/"-inf" for non-finite values.
inline std::string number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// RFC 4180 field quoting.
inline std::string field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace dgbo::csv
