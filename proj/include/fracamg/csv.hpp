#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fracamg {

/// Floating value with 6 significant digits in scientific notation.
inline std::string format_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5E", v);
    return buf;
}

inline std::string format_sci(const std::optional<double>& v) { return v ? format_sci(*v) : std::string(); }

/// RFC 4180 writer: CRLF line ends, fields quoted only when needed.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) os_ << ',';
            os_ << quote(fields[i]);
        }
        os_ << "\r\n";
    }

    static std::string quote(const std::string& f) {
        if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
        std::string q = "\"";
        for (char c : f) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }

private:
    std::ostream& os_;
};

}  // namespace fracamg
