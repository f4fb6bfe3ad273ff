#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "json.hpp"

namespace t2v {

// Canonical report serialization: keys sorted (nlohmann objects already are),
// every finite real printed as fixed 6-decimal, two-space indent, trailing
// newline. Golden-file tests rely on this being byte-stable.
namespace detail {

inline void canonical_dump_rec(const nlohmann::json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                out += pad_in;
                out += nlohmann::json(it.key()).dump();
                out += ": ";
                canonical_dump_rec(it.value(), out, indent + 1);
                if (i + 1 < j.size()) out += ',';
                out += '\n';
            }
            out += pad;
            out += '}';
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                out += pad_in;
                canonical_dump_rec(j[i], out, indent + 1);
                if (i + 1 < j.size()) out += ',';
                out += '\n';
            }
            out += pad;
            out += ']';
            return;
        }
        case nlohmann::json::value_t::number_float: {
            double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                return;
            }
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6f", v);
            // avoid the "-0.000000" / "0.000000" split
            if (std::string_view(buf) == "-0.000000") {
                out += "0.000000";
            } else {
                out += buf;
            }
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

}  // namespace detail

inline std::string canonical_dump(const nlohmann::json& j) {
    std::string out;
    detail::canonical_dump_rec(j, out, 0);
    out += '\n';
    return out;
}

}  // namespace t2v
