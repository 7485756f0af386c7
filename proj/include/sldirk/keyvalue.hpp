#pragma once

#include <charconv>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sldirk/errors.hpp"

namespace sldirk {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace detail

/// Parse `key = value` lines. Blank lines and `#` comments are ignored;
/// later keys overwrite earlier ones.
inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) {
            view = view.substr(0, hash);
        }
        view = detail::trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const auto key = detail::trim(view.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        }
        out[std::string(key)] = std::string(detail::trim(view.substr(eq + 1)));
    }
    return out;
}

/// Parse a whitespace- or comma-separated list of reals.
inline std::vector<double> parse_reals(std::string_view text) {
    std::vector<double> values;
    std::string token;
    std::istringstream stream{std::string(text)};
    while (stream >> token) {
        std::string_view rest = token;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const auto item = rest.substr(0, comma);
            if (!item.empty()) {
                double value = 0.0;
                const auto* end = item.data() + item.size();
                const auto [ptr, ec] = std::from_chars(item.data(), end, value);
                if (ec != std::errc{} || ptr != end) {
                    throw ConfigError("not a number: '" + std::string(item) + "'");
                }
                values.push_back(value);
            }
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }
    return values;
}

}  // namespace sldirk
