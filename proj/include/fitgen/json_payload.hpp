#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fitgen/errors.hpp"

namespace fitgen {

namespace detail {

// Index one past the bracket that closes the one at `open`, or npos.
inline std::size_t matching_close(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{' || c == '[') ++depth;
        else if (c == '}' || c == ']') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

}  // namespace detail

// First complete JSON object or array embedded in free text. Markdown fences
// and surrounding prose are skipped; a candidate that fails to parse moves
// the search to the next opening bracket.
inline nlohmann::json extract_json_payload(std::string_view raw) {
    std::size_t pos = 0;
    while ((pos = raw.find_first_of("{[", pos)) != std::string_view::npos) {
        const std::size_t end = detail::matching_close(raw, pos);
        if (end != std::string_view::npos) {
            try {
                return nlohmann::json::parse(raw.substr(pos, end - pos));
            } catch (const nlohmann::json::parse_error&) {
            }
        }
        ++pos;
    }
    throw FormatError("no JSON object or array found in response");
}

}  // namespace fitgen
