#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace expertrank {

// The two textual streams every publication carries.
enum class stream_kind { title, abstract };

inline const char* stream_name(stream_kind s) {
    return s == stream_kind::title ? "title" : "abstract";
}

namespace detail {
// ASCII alphanumerics are token characters; so is any byte >= 0x80, which
// keeps UTF-8 multibyte sequences intact instead of shredding them.
inline bool is_token_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
           (c >= 'A' && c <= 'Z') || c >= 0x80;
}
} // namespace detail

// Lowercases ASCII, splits on any non-alphanumeric character, drops empty
// tokens. No stemming, no stopword removal.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (detail::is_token_byte(c)) {
            if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
            cur.push_back(static_cast<char>(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

} // namespace expertrank
