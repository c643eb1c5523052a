#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace citeguard {

inline bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

inline bool is_whitespace_only(std::string_view s) {
    for (char c : s) {
        if (!is_ascii_space(c)) return false;
    }
    return true;
}

// Blank in the paragraph-splitting sense: empty or horizontal whitespace only.
inline bool is_blank_line(std::string_view line) {
    for (char c : line) {
        if (c != ' ' && c != '\t' && c != '\r') return false;
    }
    return true;
}

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

// Byte offsets of UTF-8 code point starts, plus a trailing sentinel equal to
// s.size(). Continuation bytes (0x80..0xBF) never start a code point; invalid
// sequences degrade to one code point per byte.
inline std::vector<std::size_t> utf8_cp_offsets(std::string_view s) {
    std::vector<std::size_t> offsets;
    offsets.reserve(s.size() + 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto b = static_cast<unsigned char>(s[i]);
        if (b < 0x80 || b >= 0xC0) offsets.push_back(i);
    }
    offsets.push_back(s.size());
    return offsets;
}

inline std::size_t utf8_cp_count(std::string_view s) {
    std::size_t n = 0;
    for (char c : s) {
        auto b = static_cast<unsigned char>(c);
        if (b < 0x80 || b >= 0xC0) ++n;
    }
    return n;
}

// First max_cp code points of s, never splitting a UTF-8 sequence.
inline std::string utf8_prefix(std::string_view s, std::size_t max_cp) {
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        auto b = static_cast<unsigned char>(s[i]);
        if (b < 0x80 || b >= 0xC0) {
            if (n == max_cp) break;
            ++n;
        }
        ++i;
    }
    return std::string(s.substr(0, i));
}

// FNV-1a 64-bit over raw bytes.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

// Lowercased alphanumeric runs; anything outside [A-Za-z0-9] separates tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
        if (alnum) {
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            cur.push_back(c);
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

}  // namespace citeguard
