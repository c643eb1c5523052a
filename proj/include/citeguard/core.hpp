#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "citeguard/errors.hpp"
#include "citeguard/text_util.hpp"

namespace citeguard {

// Schema tag carried by every versioned JSON artifact this library emits.
inline constexpr std::string_view kSchemaVersion = "citeguard/v1";

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

// doc_id / chunk_id alphabet. Restricted so citation tokens never need
// escaping: no '|', no brackets, no whitespace.
inline bool is_valid_identifier(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '.' || c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Extracted document content
// ---------------------------------------------------------------------------

struct TextBlock {
    std::string text;
    std::optional<std::string> section_title;
};

struct TableBlock {
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;
    std::optional<std::string> caption;
};

struct ImageTextBlock {
    std::string ocr_text;
    std::optional<std::string> descriptor;
};

using ContentBlock = std::variant<TextBlock, TableBlock, ImageTextBlock>;

struct PageRecord {
    int page_number = 0;
    std::vector<ContentBlock> blocks;
};

struct DocumentRecord {
    std::string doc_id;
    std::string authority;
    std::string doc_type;
    std::string title;
    std::vector<PageRecord> pages;
};

// ---------------------------------------------------------------------------
// Chunks
// ---------------------------------------------------------------------------

// Verbatim retrievable unit. text is always a contiguous slice of its
// document's flattened stream; char_len counts code points of text.
struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    int page_start = 0;
    int page_end = 0;
    std::optional<std::string> section_title;
    std::string text;
    std::size_t char_len = 0;

    bool operator==(const Chunk&) const = default;
};

struct ScoredChunk {
    Chunk chunk;
    double score = 0.0;
};

// ---------------------------------------------------------------------------
// Citations
// ---------------------------------------------------------------------------

// Canonical surface syntax: [doc:<doc_id>|p:<start>-<end>|c:<chunk_id>]
// The short page form |p:<n>| is accepted on parse and expands to n-n.
struct Citation {
    std::string doc_id;
    int page_start = 0;
    int page_end = 0;
    std::string chunk_id;

    bool operator==(const Citation&) const = default;
};

namespace detail {

// Bounded positive decimal without leading zeros (canonical rendering of a
// page number). Returns value, advances pos past the digits.
inline int parse_page_number(std::string_view s, std::size_t& pos) {
    std::size_t start = pos;
    if (pos >= s.size() || s[pos] < '0' || s[pos] > '9')
        throw CitationParseError(pos, "page number");
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    std::string_view digits = s.substr(start, pos - start);
    if (digits.size() > 1 && digits[0] == '0')
        throw CitationParseError(start, "page number without leading zeros");
    if (digits == "0") throw CitationParseError(start, "page number >= 1");
    if (digits.size() > 9) throw CitationParseError(start, "page number <= 999999999");
    int value = 0;
    for (char c : digits) value = value * 10 + (c - '0');
    return value;
}

inline std::string parse_identifier(std::string_view s, std::size_t& pos, const char* what) {
    std::size_t start = pos;
    while (pos < s.size()) {
        char c = s[pos];
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '.' || c == '_' || c == '-';
        if (!ok) break;
        ++pos;
    }
    if (pos == start) throw CitationParseError(start, what);
    return std::string(s.substr(start, pos - start));
}

inline void expect_literal(std::string_view s, std::size_t& pos, std::string_view lit) {
    for (char c : lit) {
        if (pos >= s.size() || s[pos] != c)
            throw CitationParseError(pos, "'" + std::string(lit) + "'");
        ++pos;
    }
}

}  // namespace detail

// Strict parse of the canonical grammar; the whole string must match.
inline Citation parse_citation(std::string_view s) {
    std::size_t pos = 0;
    detail::expect_literal(s, pos, "[doc:");
    Citation c;
    c.doc_id = detail::parse_identifier(s, pos, "doc_id");
    detail::expect_literal(s, pos, "|p:");
    c.page_start = detail::parse_page_number(s, pos);
    if (pos < s.size() && s[pos] == '-') {
        ++pos;
        c.page_end = detail::parse_page_number(s, pos);
    } else {
        c.page_end = c.page_start;
    }
    detail::expect_literal(s, pos, "|c:");
    c.chunk_id = detail::parse_identifier(s, pos, "chunk_id");
    detail::expect_literal(s, pos, "]");
    if (pos != s.size()) throw CitationParseError(pos, "end of citation");
    if (c.page_start > c.page_end)
        throw CitationParseError(0, "page_start <= page_end");
    return c;
}

// Canonical emitter; always the range form, even for single pages.
inline std::string render_citation(const Citation& c) {
    std::string out;
    out.reserve(16 + c.doc_id.size() + c.chunk_id.size());
    out += "[doc:";
    out += c.doc_id;
    out += "|p:";
    out += std::to_string(c.page_start);
    out += '-';
    out += std::to_string(c.page_end);
    out += "|c:";
    out += c.chunk_id;
    out += ']';
    return out;
}

inline Citation citation_of(const Chunk& chunk) {
    return Citation{chunk.doc_id, chunk.page_start, chunk.page_end, chunk.chunk_id};
}

// ---------------------------------------------------------------------------
// System responses
// ---------------------------------------------------------------------------

struct AnswerParagraph {
    std::string text;
    std::vector<Citation> citations;  // length >= 1 for validated answers
};

enum class AbstainReason {
    low_similarity,
    no_evidence,
    citation_validation_failed,
};

inline std::string_view abstain_reason_name(AbstainReason r) {
    switch (r) {
        case AbstainReason::low_similarity: return "low_similarity";
        case AbstainReason::no_evidence: return "no_evidence";
        case AbstainReason::citation_validation_failed: return "citation_validation_failed";
    }
    return "unknown";
}

struct Answered {
    std::vector<AnswerParagraph> paragraphs;
    std::vector<ScoredChunk> evidence;
    double top1_score = 0.0;
    int attempts_used = 0;
};

struct Abstained {
    AbstainReason reason = AbstainReason::no_evidence;
    std::string message;
    std::vector<ScoredChunk> partial_evidence;
};

using SystemResponse = std::variant<Answered, Abstained>;

inline bool is_answered(const SystemResponse& r) {
    return std::holds_alternative<Answered>(r);
}

}  // namespace citeguard
