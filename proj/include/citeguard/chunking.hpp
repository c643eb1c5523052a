#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "citeguard/core.hpp"
#include "citeguard/errors.hpp"
#include "citeguard/ingestion.hpp"
#include "citeguard/text_util.hpp"

namespace citeguard {

// All lengths count Unicode code points of the working stream.
struct ChunkingConfig {
    std::size_t target_len = 1000;
    std::size_t max_len = 1400;
    std::size_t overlap_len = 150;
    std::size_t min_len = 200;
};

inline void validate(const ChunkingConfig& cfg) {
    if (!(cfg.overlap_len < cfg.min_len && cfg.min_len <= cfg.target_len &&
          cfg.target_len <= cfg.max_len))
        throw Error(Errc::invalid_argument,
                    "chunking config must satisfy overlap < min <= target <= max");
}

// ---------------------------------------------------------------------------
// Working stream: segment texts joined by single newlines, with per-position
// page and section lookup. Joining newlines belong to the preceding segment.
// ---------------------------------------------------------------------------

struct WorkingStream {
    struct Span {
        std::size_t begin_cp = 0;
        std::size_t end_cp = 0;
        int page = 0;
        std::optional<std::string> section;
    };

    std::string bytes;
    std::vector<std::size_t> cp_byte;  // code point -> byte offset, plus sentinel
    std::vector<Span> spans;           // contiguous cover of [0, size())

    std::size_t size() const { return cp_byte.empty() ? 0 : cp_byte.size() - 1; }

    char char_at(std::size_t cp) const { return bytes[cp_byte[cp]]; }

    std::string slice(std::size_t begin_cp_, std::size_t end_cp_) const {
        return bytes.substr(cp_byte[begin_cp_], cp_byte[end_cp_] - cp_byte[begin_cp_]);
    }

    const Span& span_at(std::size_t cp) const {
        auto it = std::upper_bound(spans.begin(), spans.end(), cp,
                                   [](std::size_t v, const Span& s) { return v < s.end_cp; });
        return *it;
    }

    int page_at(std::size_t cp) const { return span_at(cp).page; }
    const std::optional<std::string>& section_at(std::size_t cp) const {
        return span_at(cp).section;
    }
};

inline WorkingStream build_stream(const std::vector<FlatSegment>& segments) {
    WorkingStream ws;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& seg = segments[i];
        if (seg.text.empty())
            throw Error(Errc::invalid_argument, "flat segment with empty text");
        std::size_t begin = utf8_cp_count(ws.bytes);
        ws.bytes += seg.text;
        if (i + 1 < segments.size()) ws.bytes += '\n';
        std::size_t end = utf8_cp_count(ws.bytes);
        ws.spans.push_back({begin, end, seg.page_number, seg.section_title});
    }
    ws.cp_byte = utf8_cp_offsets(ws.bytes);
    return ws;
}

// ---------------------------------------------------------------------------
// Chunk planning
// ---------------------------------------------------------------------------

struct ChunkSpan {
    std::size_t begin_cp = 0;
    std::size_t end_cp = 0;
};

namespace detail {

// Positions p where the attribute differs between p-1 and p, in ascending
// order. Derived from span boundaries, so cost is O(#segments).
inline std::vector<std::size_t> section_change_positions(const WorkingStream& ws) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < ws.spans.size(); ++i)
        if (ws.spans[i].section != ws.spans[i - 1].section) out.push_back(ws.spans[i].begin_cp);
    return out;
}

inline std::vector<std::size_t> page_change_positions(const WorkingStream& ws) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i < ws.spans.size(); ++i)
        if (ws.spans[i].page != ws.spans[i - 1].page) out.push_back(ws.spans[i].begin_cp);
    return out;
}

// Candidate in [lo, hi] closest to target; ties go to the later position.
inline std::optional<std::size_t> pick_near_target(const std::vector<std::size_t>& sorted,
                                                   std::size_t lo, std::size_t hi,
                                                   std::size_t target) {
    auto first = std::lower_bound(sorted.begin(), sorted.end(), lo);
    auto last = std::upper_bound(sorted.begin(), sorted.end(), hi);
    if (first == last) return std::nullopt;
    auto at_or_above = std::lower_bound(first, last, target);
    std::optional<std::size_t> best;
    auto dist = [&](std::size_t p) { return p >= target ? p - target : target - p; };
    if (at_or_above != last) best = *at_or_above;
    if (at_or_above != first) {
        std::size_t below = *(at_or_above - 1);
        if (!best || dist(below) < dist(*best)) best = below;
    }
    return best;
}

// Sentence boundary directly before position p: ". ", "? ", "! ", or a
// newline. ASCII markers only, so code point checks are byte checks.
inline bool sentence_boundary_before(const WorkingStream& ws, std::size_t p) {
    if (p == 0) return false;
    char prev = ws.char_at(p - 1);
    if (prev == '\n') return true;
    if (prev == ' ' && p >= 2) {
        char punct = ws.char_at(p - 2);
        return punct == '.' || punct == '?' || punct == '!';
    }
    return false;
}

inline std::optional<std::size_t> pick_sentence_near_target(const WorkingStream& ws,
                                                            std::size_t lo, std::size_t hi,
                                                            std::size_t target) {
    std::optional<std::size_t> best;
    auto dist = [&](std::size_t p) { return p >= target ? p - target : target - p; };
    for (std::size_t p = lo; p <= hi; ++p) {
        if (!sentence_boundary_before(ws, p)) continue;
        if (!best || dist(p) < dist(*best) || (dist(p) == dist(*best) && p > *best)) best = p;
    }
    return best;
}

}  // namespace detail

// Greedy segmentation. Cut preference, in priority order: first section-title
// change at least min_len into the chunk (such a cut takes no overlap); if the
// remainder fits max_len, it becomes the final chunk; otherwise the page break
// or sentence boundary nearest target_len; else a hard cut at max_len. Each
// following chunk starts overlap_len before the previous cut.
inline std::vector<ChunkSpan> plan_chunks(const WorkingStream& ws, const ChunkingConfig& cfg) {
    validate(cfg);
    std::vector<ChunkSpan> out;
    const std::size_t n = ws.size();
    if (n == 0) return out;

    const auto section_changes = detail::section_change_positions(ws);
    const auto page_changes = detail::page_change_positions(ws);

    std::size_t start = 0;
    while (true) {
        std::size_t limit = std::min(start + cfg.max_len, n);
        std::size_t lo = start + cfg.min_len;

        std::optional<std::size_t> section_cut;
        if (lo <= limit) {
            auto it = std::lower_bound(section_changes.begin(), section_changes.end(), lo);
            if (it != section_changes.end() && *it <= limit) section_cut = *it;
        }
        if (section_cut) {
            out.push_back({start, *section_cut});
            start = *section_cut;  // no overlap across sections
            if (start >= n) break;
            continue;
        }

        if (n - start <= cfg.max_len) {
            out.push_back({start, n});
            break;
        }

        std::size_t target = start + cfg.target_len;
        std::optional<std::size_t> cut = detail::pick_near_target(page_changes, lo, limit, target);
        if (!cut) cut = detail::pick_sentence_near_target(ws, lo, limit, target);
        if (!cut) cut = limit;  // hard cut at max_len

        out.push_back({start, *cut});
        start = *cut >= cfg.overlap_len ? *cut - cfg.overlap_len : 0;
    }
    return out;
}

inline Chunk materialize_chunk(const WorkingStream& ws, const ChunkSpan& span,
                               const std::string& doc_id) {
    Chunk c;
    c.doc_id = doc_id;
    c.text = ws.slice(span.begin_cp, span.end_cp);
    c.char_len = span.end_cp - span.begin_cp;
    c.page_start = ws.page_at(span.begin_cp);
    c.page_end = ws.page_at(span.end_cp - 1);
    c.section_title = ws.section_at(span.begin_cp);
    return c;
}

// Full per-document chunking. Segments must share one doc_id and be in
// document order. An empty segment list yields an empty chunk list.
inline std::vector<Chunk> chunk_document(const std::vector<FlatSegment>& segments,
                                         const ChunkingConfig& cfg) {
    validate(cfg);
    std::vector<Chunk> chunks;
    if (segments.empty()) return chunks;
    const std::string& doc_id = segments.front().doc_id;
    for (const auto& seg : segments)
        if (seg.doc_id != doc_id)
            throw Error(Errc::invalid_argument, "segments span multiple doc_ids");

    WorkingStream ws = build_stream(segments);
    for (const auto& span : plan_chunks(ws, cfg))
        chunks.push_back(materialize_chunk(ws, span, doc_id));
    return chunks;
}

// Per-document sequential ids c0000, c0001, ... in emission order.
inline std::vector<Chunk> assign_chunk_ids(std::vector<Chunk> chunks) {
    if (chunks.size() > 9999)
        throw Error(Errc::chunk_id_overflow,
                    "document yields " + std::to_string(chunks.size()) +
                        " chunks; per-document id space ends at c9999");
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "c%04zu", i);
        chunks[i].chunk_id = buf;
    }
    return chunks;
}

}  // namespace citeguard
