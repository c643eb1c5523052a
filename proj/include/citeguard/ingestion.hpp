#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "citeguard/core.hpp"
#include "citeguard/errors.hpp"
#include "citeguard/text_util.hpp"

namespace citeguard {

// ---------------------------------------------------------------------------
// Flattened stream segments
// ---------------------------------------------------------------------------

enum class SegmentOrigin { text, table, image_text };

inline std::string_view segment_origin_name(SegmentOrigin o) {
    switch (o) {
        case SegmentOrigin::text: return "text";
        case SegmentOrigin::table: return "table";
        case SegmentOrigin::image_text: return "image_text";
    }
    return "unknown";
}

// One non-empty linearized block, stamped with its provenance.
struct FlatSegment {
    std::string doc_id;
    int page_number = 0;
    std::optional<std::string> section_title;
    std::string text;
    SegmentOrigin origin = SegmentOrigin::text;
};

struct FlattenStats {
    int dropped_blocks = 0;  // whitespace-only blocks skipped
};

// ---------------------------------------------------------------------------
// Linearization
// ---------------------------------------------------------------------------

// One sentence-style line per row, restating every header:
//   <h1>: <v1>; <h2>: <v2>; ...; <hk>: <vk>.
// Empty cells render as "<h>: (blank)". Short rows are padded; wider rows
// are an error. Caption, when present and non-blank, becomes the first line.
inline std::string linearize_table(const TableBlock& t) {
    if (t.headers.empty()) throw Error(Errc::empty_headers, "table has no headers");
    std::string out;
    if (t.caption && !is_whitespace_only(*t.caption)) {
        out += *t.caption;
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() > t.headers.size())
            throw Error(Errc::row_wider_than_header,
                        "row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                            " cells for " + std::to_string(t.headers.size()) + " headers");
        if (!out.empty()) out += '\n';
        for (std::size_t i = 0; i < t.headers.size(); ++i) {
            if (i > 0) out += "; ";
            out += t.headers[i];
            out += ": ";
            const std::string* cell = i < row.size() ? &row[i] : nullptr;
            if (cell && !cell->empty())
                out += *cell;
            else
                out += "(blank)";
        }
        out += '.';
    }
    return out;
}

// Text -> verbatim text; Table -> row sentences; ImageText -> OCR text with
// the spatial descriptor appended in parentheses. Whitespace-only content
// yields nullopt (the block is dropped from the stream).
inline std::optional<std::string> linearize_block(const ContentBlock& b) {
    if (const auto* t = std::get_if<TextBlock>(&b)) {
        if (is_whitespace_only(t->text)) return std::nullopt;
        return t->text;
    }
    if (const auto* t = std::get_if<TableBlock>(&b)) {
        if (t->headers.empty()) return std::nullopt;  // content-free degenerate table
        std::string s = linearize_table(*t);
        if (is_whitespace_only(s)) return std::nullopt;
        return s;
    }
    const auto& img = std::get<ImageTextBlock>(b);
    if (is_whitespace_only(img.ocr_text)) return std::nullopt;
    std::string s = img.ocr_text;
    if (img.descriptor && !is_whitespace_only(*img.descriptor)) {
        s += " (";
        s += *img.descriptor;
        s += ')';
    }
    return s;
}

// In-order linearization of all non-empty blocks. Section titles carry
// forward across blocks within a page and reset at page boundaries.
inline std::vector<FlatSegment> flatten_document(const DocumentRecord& d,
                                                 FlattenStats* stats = nullptr) {
    std::vector<FlatSegment> segments;
    for (const auto& page : d.pages) {
        std::optional<std::string> section;
        for (const auto& block : page.blocks) {
            if (const auto* t = std::get_if<TextBlock>(&block)) {
                if (t->section_title) section = t->section_title;
            }
            auto text = linearize_block(block);
            if (!text) {
                if (stats) ++stats->dropped_blocks;
                continue;
            }
            SegmentOrigin origin = SegmentOrigin::text;
            if (std::holds_alternative<TableBlock>(block)) origin = SegmentOrigin::table;
            if (std::holds_alternative<ImageTextBlock>(block)) origin = SegmentOrigin::image_text;
            segments.push_back(FlatSegment{d.doc_id, page.page_number, section,
                                           std::move(*text), origin});
        }
    }
    return segments;
}

// ---------------------------------------------------------------------------
// Document interchange format (DIF)
// ---------------------------------------------------------------------------
//
// One UTF-8 JSON file per document:
//   {"doc_id": str, "authority": str, "doc_type": str, "title": str,
//    "pages": [{"page_number": int, "blocks": [
//        {"kind":"text","text":str,"section_title":str?}
//      | {"kind":"table","headers":[str],"rows":[[str]],"caption":str?}
//      | {"kind":"image_text","ocr_text":str,"descriptor":str?} ]}]}
// Unknown keys are rejected unless lenient is set.

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<std::string_view> known,
                       bool lenient, const std::string& where) {
    if (lenient) return;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (auto k : known) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok)
            throw Error(Errc::malformed_file, where + ": unknown key \"" + it.key() + "\"");
    }
}

inline std::string require_string(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        throw Error(Errc::malformed_file, where + ": missing string \"" + key + "\"");
    return it->get<std::string>();
}

inline std::optional<std::string> optional_string(const json& obj, const char* key,
                                                  const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string())
        throw Error(Errc::malformed_file, where + ": \"" + key + "\" must be a string");
    return it->get<std::string>();
}

inline ContentBlock parse_block(const json& jb, bool lenient, const std::string& where) {
    if (!jb.is_object()) throw Error(Errc::malformed_file, where + ": block must be an object");
    std::string kind = require_string(jb, "kind", where);
    if (kind == "text") {
        check_keys(jb, {"kind", "text", "section_title"}, lenient, where);
        TextBlock b;
        b.text = require_string(jb, "text", where);
        b.section_title = optional_string(jb, "section_title", where);
        return b;
    }
    if (kind == "table") {
        check_keys(jb, {"kind", "headers", "rows", "caption"}, lenient, where);
        TableBlock b;
        auto hs = jb.find("headers");
        if (hs == jb.end() || !hs->is_array())
            throw Error(Errc::malformed_file, where + ": missing array \"headers\"");
        for (const auto& h : *hs) {
            if (!h.is_string())
                throw Error(Errc::malformed_file, where + ": headers must be strings");
            b.headers.push_back(h.get<std::string>());
        }
        auto rs = jb.find("rows");
        if (rs == jb.end() || !rs->is_array())
            throw Error(Errc::malformed_file, where + ": missing array \"rows\"");
        for (const auto& jr : *rs) {
            if (!jr.is_array())
                throw Error(Errc::malformed_file, where + ": rows must be arrays");
            std::vector<std::string> row;
            for (const auto& cell : jr) {
                if (!cell.is_string())
                    throw Error(Errc::malformed_file, where + ": cells must be strings");
                row.push_back(cell.get<std::string>());
            }
            b.rows.push_back(std::move(row));
        }
        b.caption = optional_string(jb, "caption", where);
        return b;
    }
    if (kind == "image_text") {
        check_keys(jb, {"kind", "ocr_text", "descriptor"}, lenient, where);
        ImageTextBlock b;
        b.ocr_text = require_string(jb, "ocr_text", where);
        b.descriptor = optional_string(jb, "descriptor", where);
        return b;
    }
    throw Error(Errc::malformed_file, where + ": unknown block kind \"" + kind + "\"");
}

}  // namespace detail

// Parse and validate a DIF document. Page numbers must start at 1 and be
// strictly increasing; rows wider than headers fail, shorter rows are padded.
inline DocumentRecord parse_dif(const nlohmann::json& j, bool lenient = false,
                                const std::string& source = "<memory>") {
    using detail::check_keys;
    using detail::require_string;
    if (!j.is_object()) throw Error(Errc::malformed_file, source + ": root must be an object");
    check_keys(j, {"doc_id", "authority", "doc_type", "title", "pages"}, lenient, source);

    DocumentRecord d;
    d.doc_id = require_string(j, "doc_id", source);
    if (!is_valid_identifier(d.doc_id))
        throw Error(Errc::bad_doc_id, source + ": \"" + d.doc_id + "\"");
    d.authority = require_string(j, "authority", source);
    d.doc_type = require_string(j, "doc_type", source);
    d.title = require_string(j, "title", source);

    auto pages = j.find("pages");
    if (pages == j.end() || !pages->is_array())
        throw Error(Errc::malformed_file, source + ": missing array \"pages\"");

    int prev_page = 0;
    for (const auto& jp : *pages) {
        if (!jp.is_object())
            throw Error(Errc::malformed_file, source + ": page must be an object");
        check_keys(jp, {"page_number", "blocks"}, lenient, source);
        auto pn = jp.find("page_number");
        if (pn == jp.end() || !pn->is_number_integer())
            throw Error(Errc::malformed_file, source + ": missing integer \"page_number\"");
        PageRecord page;
        page.page_number = pn->get<int>();
        if (page.page_number == prev_page)
            throw Error(Errc::duplicate_page,
                        source + ": page " + std::to_string(page.page_number));
        if (prev_page == 0 && page.page_number != 1)
            throw Error(Errc::malformed_file, source + ": pages must start at 1");
        if (page.page_number < prev_page)
            throw Error(Errc::malformed_file,
                        source + ": page ordering violated at page " +
                            std::to_string(page.page_number));
        prev_page = page.page_number;

        auto blocks = jp.find("blocks");
        if (blocks == jp.end() || !blocks->is_array())
            throw Error(Errc::malformed_file, source + ": missing array \"blocks\"");
        std::string where =
            source + " (page " + std::to_string(page.page_number) + ")";
        for (const auto& jb : *blocks) {
            ContentBlock b = detail::parse_block(jb, lenient, where);
            if (auto* t = std::get_if<TableBlock>(&b)) {
                for (std::size_t r = 0; r < t->rows.size(); ++r) {
                    if (t->rows[r].size() > t->headers.size())
                        throw Error(Errc::row_wider_than_header,
                                    where + ": row " + std::to_string(r));
                    t->rows[r].resize(t->headers.size());
                }
            }
            page.blocks.push_back(std::move(b));
        }
        d.pages.push_back(std::move(page));
    }
    return d;
}

inline DocumentRecord load_dif(const std::filesystem::path& path, bool lenient = false) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_file, path.string() + ": " + e.what());
    }
    return parse_dif(j, lenient, path.filename().string());
}

}  // namespace citeguard
