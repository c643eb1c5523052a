#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "citeguard/core.hpp"
#include "citeguard/embedding.hpp"
#include "citeguard/errors.hpp"
#include "citeguard/index.hpp"
#include "citeguard/text_util.hpp"

namespace citeguard {

struct RetrievalConfig {
    std::size_t k = 5;
    double tau = 0.55;
};

inline void validate(const RetrievalConfig& cfg) {
    if (cfg.k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
    if (!(cfg.tau >= -1.0 && cfg.tau <= 1.0))
        throw Error(Errc::invalid_argument, "tau must be in [-1, 1]");
}

// ---------------------------------------------------------------------------
// Chunk store
// ---------------------------------------------------------------------------

inline nlohmann::json chunk_to_json(const Chunk& c) {
    nlohmann::json j{{"chunk_id", c.chunk_id}, {"doc_id", c.doc_id},
                     {"page_start", c.page_start}, {"page_end", c.page_end},
                     {"text", c.text}, {"char_len", c.char_len}};
    if (c.section_title) j["section_title"] = *c.section_title;
    return j;
}

inline Chunk chunk_from_json(const nlohmann::json& j) {
    Chunk c;
    try {
        c.chunk_id = j.at("chunk_id").get<std::string>();
        c.doc_id = j.at("doc_id").get<std::string>();
        c.page_start = j.at("page_start").get<int>();
        c.page_end = j.at("page_end").get<int>();
        c.text = j.at("text").get<std::string>();
        c.char_len = j.at("char_len").get<std::size_t>();
        if (j.contains("section_title") && !j["section_title"].is_null())
            c.section_title = j["section_title"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_record, std::string("chunk: ") + e.what());
    }
    if (!is_valid_identifier(c.chunk_id) || !is_valid_identifier(c.doc_id))
        throw Error(Errc::malformed_record, "chunk has invalid identifiers");
    if (c.text.empty() || c.page_start < 1 || c.page_start > c.page_end)
        throw Error(Errc::malformed_record, "chunk violates invariants");
    if (c.char_len != utf8_cp_count(c.text))
        throw Error(Errc::malformed_record, "chunk char_len inconsistent with text");
    return c;
}

// In-memory view of chunks.jsonl with (doc_id, chunk_id) lookup.
class ChunkStore {
   public:
    static ChunkStore load(const std::filesystem::path& chunks_jsonl) {
        std::ifstream in(chunks_jsonl, std::ios::binary);
        if (!in) throw Error(Errc::io_error, "cannot open " + chunks_jsonl.string());
        ChunkStore store;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::malformed_record, std::string("chunks.jsonl: ") + e.what());
            }
            store.add(chunk_from_json(j));
        }
        return store;
    }

    void add(Chunk c) {
        auto key = std::make_pair(c.doc_id, c.chunk_id);
        if (index_.count(key))
            throw Error(Errc::duplicate_chunk_ref, c.doc_id + "/" + c.chunk_id);
        index_[key] = chunks_.size();
        chunks_.push_back(std::move(c));
    }

    const Chunk* find(const std::string& doc_id, const std::string& chunk_id) const {
        auto it = index_.find({doc_id, chunk_id});
        return it == index_.end() ? nullptr : &chunks_[it->second];
    }

    const std::vector<Chunk>& chunks() const { return chunks_; }
    std::size_t size() const { return chunks_.size(); }

   private:
    std::vector<Chunk> chunks_;
    std::map<std::pair<std::string, std::string>, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Retrieval
// ---------------------------------------------------------------------------

// Top-k evidence for a query, resolved to chunk text and metadata, ordered by
// descending score.
inline std::vector<ScoredChunk> retrieve(const std::string& query, const VectorIndex& ix,
                                         const ChunkStore& chunks, EmbeddingProvider& embedder,
                                         const RetrievalConfig& cfg) {
    validate(cfg);
    if (query.empty()) throw Error(Errc::invalid_argument, "empty query");
    if (ix.size() == 0) return {};
    auto vectors = embedder.embed({query});
    if (vectors.size() != 1) throw Error(Errc::provider_bad_response, "expected one vector");
    std::vector<ScoredChunk> out;
    for (const auto& hit : ix.search(vectors.front(), cfg.k)) {
        const RowMeta& m = ix.row(hit.row_id);
        const Chunk* c = chunks.find(m.doc_id, m.chunk_id);
        if (!c)
            throw Error(Errc::store_error,
                        "index row " + std::to_string(hit.row_id) + " references missing chunk " +
                            m.doc_id + "/" + m.chunk_id);
        out.push_back(ScoredChunk{*c, hit.score});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Abstention policy
// ---------------------------------------------------------------------------

struct Proceed {
    std::vector<ScoredChunk> evidence;
    double top1 = 0.0;
};

struct AbstainLow {
    std::vector<ScoredChunk> partial_evidence;
    double top1 = 0.0;
};

struct AbstainEmpty {};

using RetrievalOutcome = std::variant<Proceed, AbstainLow, AbstainEmpty>;

// Threshold decision on the top-1 score. Equality proceeds: a top-1 exactly
// at tau counts as sufficiently grounded.
inline RetrievalOutcome decide(std::vector<ScoredChunk> evidence, const RetrievalConfig& cfg) {
    validate(cfg);
    if (evidence.empty()) return AbstainEmpty{};
    double top1 = evidence.front().score;
    if (top1 < cfg.tau) return AbstainLow{std::move(evidence), top1};
    return Proceed{std::move(evidence), top1};
}

namespace detail {

inline constexpr std::size_t kAbstentionCitationCap = 3;
inline constexpr std::size_t kAbstentionSnippetCap = 200;  // code points

inline std::string format_score(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", s);
    return buf;
}

}  // namespace detail

// Plain-language abstention message. With partial evidence, up to three of
// the closest chunks are cited with short verbatim snippets so an analyst can
// see what was considered and why it was not enough.
inline Abstained compose_abstention(const AbstainLow& outcome) {
    Abstained a;
    a.reason = AbstainReason::low_similarity;
    std::string msg =
        "Unable to answer: there is insufficient document support for this question "
        "(best retrieval similarity " +
        detail::format_score(outcome.top1) + " fell below the abstention threshold).";
    if (!outcome.partial_evidence.empty()) {
        msg += " The closest passages retrieved were:";
        std::size_t shown =
            std::min(detail::kAbstentionCitationCap, outcome.partial_evidence.size());
        for (std::size_t i = 0; i < shown; ++i) {
            const auto& sc = outcome.partial_evidence[i];
            msg += "\n- ";
            msg += render_citation(citation_of(sc.chunk));
            msg += " \"";
            msg += utf8_prefix(sc.chunk.text, detail::kAbstentionSnippetCap);
            msg += '"';
        }
        msg += "\nthese passages were not similar enough to ground an answer.";
    }
    a.message = std::move(msg);
    a.partial_evidence = outcome.partial_evidence;
    return a;
}

inline Abstained compose_abstention(const AbstainEmpty&) {
    Abstained a;
    a.reason = AbstainReason::no_evidence;
    a.message =
        "Unable to answer: no relevant documents were found in the corpus, so there is "
        "insufficient document support for this question.";
    return a;
}

}  // namespace citeguard
