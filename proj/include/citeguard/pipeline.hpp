#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "citeguard/core.hpp"
#include "citeguard/embedding.hpp"
#include "citeguard/generation.hpp"
#include "citeguard/index.hpp"
#include "citeguard/retrieval.hpp"

namespace citeguard {

// Everything one query needs: an immutable index + chunk store and the two
// providers. Stateless across queries.
struct PipelineHandles {
    const VectorIndex& index;
    const ChunkStore& chunks;
    EmbeddingProvider& embedder;
    TextGenerator& generator;
    RetrievalConfig retrieval;
    GenConfig generation;
};

struct QueryResult {
    SystemResponse response;
    std::optional<double> top1_score;
    int attempts_used = 0;  // generator calls; 0 when abstained before generation
};

// retrieve -> decide -> (generate under citation enforcement | abstain)
inline QueryResult answer_query(const std::string& query, const PipelineHandles& h) {
    auto evidence = retrieve(query, h.index, h.chunks, h.embedder, h.retrieval);
    QueryResult result;
    if (!evidence.empty()) result.top1_score = evidence.front().score;
    RetrievalOutcome outcome = decide(std::move(evidence), h.retrieval);
    if (auto* proceed = std::get_if<Proceed>(&outcome)) {
        result.response = answer_with_enforcement(query, *proceed, h.generator, h.generation,
                                                  &result.attempts_used);
    } else if (auto* low = std::get_if<AbstainLow>(&outcome)) {
        result.response = compose_abstention(*low);
    } else {
        result.response = compose_abstention(std::get<AbstainEmpty>(outcome));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Canonical response body, shared verbatim by `query --json`, the HTTP
// service, and records.jsonl.
// ---------------------------------------------------------------------------

inline nlohmann::json evidence_to_json(const std::vector<ScoredChunk>& evidence) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& sc : evidence)
        arr.push_back({{"citation", render_citation(citation_of(sc.chunk))},
                       {"score", sc.score}});
    return arr;
}

inline nlohmann::json response_to_json(const QueryResult& r) {
    nlohmann::json j;
    if (const auto* ans = std::get_if<Answered>(&r.response)) {
        j["status"] = "answered";
        nlohmann::json paragraphs = nlohmann::json::array();
        for (const auto& p : ans->paragraphs) {
            nlohmann::json citations = nlohmann::json::array();
            for (const auto& c : p.citations) citations.push_back(render_citation(c));
            paragraphs.push_back({{"text", p.text}, {"citations", citations}});
        }
        j["paragraphs"] = paragraphs;
        j["evidence"] = evidence_to_json(ans->evidence);
    } else {
        const auto& ab = std::get<Abstained>(r.response);
        j["status"] = "abstained";
        j["reason"] = std::string(abstain_reason_name(ab.reason));
        j["message"] = ab.message;
        j["evidence"] = evidence_to_json(ab.partial_evidence);
    }
    if (r.top1_score) j["top1_score"] = *r.top1_score;
    if (r.attempts_used > 0) j["attempts_used"] = r.attempts_used;
    return j;
}

}  // namespace citeguard
