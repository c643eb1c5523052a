#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "citeguard/core.hpp"
#include "citeguard/embedding.hpp"
#include "citeguard/errors.hpp"
#include "citeguard/retrieval.hpp"
#include "citeguard/text_util.hpp"

namespace citeguard {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// Versioned so reruns with the same config are comparable.
inline constexpr std::string_view kReinforcementSuffixV1 =
    "\n\nREINFORCEMENT (citation policy v1): The previous attempt failed citation "
    "validation. Every paragraph MUST include at least one citation token copied exactly "
    "from an evidence header, in the form [doc:<doc_id>|p:<start>-<end>|c:<chunk_id>]. "
    "Do not invent document, page, or chunk identifiers. Do not leave any paragraph "
    "uncited.";

struct GenConfig {
    int max_attempts = 3;
    int max_tokens = 512;
    double temperature = 0.0;
    std::string reinforcement_suffix = std::string(kReinforcementSuffixV1);
};

inline void validate(const GenConfig& cfg) {
    if (cfg.max_attempts < 1) throw Error(Errc::invalid_argument, "max_attempts must be >= 1");
    if (cfg.temperature < 0) throw Error(Errc::invalid_argument, "temperature must be >= 0");
}

// ---------------------------------------------------------------------------
// Prompt construction
// ---------------------------------------------------------------------------

inline constexpr std::string_view kPromptInstructions =
    "You are an analyst assistant answering questions about regulatory and fiscal "
    "documents.\n"
    "Rules:\n"
    "1. Use ONLY the evidence passages below. Do not draw on outside knowledge or "
    "assumptions.\n"
    "2. Write short, clear paragraphs. Every paragraph must include at least one citation "
    "token copied exactly from an evidence header, in the form "
    "[doc:<doc_id>|p:<start>-<end>|c:<chunk_id>].\n"
    "3. If the evidence only partially answers the question, state that limitation "
    "explicitly.\n"
    "4. Never cite a passage that is not listed below.";

// Deterministic evidence-only prompt: instruction block, one evidence block
// per chunk headed by its canonical citation, then the query. From the
// second attempt on, the reinforcement suffix joins the instruction block.
inline std::string build_prompt(const std::string& query,
                                const std::vector<ScoredChunk>& evidence,
                                const GenConfig& cfg = GenConfig{}, int attempt = 1) {
    if (evidence.empty()) throw Error(Errc::empty_evidence, "cannot prompt without evidence");
    std::string prompt(kPromptInstructions);
    if (attempt >= 2) prompt += cfg.reinforcement_suffix;
    prompt += "\n\nEVIDENCE:\n";
    for (const auto& sc : evidence) {
        prompt += render_citation(citation_of(sc.chunk));
        prompt += '\n';
        prompt += sc.chunk.text;
        prompt += "\n\n";
    }
    prompt += "QUESTION: ";
    prompt += query;
    prompt += "\n\nANSWER:\n";
    return prompt;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

class TextGenerator {
   public:
    virtual ~TextGenerator() = default;
    virtual std::string generate(const std::string& prompt, const GenConfig& cfg) = 0;
};

// Wire contract: POST <base_url>/generate
//   request  {"model": str, "prompt": str, "max_tokens": int, "temperature": number}
//   response {"text": str}
class RemoteGenerator final : public TextGenerator {
   public:
    explicit RemoteGenerator(ProviderConfig cfg) : cfg_(std::move(cfg)) {
        if (!cfg_.base_url) throw Error(Errc::invalid_argument, "remote provider needs base_url");
    }

    std::string generate(const std::string& prompt, const GenConfig& cfg) override {
        httplib::Client cli(*cfg_.base_url);
        detail::configure_client(cli, cfg_);
        nlohmann::json req{{"model", cfg_.model_id},
                           {"prompt", prompt},
                           {"max_tokens", cfg.max_tokens},
                           {"temperature", cfg.temperature}};
        auto res = detail::post_with_retries(cli, "/generate", req.dump(), cfg_);
        if (!res) {
            if (res.error() == httplib::Error::ConnectionTimeout ||
                res.error() == httplib::Error::Read || res.error() == httplib::Error::Write)
                throw Error(Errc::provider_timeout, httplib::to_string(res.error()));
            throw Error(Errc::provider_unreachable, httplib::to_string(res.error()));
        }
        if (res->status != 200)
            throw Error(Errc::provider_bad_response,
                        "HTTP " + std::to_string(res->status) + " from /generate");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::provider_bad_response, e.what());
        }
        auto text = j.find("text");
        if (text == j.end() || !text->is_string())
            throw Error(Errc::provider_bad_response, "missing \"text\" field");
        return text->get<std::string>();
    }

   private:
    ProviderConfig cfg_;
};

// Offline deterministic generator: quotes the top evidence block out of the
// prompt and cites it. Enough to drive the pipeline end to end without a
// model.
class MockGenerator final : public TextGenerator {
   public:
    std::string generate(const std::string& prompt, const GenConfig&) override {
        constexpr std::string_view marker = "\nEVIDENCE:\n";
        auto at = prompt.find(marker);
        if (at == std::string::npos) return "No evidence section found.";
        std::size_t header_begin = at + marker.size();
        auto header_end = prompt.find('\n', header_begin);
        if (header_end == std::string::npos) return "No evidence section found.";
        std::string citation = prompt.substr(header_begin, header_end - header_begin);
        auto text_end = prompt.find("\n\n", header_end + 1);
        if (text_end == std::string::npos) text_end = prompt.size();
        std::string snippet = prompt.substr(header_end + 1, text_end - header_end - 1);
        // Single paragraph: collapse whitespace runs so blank lines inside the
        // quoted chunk cannot split it.
        std::string flat;
        bool in_space = false;
        for (char c : snippet) {
            if (is_ascii_space(c)) {
                in_space = true;
                continue;
            }
            if (in_space && !flat.empty()) flat += ' ';
            in_space = false;
            flat += c;
        }
        flat = utf8_prefix(flat, 240);
        return "According to the retrieved guidance: " + flat + " " + citation;
    }
};

// Test generator: replays a fixed response sequence by request ordinal.
class ScriptedGenerator final : public TextGenerator {
   public:
    explicit ScriptedGenerator(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    std::string generate(const std::string&, const GenConfig&) override {
        if (responses_.empty()) throw Error(Errc::provider_bad_response, "script exhausted");
        std::size_t i = std::min(calls_, responses_.size() - 1);
        ++calls_;
        return responses_[i];
    }

    std::size_t calls() const { return calls_; }

   private:
    std::vector<std::string> responses_;
    std::size_t calls_ = 0;
};

inline std::unique_ptr<TextGenerator> make_generator(const ProviderConfig& cfg) {
    if (cfg.kind == ProviderKind::deterministic_mock) return std::make_unique<MockGenerator>();
    return std::make_unique<RemoteGenerator>(cfg);
}

// ---------------------------------------------------------------------------
// Paragraph parsing
// ---------------------------------------------------------------------------

struct ParsedParagraph {
    std::string text;
    std::vector<std::string> citation_strings;
};

namespace detail {

// All bracketed tokens of the shape [doc:...] with no nested brackets. The
// capture is verbatim; whether it parses is validation's concern.
inline std::vector<std::string> extract_citation_strings(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto start = text.find("[doc:", pos);
        if (start == std::string_view::npos) break;
        std::size_t j = start + 5;
        while (j < text.size() && text[j] != ']' && text[j] != '[') ++j;
        if (j < text.size() && text[j] == ']') {
            out.emplace_back(text.substr(start, j - start + 1));
            pos = j + 1;
        } else {
            pos = start + 1;
        }
    }
    return out;
}

}  // namespace detail

// Paragraph = maximal run of non-blank lines; any run of blank lines
// separates paragraphs. CRLF input is normalized to LF.
inline std::vector<ParsedParagraph> parse_paragraphs(const std::string& raw) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : raw) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    lines.push_back(std::move(cur));

    std::vector<ParsedParagraph> out;
    std::string para;
    auto flush = [&] {
        if (para.empty()) return;
        ParsedParagraph p;
        p.text = std::move(para);
        p.citation_strings = detail::extract_citation_strings(p.text);
        out.push_back(std::move(p));
        para.clear();
    };
    for (const auto& line : lines) {
        if (is_blank_line(line)) {
            flush();
        } else {
            if (!para.empty()) para += '\n';
            para += line;
        }
    }
    flush();
    return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class CitationFailure {
    no_citation,
    unparsable_citation,
    citation_not_in_evidence,
    page_out_of_chunk_range,
};

inline std::string_view citation_failure_name(CitationFailure f) {
    switch (f) {
        case CitationFailure::no_citation: return "NoCitation";
        case CitationFailure::unparsable_citation: return "UnparsableCitation";
        case CitationFailure::citation_not_in_evidence: return "CitationNotInEvidence";
        case CitationFailure::page_out_of_chunk_range: return "PageOutOfChunkRange";
    }
    return "unknown";
}

struct ValidationFailure {
    std::size_t paragraph_index = 0;
    CitationFailure reason = CitationFailure::no_citation;
};

struct ValidationResult {
    std::vector<ValidationFailure> failures;

    bool valid() const { return failures.empty(); }
};

// Evidence as citation targets: what validation needs to know about each
// chunk that was in the generation context.
struct EvidenceRef {
    std::string doc_id;
    std::string chunk_id;
    int page_start = 0;
    int page_end = 0;
};

inline std::vector<EvidenceRef> evidence_refs(const std::vector<ScoredChunk>& evidence) {
    std::vector<EvidenceRef> refs;
    refs.reserve(evidence.size());
    for (const auto& sc : evidence)
        refs.push_back({sc.chunk.doc_id, sc.chunk.chunk_id, sc.chunk.page_start,
                        sc.chunk.page_end});
    return refs;
}

// Structural validation only: every paragraph cites, every citation parses,
// resolves to supplied evidence, and stays within that chunk's page range.
inline ValidationResult validate_answer(const std::vector<ParsedParagraph>& paragraphs,
                                        const std::vector<EvidenceRef>& evidence) {
    ValidationResult result;
    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
        const auto& p = paragraphs[i];
        if (p.citation_strings.empty()) {
            result.failures.push_back({i, CitationFailure::no_citation});
            continue;
        }
        for (const auto& s : p.citation_strings) {
            Citation c;
            try {
                c = parse_citation(s);
            } catch (const CitationParseError&) {
                result.failures.push_back({i, CitationFailure::unparsable_citation});
                continue;
            }
            const EvidenceRef* match = nullptr;
            for (const auto& ref : evidence) {
                if (ref.doc_id == c.doc_id && ref.chunk_id == c.chunk_id) {
                    match = &ref;
                    break;
                }
            }
            if (!match) {
                result.failures.push_back({i, CitationFailure::citation_not_in_evidence});
                continue;
            }
            if (c.page_start < match->page_start || c.page_end > match->page_end)
                result.failures.push_back({i, CitationFailure::page_out_of_chunk_range});
        }
    }
    return result;
}

inline ValidationResult validate_answer(const std::vector<ParsedParagraph>& paragraphs,
                                        const std::vector<ScoredChunk>& evidence) {
    return validate_answer(paragraphs, evidence_refs(evidence));
}

// ---------------------------------------------------------------------------
// Enforcement loop
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<AnswerParagraph> to_answer_paragraphs(
    const std::vector<ParsedParagraph>& parsed) {
    std::vector<AnswerParagraph> out;
    out.reserve(parsed.size());
    for (const auto& p : parsed) {
        AnswerParagraph ap;
        ap.text = p.text;
        for (const auto& s : p.citation_strings) ap.citations.push_back(parse_citation(s));
        out.push_back(std::move(ap));
    }
    return out;
}

}  // namespace detail

// Generate-validate loop: up to max_attempts generations, reinforced from the
// second attempt on; the first validated output is returned, otherwise the
// query abstains. Provider transport failures also end in abstention.
// attempts_out, when given, receives the number of generator calls made.
inline SystemResponse answer_with_enforcement(const std::string& query, const Proceed& outcome,
                                              TextGenerator& generator, const GenConfig& cfg,
                                              int* attempts_out = nullptr) {
    validate(cfg);
    if (outcome.evidence.empty()) throw Error(Errc::empty_evidence, "Proceed without evidence");
    auto refs = evidence_refs(outcome.evidence);
    int calls = 0;
    if (attempts_out) *attempts_out = 0;
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        std::string prompt = build_prompt(query, outcome.evidence, cfg, attempt);
        std::string raw;
        try {
            raw = generator.generate(prompt, cfg);
            ++calls;
        } catch (const Error& e) {
            if (attempts_out) *attempts_out = calls;
            Abstained a;
            a.reason = AbstainReason::citation_validation_failed;
            a.message =
                "Unable to answer: the generation provider failed (" + std::string(e.what()) +
                "), so no grounded answer could be produced for this question.";
            a.partial_evidence = outcome.evidence;
            return a;
        }
        auto paragraphs = parse_paragraphs(raw);
        if (paragraphs.empty()) continue;
        if (validate_answer(paragraphs, refs).valid()) {
            if (attempts_out) *attempts_out = calls;
            Answered ans;
            ans.paragraphs = detail::to_answer_paragraphs(paragraphs);
            ans.evidence = outcome.evidence;
            ans.top1_score = outcome.top1;
            ans.attempts_used = calls;
            return ans;
        }
    }
    if (attempts_out) *attempts_out = calls;
    Abstained a;
    a.reason = AbstainReason::citation_validation_failed;
    a.message =
        "Unable to answer: generated text failed citation validation after " +
        std::to_string(cfg.max_attempts) +
        " attempts, so there is insufficient grounding to present an answer.";
    a.partial_evidence = outcome.evidence;
    return a;
}

}  // namespace citeguard
