#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "citeguard/core.hpp"
#include "citeguard/errors.hpp"
#include "citeguard/generation.hpp"
#include "citeguard/pipeline.hpp"

namespace citeguard {

// ---------------------------------------------------------------------------
// Query sets and labels (JSON-lines, schema-versioned, strict)
// ---------------------------------------------------------------------------

struct QueryRecord {
    std::string query_id;
    std::string text;
    std::optional<std::string> jurisdiction;
    std::optional<std::string> category;
};

struct HumanLabel {
    std::string query_id;
    std::optional<bool> citation_correct;
    std::optional<bool> unsupported_claim;
    std::optional<bool> abstention_correct;
    std::optional<int> helpfulness;  // 1..5
};

namespace detail {

inline nlohmann::json parse_jsonl_line(const std::string& line, const std::string& where) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_record, where + ": " + e.what());
    }
}

inline void require_schema(const nlohmann::json& j, const std::string& where) {
    if (!j.contains("schema") || j["schema"] != kSchemaVersion)
        throw Error(Errc::malformed_record,
                    where + ": missing or wrong \"schema\" (want \"" +
                        std::string(kSchemaVersion) + "\")");
}

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<std::string_view> known,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (auto k : known)
            if (it.key() == k) ok = true;
        if (!ok)
            throw Error(Errc::malformed_record, where + ": unknown key \"" + it.key() + "\"");
    }
}

template <typename Fn>
inline void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        fn(parse_jsonl_line(line, path.filename().string() + ":" + std::to_string(lineno)),
           lineno);
    }
}

}  // namespace detail

inline std::vector<QueryRecord> load_queries(const std::filesystem::path& path) {
    std::vector<QueryRecord> out;
    std::set<std::string> seen;
    detail::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
        std::string where = path.filename().string();
        detail::require_schema(j, where);
        detail::reject_unknown_keys(j, {"schema", "query_id", "text", "jurisdiction", "category"},
                                    where);
        QueryRecord q;
        try {
            q.query_id = j.at("query_id").get<std::string>();
            q.text = j.at("text").get<std::string>();
            if (j.contains("jurisdiction") && !j["jurisdiction"].is_null())
                q.jurisdiction = j["jurisdiction"].get<std::string>();
            if (j.contains("category") && !j["category"].is_null())
                q.category = j["category"].get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::malformed_record, where + ": " + e.what());
        }
        if (q.query_id.empty() || q.text.empty())
            throw Error(Errc::malformed_record, where + ": query_id and text must be non-empty");
        if (!seen.insert(q.query_id).second)
            throw Error(Errc::duplicate_query_id, q.query_id);
        out.push_back(std::move(q));
    });
    return out;
}

inline std::vector<HumanLabel> load_labels(const std::filesystem::path& path) {
    std::vector<HumanLabel> out;
    std::set<std::string> seen;
    detail::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
        std::string where = path.filename().string();
        detail::require_schema(j, where);
        detail::reject_unknown_keys(j,
                                    {"schema", "query_id", "citation_correct",
                                     "unsupported_claim", "abstention_correct", "helpfulness"},
                                    where);
        HumanLabel l;
        try {
            l.query_id = j.at("query_id").get<std::string>();
            if (j.contains("citation_correct") && !j["citation_correct"].is_null())
                l.citation_correct = j["citation_correct"].get<bool>();
            if (j.contains("unsupported_claim") && !j["unsupported_claim"].is_null())
                l.unsupported_claim = j["unsupported_claim"].get<bool>();
            if (j.contains("abstention_correct") && !j["abstention_correct"].is_null())
                l.abstention_correct = j["abstention_correct"].get<bool>();
            if (j.contains("helpfulness") && !j["helpfulness"].is_null())
                l.helpfulness = j["helpfulness"].get<int>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::malformed_record, where + ": " + e.what());
        }
        if (l.helpfulness && (*l.helpfulness < 1 || *l.helpfulness > 5))
            throw Error(Errc::malformed_record, where + ": helpfulness must be 1..5");
        if (!seen.insert(l.query_id).second)
            throw Error(Errc::duplicate_query_id, "label for " + l.query_id + " appears twice");
        out.push_back(std::move(l));
    });
    return out;
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

// The response is kept in its canonical serialized form; metrics replay it
// from there, which is exactly what a later audit would do.
struct RunRecord {
    std::string query_id;
    nlohmann::json response;
    std::optional<double> top1_score;
    int attempts_used = 0;
    std::int64_t wall_ms = 0;
    std::optional<std::string> error;  // operational failure, query skipped
};

inline nlohmann::json run_record_to_json(const RunRecord& r) {
    nlohmann::json j{{"schema", kSchemaVersion},
                     {"query_id", r.query_id},
                     {"response", r.response},
                     {"attempts_used", r.attempts_used},
                     {"wall_ms", r.wall_ms}};
    if (r.top1_score) j["top1_score"] = *r.top1_score;
    if (r.error) j["error"] = *r.error;
    return j;
}

inline RunRecord run_record_from_json(const nlohmann::json& j, const std::string& where) {
    detail::require_schema(j, where);
    detail::reject_unknown_keys(
        j, {"schema", "query_id", "response", "top1_score", "attempts_used", "wall_ms", "error"},
        where);
    RunRecord r;
    try {
        r.query_id = j.at("query_id").get<std::string>();
        r.response = j.at("response");
        r.attempts_used = j.at("attempts_used").get<int>();
        r.wall_ms = j.at("wall_ms").get<std::int64_t>();
        if (j.contains("top1_score")) r.top1_score = j["top1_score"].get<double>();
        if (j.contains("error")) r.error = j["error"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_record, where + ": " + e.what());
    }
    return r;
}

inline void save_records(const std::vector<RunRecord>& records,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    for (const auto& r : records) out << run_record_to_json(r).dump() << '\n';
    if (!out) throw Error(Errc::io_error, "short write to " + path.string());
}

inline std::vector<RunRecord> load_records(const std::filesystem::path& path) {
    std::vector<RunRecord> out;
    detail::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t lineno) {
        out.push_back(run_record_from_json(
            j, path.filename().string() + ":" + std::to_string(lineno)));
    });
    return out;
}

// One record per query, in set order. Per-query failures are captured in the
// record rather than aborting the batch. Wall time is recorded only when
// measure_wall_time is set, keeping default runs byte-reproducible.
inline std::vector<RunRecord> run_queries(const std::vector<QueryRecord>& queries,
                                          const PipelineHandles& handles,
                                          bool measure_wall_time = false) {
    std::vector<RunRecord> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
        RunRecord r;
        r.query_id = q.query_id;
        auto start = std::chrono::steady_clock::now();
        try {
            QueryResult qr = answer_query(q.text, handles);
            r.response = response_to_json(qr);
            r.top1_score = qr.top1_score;
            r.attempts_used = qr.attempts_used;
        } catch (const Error& e) {
            r.error = e.what();
            QueryResult failed;
            Abstained a;
            a.reason = AbstainReason::no_evidence;
            a.message = std::string("Query failed: ") + e.what();
            failed.response = a;
            r.response = response_to_json(failed);
        }
        if (measure_wall_time) {
            auto elapsed = std::chrono::steady_clock::now() - start;
            r.wall_ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct Top1Stats {
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
    std::array<int, 10> histogram{};  // 10 bins over [0,1], last bin closed
};

struct EvalReport {
    std::size_t n_queries = 0;
    std::size_t n_answered = 0;
    std::size_t n_abstained = 0;
    double abstention_rate = 0.0;
    std::optional<double> format_compliance_rate;
    std::optional<Top1Stats> top1_stats;
    // label-derived; absent without labels
    std::size_t n_answered_labeled = 0;
    std::size_t n_abstained_labeled = 0;
    std::optional<double> citation_support_rate;
    std::optional<double> hallucination_rate;
    std::optional<double> abstention_accuracy;
    std::optional<double> mean_helpfulness;
};

namespace detail {

inline bool record_answered(const RunRecord& r) {
    return r.response.contains("status") && r.response["status"] == "answered";
}

// Re-runs structural citation validation from the stored response alone.
inline bool replay_validates(const nlohmann::json& response) {
    if (!response.contains("paragraphs") || !response["paragraphs"].is_array()) return false;
    std::vector<ParsedParagraph> paragraphs;
    for (const auto& jp : response["paragraphs"]) {
        ParsedParagraph p;
        if (!jp.contains("text") || !jp["text"].is_string()) return false;
        p.text = jp["text"].get<std::string>();
        if (!jp.contains("citations") || !jp["citations"].is_array()) return false;
        for (const auto& c : jp["citations"]) {
            if (!c.is_string()) return false;
            p.citation_strings.push_back(c.get<std::string>());
        }
        paragraphs.push_back(std::move(p));
    }
    if (paragraphs.empty()) return false;
    std::vector<EvidenceRef> refs;
    if (!response.contains("evidence") || !response["evidence"].is_array()) return false;
    for (const auto& je : response["evidence"]) {
        if (!je.contains("citation") || !je["citation"].is_string()) return false;
        Citation c;
        try {
            c = parse_citation(je["citation"].get<std::string>());
        } catch (const CitationParseError&) {
            return false;
        }
        refs.push_back({c.doc_id, c.chunk_id, c.page_start, c.page_end});
    }
    return validate_answer(paragraphs, refs).valid();
}

inline double median_of_sorted(const std::vector<double>& sorted) {
    std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

}  // namespace detail

// Metrics derivable from records alone: abstention rate, replayed format
// compliance over answered responses, and the top-1 score distribution.
inline EvalReport auto_metrics(const std::vector<RunRecord>& records) {
    if (records.empty()) throw Error(Errc::invalid_argument, "no records");
    EvalReport rep;
    rep.n_queries = records.size();
    std::vector<double> scores;
    std::size_t compliant = 0;
    for (const auto& r : records) {
        if (detail::record_answered(r)) {
            ++rep.n_answered;
            if (detail::replay_validates(r.response)) ++compliant;
        } else {
            ++rep.n_abstained;
        }
        if (r.top1_score) scores.push_back(*r.top1_score);
    }
    rep.abstention_rate =
        static_cast<double>(rep.n_abstained) / static_cast<double>(rep.n_queries);
    if (rep.n_answered > 0)
        rep.format_compliance_rate =
            static_cast<double>(compliant) / static_cast<double>(rep.n_answered);
    if (!scores.empty()) {
        std::sort(scores.begin(), scores.end());
        Top1Stats st;
        st.min = scores.front();
        st.max = scores.back();
        st.median = detail::median_of_sorted(scores);
        for (double s : scores) {
            int bin = static_cast<int>(std::floor(s * 10.0));
            bin = std::clamp(bin, 0, 9);
            ++st.histogram[static_cast<std::size_t>(bin)];
        }
        rep.top1_stats = st;
    }
    return rep;
}

// Adds the human-label metrics. Labels may cover a subset of queries; each
// present label must carry the fields its record's outcome requires.
// Denominators are the labeled populations only.
inline EvalReport report_metrics(const std::vector<RunRecord>& records,
                                 const std::vector<HumanLabel>& labels) {
    EvalReport rep = auto_metrics(records);
    if (labels.empty()) return rep;

    std::map<std::string, const RunRecord*> by_id;
    for (const auto& r : records) by_id[r.query_id] = &r;

    std::size_t citation_correct = 0;
    std::size_t unsupported = 0;
    std::size_t abstention_correct = 0;
    double helpfulness_sum = 0.0;
    std::size_t helpfulness_n = 0;

    for (const auto& l : labels) {
        auto it = by_id.find(l.query_id);
        if (it == by_id.end()) throw Error(Errc::unknown_query_id, l.query_id);
        bool answered = detail::record_answered(*it->second);
        if (answered) {
            if (!l.citation_correct)
                throw Error(Errc::missing_label, l.query_id + ": citation_correct");
            if (!l.unsupported_claim)
                throw Error(Errc::missing_label, l.query_id + ": unsupported_claim");
            ++rep.n_answered_labeled;
            if (*l.citation_correct) ++citation_correct;
            if (*l.unsupported_claim) ++unsupported;
            if (l.helpfulness) {
                helpfulness_sum += *l.helpfulness;
                ++helpfulness_n;
            }
        } else {
            if (!l.abstention_correct)
                throw Error(Errc::missing_label, l.query_id + ": abstention_correct");
            if (l.helpfulness)
                throw Error(Errc::malformed_record,
                            l.query_id + ": helpfulness is only valid for answered queries");
            ++rep.n_abstained_labeled;
            if (*l.abstention_correct) ++abstention_correct;
        }
    }

    if (rep.n_answered_labeled > 0) {
        rep.citation_support_rate = static_cast<double>(citation_correct) /
                                    static_cast<double>(rep.n_answered_labeled);
        rep.hallucination_rate =
            static_cast<double>(unsupported) / static_cast<double>(rep.n_answered_labeled);
    }
    if (rep.n_abstained_labeled > 0)
        rep.abstention_accuracy = static_cast<double>(abstention_correct) /
                                  static_cast<double>(rep.n_abstained_labeled);
    if (helpfulness_n > 0) rep.mean_helpfulness = helpfulness_sum / helpfulness_n;
    return rep;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

inline std::string render_percent(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", rate * 100.0);
    return buf;
}

inline std::string render_helpfulness(double mean) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f / 5.0", mean);
    return buf;
}

inline nlohmann::json report_to_json(const EvalReport& rep) {
    nlohmann::json j{{"schema", kSchemaVersion},
                     {"n_queries", rep.n_queries},
                     {"n_answered", rep.n_answered},
                     {"n_abstained", rep.n_abstained},
                     {"abstention_rate", rep.abstention_rate}};
    nlohmann::json rendered{{"abstention_rate", render_percent(rep.abstention_rate)}};
    if (rep.format_compliance_rate) {
        j["format_compliance_rate"] = *rep.format_compliance_rate;
        rendered["format_compliance"] = render_percent(*rep.format_compliance_rate);
    }
    if (rep.top1_stats) {
        j["top1_stats"] = {{"min", rep.top1_stats->min},
                           {"median", rep.top1_stats->median},
                           {"max", rep.top1_stats->max},
                           {"histogram", rep.top1_stats->histogram}};
    }
    if (rep.n_answered_labeled > 0 || rep.n_abstained_labeled > 0) {
        j["n_answered_labeled"] = rep.n_answered_labeled;
        j["n_abstained_labeled"] = rep.n_abstained_labeled;
    }
    if (rep.citation_support_rate) {
        j["citation_support_rate"] = *rep.citation_support_rate;
        rendered["citation_support"] = render_percent(*rep.citation_support_rate);
    }
    if (rep.hallucination_rate) {
        j["hallucination_rate"] = *rep.hallucination_rate;
        rendered["hallucination_rate"] = render_percent(*rep.hallucination_rate);
    }
    if (rep.abstention_accuracy) {
        j["abstention_accuracy"] = *rep.abstention_accuracy;
        rendered["abstention_accuracy"] = render_percent(*rep.abstention_accuracy);
    }
    if (rep.mean_helpfulness) {
        j["mean_helpfulness"] = *rep.mean_helpfulness;
        rendered["usefulness"] = render_helpfulness(*rep.mean_helpfulness);
    }
    j["rendered"] = rendered;
    return j;
}

}  // namespace citeguard
