#pragma once

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <httplib.h>

#include "citeguard/evaluation.hpp"
#include "citeguard/pipeline.hpp"
#include "citeguard/service.hpp"
#include "citeguard/store.hpp"

namespace citeguard {

// Exit code contract, stable for scripting.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAbstained = 3;

namespace detail {

inline std::optional<std::string> env_value(const char* name) {
    const char* v = std::getenv(name);
    if (v && *v) return std::string(v);
    return std::nullopt;
}

// "mock" or a base URL. Precedence: flag > environment > mock.
inline ProviderConfig resolve_provider(const std::optional<std::string>& flag_value,
                                       const char* env_name,
                                       const std::optional<std::string>& model_flag,
                                       const StoreManifest* manifest) {
    ProviderConfig cfg;
    std::optional<std::string> value = flag_value;
    if (!value) value = env_value(env_name);
    if (value && *value != "mock") {
        cfg.kind = ProviderKind::remote;
        cfg.base_url = *value;
    } else {
        cfg.kind = ProviderKind::deterministic_mock;
    }
    if (model_flag)
        cfg.model_id = *model_flag;
    else if (manifest && manifest->model_id)
        cfg.model_id = *manifest->model_id;
    // A mock query embedder must match the indexed dimension.
    if (cfg.kind == ProviderKind::deterministic_mock && manifest && manifest->dim)
        cfg.mock_dim = *manifest->dim;
    return cfg;
}

inline void print_ingest_summary(const IngestSummary& s, std::ostream& out) {
    out << "ingested " << s.docs << " documents, " << s.chunks << " chunks, " << s.warnings
        << " warnings\n";
    out << "  authority        docs   chunks\n";
    for (const auto& [authority, counts] : s.per_authority) {
        char line[128];
        std::snprintf(line, sizeof(line), "  %-15s %5zu %8zu\n", authority.c_str(), counts.docs,
                      counts.chunks);
        out << line;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

struct IngestOptions {
    std::string input_dir;
    std::string store_dir;
    bool lenient = false;
    ChunkingConfig chunking;
};

inline int cmd_ingest(const IngestOptions& opts, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
    try {
        IngestSummary s = ingest_store(opts.input_dir, opts.store_dir, opts.chunking,
                                       opts.lenient);
        detail::print_ingest_summary(s, out);
        return kExitOk;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitError;
    }
}

// ---------------------------------------------------------------------------
// index
// ---------------------------------------------------------------------------

struct IndexOptions {
    std::string store_dir;
    std::string provider = "mock";  // "mock" or a base URL
    std::optional<std::string> model;
    std::optional<std::size_t> mock_dim;
    bool force = false;
};

inline int cmd_index(const IndexOptions& opts, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    try {
        ProviderConfig provider = detail::resolve_provider(
            std::optional<std::string>(opts.provider), "CITEGUARD_EMBED_URL", opts.model, nullptr);
        if (opts.mock_dim) provider.mock_dim = *opts.mock_dim;
        index_store(opts.store_dir, provider, opts.force);
        StoreManifest manifest = read_manifest(opts.store_dir);
        out << "indexed " << manifest.n_chunks << " chunks (dim "
            << (manifest.dim ? std::to_string(*manifest.dim) : "?") << ", model "
            << manifest.model_id.value_or("?") << ")\n";
        return kExitOk;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitError;
    }
}

// ---------------------------------------------------------------------------
// query
// ---------------------------------------------------------------------------

struct QueryOptions {
    std::string store_dir;
    std::string question;
    std::optional<std::size_t> k;
    std::optional<double> tau;
    bool json = false;
    std::optional<std::string> embed_url;  // "mock" or URL; falls back to env
    std::optional<std::string> llm_url;
    std::optional<std::string> model;
};

namespace detail {

inline void print_human_response(const QueryResult& qr, std::ostream& out) {
    if (const auto* ans = std::get_if<Answered>(&qr.response)) {
        for (const auto& p : ans->paragraphs) out << p.text << "\n\n";
        out << "evidence:\n";
        for (const auto& sc : ans->evidence) {
            char line[64];
            std::snprintf(line, sizeof(line), "  score=%.3f ", sc.score);
            out << line << render_citation(citation_of(sc.chunk)) << "\n";
        }
    } else {
        const auto& ab = std::get<Abstained>(qr.response);
        out << ab.message << "\n";
    }
}

}  // namespace detail

inline int cmd_query(const QueryOptions& opts, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    try {
        OpenStore store = open_store(opts.store_dir);
        RetrievalConfig rcfg;
        if (opts.k) rcfg.k = *opts.k;
        if (opts.tau) rcfg.tau = *opts.tau;
        validate(rcfg);
        ProviderConfig embed_cfg = detail::resolve_provider(opts.embed_url, "CITEGUARD_EMBED_URL",
                                                            opts.model, &store.manifest);
        ProviderConfig gen_cfg = detail::resolve_provider(opts.llm_url, "CITEGUARD_LLM_URL",
                                                          opts.model, &store.manifest);
        auto embedder = make_embedder(embed_cfg);
        auto generator = make_generator(gen_cfg);
        GenConfig gcfg;
        PipelineHandles handles{store.index, store.chunks, *embedder, *generator, rcfg, gcfg};
        QueryResult qr = answer_query(opts.question, handles);
        if (opts.json)
            out << response_to_json(qr).dump() << "\n";
        else
            detail::print_human_response(qr, out);
        return is_answered(qr.response) ? kExitOk : kExitAbstained;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitError;
    }
}

// ---------------------------------------------------------------------------
// serve
// ---------------------------------------------------------------------------

struct ServeOptions {
    std::string store_dir;
    int port = 8080;
    std::optional<std::string> embed_url;
    std::optional<std::string> llm_url;
    std::optional<std::string> model;
    std::optional<double> tau;
    std::optional<std::size_t> k;
};

inline int cmd_serve(const ServeOptions& opts, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    try {
        OpenStore store = open_store(opts.store_dir);
        ServiceConfig cfg;
        if (opts.k) cfg.retrieval.k = *opts.k;
        if (opts.tau) cfg.retrieval.tau = *opts.tau;
        validate(cfg.retrieval);
        cfg.embed_provider = detail::resolve_provider(opts.embed_url, "CITEGUARD_EMBED_URL",
                                                      opts.model, &store.manifest);
        cfg.gen_provider = detail::resolve_provider(opts.llm_url, "CITEGUARD_LLM_URL",
                                                    opts.model, &store.manifest);
        httplib::Server svr;
        register_routes(svr, store, cfg);
        out << "serving store " << opts.store_dir << " on 127.0.0.1:" << opts.port << "\n";
        if (!svr.listen("127.0.0.1", opts.port)) {
            err << "cannot listen on port " << opts.port << "\n";
            return kExitError;
        }
        return kExitOk;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitError;
    }
}

// ---------------------------------------------------------------------------
// eval run / eval report
// ---------------------------------------------------------------------------

struct EvalRunOptions {
    std::string store_dir;
    std::string queries_path;
    std::string out_path = "records.jsonl";
    bool timings = false;  // off by default: byte-reproducible records
    std::optional<std::size_t> k;
    std::optional<double> tau;
    std::optional<std::string> embed_url;
    std::optional<std::string> llm_url;
    std::optional<std::string> model;
};

inline int cmd_eval_run(const EvalRunOptions& opts, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    try {
        OpenStore store = open_store(opts.store_dir);
        auto queries = load_queries(opts.queries_path);
        RetrievalConfig rcfg;
        if (opts.k) rcfg.k = *opts.k;
        if (opts.tau) rcfg.tau = *opts.tau;
        validate(rcfg);
        ProviderConfig embed_cfg = detail::resolve_provider(opts.embed_url, "CITEGUARD_EMBED_URL",
                                                            opts.model, &store.manifest);
        ProviderConfig gen_cfg = detail::resolve_provider(opts.llm_url, "CITEGUARD_LLM_URL",
                                                          opts.model, &store.manifest);
        auto embedder = make_embedder(embed_cfg);
        auto generator = make_generator(gen_cfg);
        GenConfig gcfg;
        PipelineHandles handles{store.index, store.chunks, *embedder, *generator, rcfg, gcfg};
        auto records = run_queries(queries, handles, opts.timings);
        save_records(records, opts.out_path);
        std::size_t answered = 0;
        for (const auto& r : records)
            if (detail::record_answered(r)) ++answered;
        out << "ran " << records.size() << " queries: " << answered << " answered, "
            << (records.size() - answered) << " abstained -> " << opts.out_path << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitError;
    }
}

struct EvalReportOptions {
    std::string records_path;
    std::optional<std::string> labels_path;
    std::string out_path = "report.json";
};

inline int cmd_eval_report(const EvalReportOptions& opts, std::ostream& out = std::cout,
                           std::ostream& err = std::cerr) {
    try {
        auto records = load_records(opts.records_path);
        EvalReport rep;
        if (opts.labels_path)
            rep = report_metrics(records, load_labels(*opts.labels_path));
        else
            rep = auto_metrics(records);
        nlohmann::json j = report_to_json(rep);
        detail::write_text_file(opts.out_path, j.dump(2) + "\n");
        out << j["rendered"].dump(2) << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace citeguard
