#pragma once

#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "citeguard/embedding.hpp"
#include "citeguard/errors.hpp"
#include "citeguard/generation.hpp"
#include "citeguard/pipeline.hpp"
#include "citeguard/store.hpp"

namespace citeguard {

struct ServiceConfig {
    RetrievalConfig retrieval;
    GenConfig generation;
    ProviderConfig embed_provider;
    ProviderConfig gen_provider;
};

namespace detail {

inline void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline void reply_error(httplib::Response& res, int status, const std::string& message) {
    reply_json(res, status, nlohmann::json{{"error", message}});
}

}  // namespace detail

// Read-only analyst-facing service over an immutable store.
//   POST /v1/query  {"query": str, "k"?: int, "tau"?: number}
//   GET  /v1/health {"status":"ok","docs":n,"chunks":n}
// The query response body is byte-identical to `citeguard query --json`.
inline void register_routes(httplib::Server& svr, const OpenStore& store,
                            const ServiceConfig& cfg) {
    svr.Get("/v1/health", [&store](const httplib::Request&, httplib::Response& res) {
        detail::reply_json(res, 200,
                           nlohmann::json{{"status", "ok"},
                                          {"docs", store.manifest.n_docs},
                                          {"chunks", store.manifest.n_chunks}});
    });

    svr.Post("/v1/query", [&store, cfg](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception& e) {
            detail::reply_error(res, 400, std::string("malformed JSON: ") + e.what());
            return;
        }
        if (!body.is_object() || !body.contains("query") || !body["query"].is_string() ||
            body["query"].get<std::string>().empty()) {
            detail::reply_error(res, 400, "body must carry a non-empty string \"query\"");
            return;
        }
        for (auto it = body.begin(); it != body.end(); ++it) {
            if (it.key() != "query" && it.key() != "k" && it.key() != "tau") {
                detail::reply_error(res, 400, "unknown key \"" + it.key() + "\"");
                return;
            }
        }
        RetrievalConfig rcfg = cfg.retrieval;
        if (body.contains("k")) {
            if (!body["k"].is_number_integer() || body["k"].get<int>() < 1) {
                detail::reply_error(res, 400, "\"k\" must be an integer >= 1");
                return;
            }
            rcfg.k = body["k"].get<std::size_t>();
        }
        if (body.contains("tau")) {
            if (!body["tau"].is_number()) {
                detail::reply_error(res, 400, "\"tau\" must be a number");
                return;
            }
            rcfg.tau = body["tau"].get<double>();
            if (rcfg.tau < -1.0 || rcfg.tau > 1.0) {
                detail::reply_error(res, 400, "\"tau\" must be in [-1, 1]");
                return;
            }
        }

        try {
            auto embedder = make_embedder(cfg.embed_provider);
            auto generator = make_generator(cfg.gen_provider);
            PipelineHandles handles{store.index, store.chunks, *embedder, *generator,
                                    rcfg,        cfg.generation};
            QueryResult qr = answer_query(body["query"].get<std::string>(), handles);
            detail::reply_json(res, 200, response_to_json(qr));
        } catch (const Error& e) {
            if (e.code() == Errc::provider_unreachable || e.code() == Errc::provider_timeout)
                detail::reply_error(res, 503, e.what());
            else
                detail::reply_error(res, 500, e.what());
        }
    });
}

}  // namespace citeguard
