#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "citeguard/embedding.hpp"
#include "citeguard/errors.hpp"
#include "citeguard/generation.hpp"

namespace citeguard {

// In-repo provider stub speaking the embed/generate wire contracts, backed by
// the deterministic mock embedding. Used by integration tests and available
// as a standalone binary for manual runs.
//
//   POST /embed    {"model": str, "texts": [str]}    -> {"vectors": [[number]]}
//   POST /generate {"model","prompt","max_tokens","temperature"} -> {"text": str}
//
// Generation replays a scripted response sequence keyed by request ordinal
// (the last entry repeats once the script runs out); without a script it
// falls back to the deterministic extractive generator.
class StubProviderServer {
   public:
    struct Options {
        std::size_t dim = 64;
        std::vector<std::string> scripted;          // /generate responses by ordinal
        std::optional<std::string> require_bearer;  // reject requests without this token
        int fail_first = 0;                         // 503 for the first N requests (transient)
        int delay_ms = 0;                           // handler delay, for timeout tests
    };

    StubProviderServer() : StubProviderServer(Options{}) {}

    explicit StubProviderServer(Options opts)
        : opts_(std::move(opts)), failures_left_(opts_.fail_first) {
        svr_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
            if (!pass_gates(req, res)) return;
            ++embed_requests_;
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::exception& e) {
                reply_error(res, 400, e.what());
                return;
            }
            if (!body.contains("model") || !body["model"].is_string() ||
                !body.contains("texts") || !body["texts"].is_array()) {
                reply_error(res, 400, "expected {\"model\": str, \"texts\": [str]}");
                return;
            }
            nlohmann::json vectors = nlohmann::json::array();
            for (const auto& t : body["texts"]) {
                if (!t.is_string()) {
                    reply_error(res, 400, "texts must be strings");
                    return;
                }
                try {
                    vectors.push_back(mock_embed(t.get<std::string>(), opts_.dim).values);
                } catch (const Error& e) {
                    reply_error(res, 400, e.what());
                    return;
                }
            }
            res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
        });

        svr_.Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
            if (!pass_gates(req, res)) return;
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::exception& e) {
                reply_error(res, 400, e.what());
                return;
            }
            if (!body.contains("model") || !body.contains("prompt") ||
                !body["prompt"].is_string() || !body.contains("max_tokens") ||
                !body.contains("temperature")) {
                reply_error(res, 400,
                            "expected {\"model\",\"prompt\",\"max_tokens\",\"temperature\"}");
                return;
            }
            std::size_t ordinal = generate_requests_++;
            std::string text;
            if (!opts_.scripted.empty()) {
                text = opts_.scripted[std::min(ordinal, opts_.scripted.size() - 1)];
            } else {
                MockGenerator gen;
                GenConfig cfg;
                text = gen.generate(body["prompt"].get<std::string>(), cfg);
            }
            res.set_content(nlohmann::json{{"text", text}}.dump(), "application/json");
        });
    }

    ~StubProviderServer() { stop(); }

    // Serves from a background thread on 127.0.0.1; port 0 picks an ephemeral
    // port. Returns the bound port.
    int start(int port = 0) {
        if (port > 0) {
            if (!svr_.bind_to_port("127.0.0.1", port))
                throw Error(Errc::io_error,
                            "stub server cannot bind port " + std::to_string(port));
            port_ = port;
        } else {
            port_ = svr_.bind_to_any_port("127.0.0.1");
            if (port_ <= 0) throw Error(Errc::io_error, "stub server cannot bind");
        }
        thread_ = std::thread([this] { svr_.listen_after_bind(); });
        svr_.wait_until_ready();
        return port_;
    }

    // Signal-handler shutdown request; wait() reaps the serving thread.
    void request_stop() { svr_.stop(); }

    void wait() {
        if (thread_.joinable()) thread_.join();
    }

    void stop() {
        request_stop();
        wait();
    }

    int port() const { return port_; }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    std::size_t embed_requests() const { return embed_requests_; }
    std::size_t generate_requests() const { return generate_requests_; }
    void arm_failures(int n) { failures_left_ = n; }

   private:
    static void reply_error(httplib::Response& res, int status, const std::string& msg) {
        res.status = status;
        res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
    }

    bool pass_gates(const httplib::Request& req, httplib::Response& res) {
        if (opts_.delay_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(opts_.delay_ms));
        if (opts_.require_bearer) {
            auto auth = req.get_header_value("Authorization");
            if (auth != "Bearer " + *opts_.require_bearer) {
                reply_error(res, 401, "missing or wrong bearer token");
                return false;
            }
        }
        if (failures_left_ > 0) {
            --failures_left_;
            reply_error(res, 503, "injected transient failure");
            return false;
        }
        return true;
    }

    Options opts_;
    httplib::Server svr_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<std::size_t> embed_requests_{0};
    std::atomic<std::size_t> generate_requests_{0};
    std::atomic<int> failures_left_{0};
};

}  // namespace citeguard
