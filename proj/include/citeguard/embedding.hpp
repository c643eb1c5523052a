#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "citeguard/errors.hpp"
#include "citeguard/text_util.hpp"

namespace citeguard {

// ---------------------------------------------------------------------------
// Vectors
// ---------------------------------------------------------------------------

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

inline double l2_norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim())
        throw Error(Errc::dimension_mismatch,
                    std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return dot;
}

// v / ||v||2. Inputs must be finite; norms below 1e-12 are rejected.
inline EmbeddingVector normalize(std::vector<double> v) {
    if (v.empty()) throw Error(Errc::invalid_argument, "empty vector");
    for (double x : v)
        if (!std::isfinite(x)) throw Error(Errc::non_finite, "vector has NaN/Inf");
    double norm = l2_norm(v);
    if (norm < 1e-12) throw Error(Errc::zero_vector, "norm below 1e-12");
    for (double& x : v) x /= norm;
    return EmbeddingVector{std::move(v)};
}

// ---------------------------------------------------------------------------
// Deterministic offline embedding
// ---------------------------------------------------------------------------

// Hashed bag of words: lowercase, split on non-alphanumeric runs, bucket each
// token by FNV-1a-64 mod dim, count occurrences, L2-normalize. Lexical
// overlap drives similarity, which is enough to exercise thresholds with
// engineered scores. Bit-for-bit reproducible at double precision.
inline EmbeddingVector mock_embed(std::string_view text, std::size_t dim) {
    if (dim < 8) throw Error(Errc::invalid_argument, "mock dim must be >= 8");
    std::vector<double> counts(dim, 0.0);
    bool any = false;
    for (const auto& token : tokenize(text)) {
        counts[fnv1a64(token) % dim] += 1.0;
        any = true;
    }
    if (!any) throw Error(Errc::zero_vector, "text has no tokens");
    return normalize(std::move(counts));
}

// ---------------------------------------------------------------------------
// Providers
// ---------------------------------------------------------------------------

enum class ProviderKind { remote, deterministic_mock };

struct ProviderConfig {
    ProviderKind kind = ProviderKind::deterministic_mock;
    std::optional<std::string> base_url;
    std::string model_id = "BAAI/bge-large-en-v1.5";
    std::size_t mock_dim = 64;
    int timeout_ms = 30000;
    std::size_t max_batch = 32;
    int retries = 2;           // transient-failure retries per request
    int backoff_base_ms = 250; // doubles per retry
};

class EmbeddingProvider {
   public:
    virtual ~EmbeddingProvider() = default;
    // One normalized vector per text, all the same dimension.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

class MockEmbedder final : public EmbeddingProvider {
   public:
    explicit MockEmbedder(std::size_t dim) : dim_(dim) {}

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(mock_embed(t, dim_));
        return out;
    }

   private:
    std::size_t dim_;
};

namespace detail {

inline std::optional<std::string> bearer_token_from_env() {
    const char* key = std::getenv("CITEGUARD_API_KEY");
    if (key && *key) return std::string(key);
    return std::nullopt;
}

// POST with bounded retries on transport errors and 5xx responses.
inline httplib::Result post_with_retries(httplib::Client& cli, const std::string& path,
                                         const std::string& body, const ProviderConfig& cfg) {
    int attempt = 0;
    while (true) {
        auto res = cli.Post(path, body, "application/json");
        bool transient = !res || (res->status >= 500 && res->status <= 599);
        if (!transient || attempt >= cfg.retries) return res;
        std::this_thread::sleep_for(
            std::chrono::milliseconds(cfg.backoff_base_ms << attempt));
        ++attempt;
    }
}

inline void configure_client(httplib::Client& cli, const ProviderConfig& cfg) {
    cli.set_connection_timeout(0, cfg.timeout_ms * 1000LL);
    cli.set_read_timeout(0, cfg.timeout_ms * 1000LL);
    cli.set_write_timeout(0, cfg.timeout_ms * 1000LL);
    if (auto token = bearer_token_from_env()) cli.set_bearer_token_auth(*token);
}

}  // namespace detail

// Wire contract: POST <base_url>/embed
//   request  {"model": str, "texts": [str]}
//   response {"vectors": [[number]]}  (parallel to texts)
class RemoteEmbedder final : public EmbeddingProvider {
   public:
    explicit RemoteEmbedder(ProviderConfig cfg) : cfg_(std::move(cfg)) {
        if (!cfg_.base_url) throw Error(Errc::invalid_argument, "remote provider needs base_url");
    }

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
        httplib::Client cli(*cfg_.base_url);
        detail::configure_client(cli, cfg_);

        nlohmann::json req{{"model", cfg_.model_id}, {"texts", texts}};
        auto res = detail::post_with_retries(cli, "/embed", req.dump(), cfg_);
        if (!res) {
            if (res.error() == httplib::Error::ConnectionTimeout ||
                res.error() == httplib::Error::Read || res.error() == httplib::Error::Write)
                throw Error(Errc::provider_timeout, httplib::to_string(res.error()));
            throw Error(Errc::provider_unreachable, httplib::to_string(res.error()));
        }
        if (res->status != 200)
            throw Error(Errc::provider_bad_response,
                        "HTTP " + std::to_string(res->status) + " from /embed");

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::provider_bad_response, e.what());
        }
        auto vecs = j.find("vectors");
        if (vecs == j.end() || !vecs->is_array())
            throw Error(Errc::provider_bad_response, "missing \"vectors\" array");
        if (vecs->size() != texts.size())
            throw Error(Errc::provider_bad_response,
                        "got " + std::to_string(vecs->size()) + " vectors for " +
                            std::to_string(texts.size()) + " texts");

        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        std::size_t dim = 0;
        for (const auto& jv : *vecs) {
            if (!jv.is_array() || jv.empty())
                throw Error(Errc::provider_bad_response, "vector must be a non-empty array");
            std::vector<double> v;
            v.reserve(jv.size());
            for (const auto& x : jv) {
                if (!x.is_number())
                    throw Error(Errc::provider_bad_response, "vector values must be numbers");
                v.push_back(x.get<double>());
            }
            if (dim == 0)
                dim = v.size();
            else if (v.size() != dim)
                throw Error(Errc::dimension_mismatch,
                            "vectors of dim " + std::to_string(dim) + " and " +
                                std::to_string(v.size()) + " in one response");
            out.push_back(normalize(std::move(v)));
        }
        return out;
    }

   private:
    ProviderConfig cfg_;
};

inline std::unique_ptr<EmbeddingProvider> make_embedder(const ProviderConfig& cfg) {
    if (cfg.kind == ProviderKind::deterministic_mock)
        return std::make_unique<MockEmbedder>(cfg.mock_dim);
    return std::make_unique<RemoteEmbedder>(cfg);
}

// Batched embedding through a provider. Every text must be non-empty; the
// result is parallel to texts, uniformly dimensioned, unit-normalized.
inline std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts,
                                                EmbeddingProvider& provider,
                                                std::size_t max_batch) {
    if (texts.empty()) throw Error(Errc::invalid_argument, "no texts to embed");
    if (max_batch == 0) throw Error(Errc::invalid_argument, "max_batch must be >= 1");
    for (const auto& t : texts)
        if (t.empty()) throw Error(Errc::invalid_argument, "empty text");

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    std::size_t dim = 0;
    for (std::size_t begin = 0; begin < texts.size(); begin += max_batch) {
        std::size_t end = std::min(begin + max_batch, texts.size());
        std::vector<std::string> batch(texts.begin() + begin, texts.begin() + end);
        auto vecs = provider.embed(batch);
        if (vecs.size() != batch.size())
            throw Error(Errc::provider_bad_response, "provider returned wrong vector count");
        for (auto& v : vecs) {
            if (dim == 0)
                dim = v.dim();
            else if (v.dim() != dim)
                throw Error(Errc::dimension_mismatch, "dimension changed across batches");
            out.push_back(std::move(v));
        }
    }
    return out;
}

inline std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts,
                                                const ProviderConfig& cfg) {
    auto provider = make_embedder(cfg);
    return embed_texts(texts, *provider, cfg.max_batch);
}

}  // namespace citeguard
