#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "citeguard/chunking.hpp"
#include "citeguard/core.hpp"
#include "citeguard/embedding.hpp"
#include "citeguard/errors.hpp"
#include "citeguard/index.hpp"
#include "citeguard/ingestion.hpp"
#include "citeguard/retrieval.hpp"

namespace citeguard {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Store layout
//   <root>/docs/         validated DIF copies
//   <root>/chunks.jsonl  one Chunk per line, ordered by (doc_id, chunk_id)
//   <root>/index.bin     flat vector index (after `index`)
//   <root>/rows.jsonl    row metadata sidecar
//   <root>/store.json    manifest
// ---------------------------------------------------------------------------

struct AuthorityCounts {
    std::size_t docs = 0;
    std::size_t chunks = 0;
};

struct StoreManifest {
    ChunkingConfig chunking;
    std::optional<std::string> model_id;  // set by `index`
    std::optional<std::size_t> dim;       // set by `index`
    std::size_t n_docs = 0;
    std::size_t n_chunks = 0;
    std::map<std::string, AuthorityCounts> per_authority;
};

inline nlohmann::json manifest_to_json(const StoreManifest& m) {
    nlohmann::json j{{"schema", kSchemaVersion},
                     {"chunking",
                      {{"target_len", m.chunking.target_len},
                       {"max_len", m.chunking.max_len},
                       {"overlap_len", m.chunking.overlap_len},
                       {"min_len", m.chunking.min_len}}},
                     {"n_docs", m.n_docs},
                     {"n_chunks", m.n_chunks}};
    if (m.model_id) j["model_id"] = *m.model_id;
    if (m.dim) j["dim"] = *m.dim;
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [authority, counts] : m.per_authority)
        per[authority] = {{"docs", counts.docs}, {"chunks", counts.chunks}};
    j["per_authority"] = per;
    return j;
}

inline StoreManifest manifest_from_json(const nlohmann::json& j) {
    StoreManifest m;
    try {
        if (!j.contains("schema") || j["schema"] != kSchemaVersion)
            throw Error(Errc::store_error, "store.json: missing or wrong \"schema\"");
        const auto& c = j.at("chunking");
        m.chunking.target_len = c.at("target_len").get<std::size_t>();
        m.chunking.max_len = c.at("max_len").get<std::size_t>();
        m.chunking.overlap_len = c.at("overlap_len").get<std::size_t>();
        m.chunking.min_len = c.at("min_len").get<std::size_t>();
        m.n_docs = j.at("n_docs").get<std::size_t>();
        m.n_chunks = j.at("n_chunks").get<std::size_t>();
        if (j.contains("model_id")) m.model_id = j["model_id"].get<std::string>();
        if (j.contains("dim")) m.dim = j["dim"].get<std::size_t>();
        if (j.contains("per_authority"))
            for (auto it = j["per_authority"].begin(); it != j["per_authority"].end(); ++it)
                m.per_authority[it.key()] = {it.value().at("docs").get<std::size_t>(),
                                             it.value().at("chunks").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::store_error, std::string("store.json: ") + e.what());
    }
    return m;
}

inline StoreManifest read_manifest(const fs::path& store_dir) {
    std::ifstream in(store_dir / "store.json", std::ios::binary);
    if (!in) throw Error(Errc::store_error, "no store manifest at " + store_dir.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::store_error, std::string("store.json: ") + e.what());
    }
    return manifest_from_json(j);
}

namespace detail {

inline void write_text_file(const fs::path& p, const std::string& data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + p.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error(Errc::io_error, "short write to " + p.string());
}

inline fs::path staging_sibling(const fs::path& target) {
    std::random_device rd;
    return target.parent_path() /
           (target.filename().string() + ".staging-" + std::to_string(rd()));
}

// Replace target with staged directory; the previous store survives failure.
inline void commit_staging(const fs::path& staging, const fs::path& target) {
    fs::path backup = target.parent_path() / (target.filename().string() + ".old");
    std::error_code ec;
    fs::remove_all(backup, ec);
    bool had_old = fs::exists(target);
    if (had_old) fs::rename(target, backup);
    std::error_code ec2;
    fs::rename(staging, target, ec2);
    if (ec2) {
        if (had_old) fs::rename(backup, target);
        throw Error(Errc::store_error, "cannot commit store: " + ec2.message());
    }
    fs::remove_all(backup, ec);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ingest
// ---------------------------------------------------------------------------

struct IngestSummary {
    std::size_t docs = 0;
    std::size_t chunks = 0;
    std::size_t warnings = 0;  // dropped whitespace blocks + empty documents
    std::map<std::string, AuthorityCounts> per_authority;
};

// Validate every DIF file in input_dir, chunk, and build a fresh store. The
// store is staged in a sibling directory and swapped in only on success.
inline IngestSummary ingest_store(const fs::path& input_dir, const fs::path& store_dir,
                                  const ChunkingConfig& cfg, bool lenient = false) {
    validate(cfg);
    if (!fs::is_directory(input_dir))
        throw Error(Errc::io_error, input_dir.string() + " is not a directory");

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(input_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(Errc::store_error, "no documents in " + input_dir.string());

    struct Loaded {
        fs::path source;
        DocumentRecord doc;
    };
    std::vector<Loaded> docs;
    std::string diagnostics;
    for (const auto& f : files) {
        try {
            docs.push_back({f, load_dif(f, lenient)});
        } catch (const Error& e) {
            diagnostics += f.filename().string() + ": " + e.what() + "\n";
        }
    }
    if (!diagnostics.empty())
        throw Error(Errc::store_error, "ingest failed:\n" + diagnostics);

    // Deterministic store order regardless of input file naming.
    std::sort(docs.begin(), docs.end(),
              [](const Loaded& a, const Loaded& b) { return a.doc.doc_id < b.doc.doc_id; });
    for (std::size_t i = 1; i < docs.size(); ++i)
        if (docs[i].doc.doc_id == docs[i - 1].doc.doc_id)
            throw Error(Errc::store_error, "duplicate doc_id " + docs[i].doc.doc_id);

    IngestSummary summary;
    std::vector<Chunk> all_chunks;
    for (const auto& [source, doc] : docs) {
        FlattenStats stats;
        auto segments = flatten_document(doc, &stats);
        summary.warnings += static_cast<std::size_t>(stats.dropped_blocks);
        if (segments.empty()) {
            ++summary.warnings;  // empty document, no chunks
        }
        auto chunks = assign_chunk_ids(chunk_document(segments, cfg));
        auto& authority = summary.per_authority[doc.authority];
        ++authority.docs;
        authority.chunks += chunks.size();
        summary.chunks += chunks.size();
        all_chunks.insert(all_chunks.end(), std::make_move_iterator(chunks.begin()),
                          std::make_move_iterator(chunks.end()));
    }
    summary.docs = docs.size();

    fs::path staging = detail::staging_sibling(store_dir);
    fs::create_directories(staging / "docs");
    try {
        for (const auto& [source, doc] : docs)
            fs::copy_file(source, staging / "docs" / source.filename(),
                          fs::copy_options::overwrite_existing);
        std::string lines;
        for (const auto& c : all_chunks) {
            lines += chunk_to_json(c).dump();
            lines += '\n';
        }
        detail::write_text_file(staging / "chunks.jsonl", lines);

        StoreManifest manifest;
        manifest.chunking = cfg;
        manifest.n_docs = summary.docs;
        manifest.n_chunks = summary.chunks;
        manifest.per_authority = summary.per_authority;
        detail::write_text_file(staging / "store.json", manifest_to_json(manifest).dump(2) + "\n");
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }
    detail::commit_staging(staging, store_dir);
    return summary;
}

// ---------------------------------------------------------------------------
// Index
// ---------------------------------------------------------------------------

// Embed every chunk and persist the index. Provider failures leave the store
// untouched: all artifacts are written to temporary names first.
inline void index_store(const fs::path& store_dir, const ProviderConfig& provider,
                        bool force = false) {
    StoreManifest manifest = read_manifest(store_dir);
    ChunkStore chunks = ChunkStore::load(store_dir / "chunks.jsonl");
    if (chunks.size() == 0) throw Error(Errc::store_error, "store has no chunks to index");
    if (chunks.size() != manifest.n_chunks)
        throw Error(Errc::store_error, "manifest chunk count does not match chunks.jsonl");

    auto embedder = make_embedder(provider);

    // Learn the provider dimension from one probe before embedding everything.
    auto probe = embedder->embed({chunks.chunks().front().text});
    if (probe.size() != 1) throw Error(Errc::provider_bad_response, "expected one vector");
    std::size_t dim = probe.front().dim();
    if (manifest.dim && *manifest.dim != dim && !force)
        throw Error(Errc::rebuild_required,
                    "index was built with dim " + std::to_string(*manifest.dim) +
                        ", provider now returns " + std::to_string(dim) +
                        "; pass --force to rebuild");

    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    std::vector<RowMeta> meta;
    meta.reserve(chunks.size());
    for (const auto& c : chunks.chunks()) {
        texts.push_back(c.text);
        meta.push_back({c.chunk_id, c.doc_id, c.page_start, c.page_end});
    }
    auto vectors = embed_texts(texts, *embedder, provider.max_batch);
    if (vectors.front().dim() != dim)
        throw Error(Errc::provider_bad_response, "probe and batch dimensions disagree");
    VectorIndex ix = VectorIndex::build(vectors, std::move(meta));

    fs::path tmp = store_dir / ".index-staging";
    std::error_code ec;
    fs::remove_all(tmp, ec);
    fs::create_directories(tmp);
    try {
        ix.save(tmp);
        manifest.model_id = provider.model_id;
        manifest.dim = dim;
        detail::write_text_file(tmp / "store.json", manifest_to_json(manifest).dump(2) + "\n");
        fs::rename(tmp / "index.bin", store_dir / "index.bin");
        fs::rename(tmp / "rows.jsonl", store_dir / "rows.jsonl");
        fs::rename(tmp / "store.json", store_dir / "store.json");
    } catch (...) {
        fs::remove_all(tmp, ec);
        throw;
    }
    fs::remove_all(tmp, ec);
}

// ---------------------------------------------------------------------------
// Open
// ---------------------------------------------------------------------------

struct OpenStore {
    StoreManifest manifest;
    ChunkStore chunks;
    VectorIndex index;
};

// Loads and cross-checks a store: manifest counts against actual contents,
// manifest dim against the index header.
inline OpenStore open_store(const fs::path& store_dir, bool need_index = true) {
    OpenStore s;
    s.manifest = read_manifest(store_dir);
    s.chunks = ChunkStore::load(store_dir / "chunks.jsonl");
    if (s.chunks.size() != s.manifest.n_chunks)
        throw Error(Errc::store_error, "manifest chunk count does not match chunks.jsonl");
    std::size_t doc_files = 0;
    if (fs::is_directory(store_dir / "docs"))
        for (const auto& entry : fs::directory_iterator(store_dir / "docs"))
            if (entry.is_regular_file()) ++doc_files;
    if (doc_files != s.manifest.n_docs)
        throw Error(Errc::store_error, "manifest doc count does not match docs/");
    if (need_index) {
        if (!fs::exists(store_dir / "index.bin"))
            throw Error(Errc::store_error,
                        "store has no index; run `citeguard index` first");
        s.index = VectorIndex::load(store_dir);
        if (!s.manifest.dim || s.index.dim() != *s.manifest.dim)
            throw Error(Errc::store_error, "manifest dim does not match index header");
        if (s.index.size() != s.manifest.n_chunks)
            throw Error(Errc::store_error, "index row count does not match chunk count");
    }
    return s;
}

}  // namespace citeguard
