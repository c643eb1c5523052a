#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "citeguard/embedding.hpp"
#include "citeguard/errors.hpp"

namespace citeguard {

// ---------------------------------------------------------------------------
// CRC32C (Castagnoli), reflected, table-driven
// ---------------------------------------------------------------------------

namespace detail {

inline const std::array<std::uint32_t, 256>& crc32c_table() {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int b = 0; b < 8; ++b)
                c = (c & 1) ? (c >> 1) ^ 0x82F63B78u : (c >> 1);
            t[i] = c;
        }
        return t;
    }();
    return table;
}

}  // namespace detail

inline std::uint32_t crc32c(const void* data, std::size_t len) {
    const auto& table = detail::crc32c_table();
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i)
        crc = (crc >> 8) ^ table[(crc ^ p[i]) & 0xFFu];
    return crc ^ 0xFFFFFFFFu;
}

// ---------------------------------------------------------------------------
// Index
// ---------------------------------------------------------------------------

struct RowMeta {
    std::string chunk_id;
    std::string doc_id;
    int page_start = 0;
    int page_end = 0;

    bool operator==(const RowMeta&) const = default;
};

struct SearchHit {
    std::uint64_t row_id = 0;
    double score = 0.0;
};

// Exact flat inner-product index over unit vectors. The matrix is held in
// doubles and scored in doubles; on disk values are float32 (loading an index
// therefore quantizes the matrix to float32 precision).
class VectorIndex {
   public:
    VectorIndex() = default;

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return meta_.size(); }
    const std::vector<RowMeta>& rows() const { return meta_; }
    const RowMeta& row(std::size_t i) const { return meta_[i]; }
    const std::vector<double>& matrix() const { return matrix_; }

    static VectorIndex build(const std::vector<EmbeddingVector>& vectors,
                             std::vector<RowMeta> meta) {
        if (vectors.size() != meta.size())
            throw Error(Errc::dimension_mismatch,
                        std::to_string(vectors.size()) + " vectors for " +
                            std::to_string(meta.size()) + " metadata rows");
        VectorIndex ix;
        if (vectors.empty()) return ix;
        ix.dim_ = vectors.front().dim();
        if (ix.dim_ == 0) throw Error(Errc::invalid_argument, "zero-dimensional vectors");
        ix.matrix_.reserve(vectors.size() * ix.dim_);
        std::set<std::pair<std::string, std::string>> seen;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            const auto& v = vectors[i];
            if (v.dim() != ix.dim_)
                throw Error(Errc::dimension_mismatch,
                            "row " + std::to_string(i) + " has dim " + std::to_string(v.dim()));
            double norm = l2_norm(v.values);
            if (std::abs(norm - 1.0) > 1e-6)
                throw Error(Errc::not_normalized,
                            "row " + std::to_string(i) + " has norm " + std::to_string(norm));
            if (!seen.insert({meta[i].doc_id, meta[i].chunk_id}).second)
                throw Error(Errc::duplicate_chunk_ref,
                            meta[i].doc_id + "/" + meta[i].chunk_id);
            ix.matrix_.insert(ix.matrix_.end(), v.values.begin(), v.values.end());
        }
        ix.meta_ = std::move(meta);
        return ix;
    }

    // min(k, n) hits, score descending, ties by ascending row id. Scores are
    // clamped to [-1, 1] on output.
    std::vector<SearchHit> search(const EmbeddingVector& query, std::size_t k) const {
        if (k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
        if (meta_.empty()) return {};
        if (query.dim() != dim_)
            throw Error(Errc::dimension_mismatch,
                        "query dim " + std::to_string(query.dim()) + " vs index dim " +
                            std::to_string(dim_));
        std::vector<SearchHit> hits;
        hits.reserve(meta_.size());
        for (std::size_t r = 0; r < meta_.size(); ++r) {
            const double* row = matrix_.data() + r * dim_;
            double dot = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) dot += row[j] * query.values[j];
            hits.push_back({r, std::clamp(dot, -1.0, 1.0)});
        }
        std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.row_id < b.row_id;
        });
        if (hits.size() > k) hits.resize(k);
        return hits;
    }

    // index.bin layout:
    //   "CIRX" | version u32 LE (=1) | dim u32 LE | n u64 LE
    //   | n*dim float32 LE row-major | CRC32C u32 LE over all preceding bytes
    // rows.jsonl: one {row_id, chunk_id, doc_id, page_start, page_end} per row.
    void save(const std::filesystem::path& dir) const {
        std::string blob;
        blob.reserve(20 + matrix_.size() * 4 + 4);
        blob += "CIRX";
        append_u32(blob, 1);
        append_u32(blob, static_cast<std::uint32_t>(dim_));
        append_u64(blob, static_cast<std::uint64_t>(meta_.size()));
        for (double d : matrix_) append_u32(blob, std::bit_cast<std::uint32_t>(static_cast<float>(d)));
        append_u32(blob, crc32c(blob.data(), blob.size()));
        write_file(dir / "index.bin", blob);

        std::string rows;
        for (std::size_t r = 0; r < meta_.size(); ++r) {
            nlohmann::json j{{"row_id", r},
                             {"chunk_id", meta_[r].chunk_id},
                             {"doc_id", meta_[r].doc_id},
                             {"page_start", meta_[r].page_start},
                             {"page_end", meta_[r].page_end}};
            rows += j.dump();
            rows += '\n';
        }
        write_file(dir / "rows.jsonl", rows);
    }

    static VectorIndex load(const std::filesystem::path& dir) {
        std::string blob = read_file(dir / "index.bin");
        if (blob.size() < 20) throw Error(Errc::truncated_file, "index.bin header incomplete");
        if (blob.compare(0, 4, "CIRX") != 0) throw Error(Errc::bad_magic, "not an index file");
        std::uint32_t version = read_u32(blob, 4);
        if (version != 1)
            throw Error(Errc::unsupported_version, "version " + std::to_string(version));
        std::uint32_t dim = read_u32(blob, 8);
        std::uint64_t n = read_u64(blob, 12);
        if (dim == 0 && n > 0) throw Error(Errc::malformed_file, "index.bin: dim 0 with rows");
        std::size_t payload_end = 20 + static_cast<std::size_t>(n) * dim * 4;
        if (blob.size() < payload_end + 4)
            throw Error(Errc::truncated_file, "index.bin shorter than header promises");
        if (blob.size() > payload_end + 4)
            throw Error(Errc::malformed_file, "index.bin has trailing bytes");
        std::uint32_t stored = read_u32(blob, payload_end);
        std::uint32_t actual = crc32c(blob.data(), payload_end);
        if (stored != actual) throw Error(Errc::checksum_mismatch, "index.bin corrupt");

        VectorIndex ix;
        ix.dim_ = dim;
        ix.matrix_.reserve(static_cast<std::size_t>(n) * dim);
        for (std::size_t i = 0; i < static_cast<std::size_t>(n) * dim; ++i) {
            std::uint32_t bits = read_u32(blob, 20 + i * 4);
            ix.matrix_.push_back(static_cast<double>(std::bit_cast<float>(bits)));
        }

        std::ifstream in(dir / "rows.jsonl", std::ios::binary);
        if (!in) throw Error(Errc::io_error, "cannot open rows.jsonl");
        std::string line;
        std::set<std::pair<std::string, std::string>> seen;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::malformed_record, std::string("rows.jsonl: ") + e.what());
            }
            RowMeta m;
            if (!j.contains("row_id") || !j["row_id"].is_number_unsigned() ||
                j["row_id"].get<std::uint64_t>() != ix.meta_.size())
                throw Error(Errc::malformed_record, "rows.jsonl: row_id must be dense, in order");
            m.chunk_id = j.at("chunk_id").get<std::string>();
            m.doc_id = j.at("doc_id").get<std::string>();
            m.page_start = j.at("page_start").get<int>();
            m.page_end = j.at("page_end").get<int>();
            if (!seen.insert({m.doc_id, m.chunk_id}).second)
                throw Error(Errc::duplicate_chunk_ref, m.doc_id + "/" + m.chunk_id);
            ix.meta_.push_back(std::move(m));
        }
        if (ix.meta_.size() != n)
            throw Error(Errc::malformed_record,
                        "rows.jsonl has " + std::to_string(ix.meta_.size()) + " rows, index.bin has " +
                            std::to_string(n));
        for (std::size_t r = 0; r < ix.meta_.size(); ++r) {
            double norm = 0.0;
            for (std::size_t j = 0; j < ix.dim_; ++j) {
                double x = ix.matrix_[r * ix.dim_ + j];
                norm += x * x;
            }
            if (std::abs(std::sqrt(norm) - 1.0) > 1e-6)
                throw Error(Errc::not_normalized, "stored row " + std::to_string(r));
        }
        return ix;
    }

   private:
    static void append_u32(std::string& out, std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    static void append_u64(std::string& out, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    static std::uint32_t read_u32(const std::string& s, std::size_t off) {
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i)
            v = (v << 8) | static_cast<unsigned char>(s[off + static_cast<std::size_t>(i)]);
        return v;
    }
    static std::uint64_t read_u64(const std::string& s, std::size_t off) {
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i)
            v = (v << 8) | static_cast<unsigned char>(s[off + static_cast<std::size_t>(i)]);
        return v;
    }
    static void write_file(const std::filesystem::path& p, const std::string& data) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::io_error, "cannot write " + p.string());
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) throw Error(Errc::io_error, "short write to " + p.string());
    }
    static std::string read_file(const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw Error(Errc::io_error, "cannot open " + p.string());
        std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return data;
    }

    std::size_t dim_ = 0;
    std::vector<double> matrix_;  // row-major, n * dim
    std::vector<RowMeta> meta_;
};

}  // namespace citeguard
