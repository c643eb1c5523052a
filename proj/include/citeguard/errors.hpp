#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace citeguard {

// Error codes for every failure the library reports. Tests match on these
// rather than on message text.
enum class Errc {
    // citation grammar
    parse_error,
    // ingestion
    malformed_file,
    duplicate_page,
    row_wider_than_header,
    bad_doc_id,
    empty_headers,
    // chunking
    chunk_id_overflow,
    // embedding
    zero_vector,
    non_finite,
    provider_unreachable,
    provider_bad_response,
    provider_timeout,
    dimension_mismatch,
    // vector index
    duplicate_chunk_ref,
    not_normalized,
    bad_magic,
    unsupported_version,
    checksum_mismatch,
    truncated_file,
    // generation
    empty_evidence,
    // evaluation
    missing_label,
    unknown_query_id,
    duplicate_query_id,
    malformed_record,
    // store / cli
    rebuild_required,
    store_error,
    invalid_argument,
    io_error,
};

inline std::string_view errc_name(Errc c) {
    switch (c) {
        case Errc::parse_error: return "ParseError";
        case Errc::malformed_file: return "MalformedFile";
        case Errc::duplicate_page: return "DuplicatePage";
        case Errc::row_wider_than_header: return "RowWiderThanHeader";
        case Errc::bad_doc_id: return "BadDocId";
        case Errc::empty_headers: return "EmptyHeaders";
        case Errc::chunk_id_overflow: return "Overflow";
        case Errc::zero_vector: return "ZeroVector";
        case Errc::non_finite: return "NonFinite";
        case Errc::provider_unreachable: return "ProviderUnreachable";
        case Errc::provider_bad_response: return "ProviderBadResponse";
        case Errc::provider_timeout: return "Timeout";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::duplicate_chunk_ref: return "DuplicateChunkRef";
        case Errc::not_normalized: return "NotNormalized";
        case Errc::bad_magic: return "BadMagic";
        case Errc::unsupported_version: return "UnsupportedVersion";
        case Errc::checksum_mismatch: return "ChecksumMismatch";
        case Errc::truncated_file: return "TruncatedFile";
        case Errc::empty_evidence: return "EmptyEvidence";
        case Errc::missing_label: return "MissingLabel";
        case Errc::unknown_query_id: return "UnknownQueryId";
        case Errc::duplicate_query_id: return "DuplicateQueryId";
        case Errc::malformed_record: return "MalformedRecord";
        case Errc::rebuild_required: return "RebuildRequired";
        case Errc::store_error: return "StoreError";
        case Errc::invalid_argument: return "InvalidArgument";
        case Errc::io_error: return "IoError";
    }
    return "Error";
}

class Error : public std::runtime_error {
   public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

    Errc code() const noexcept { return code_; }

   private:
    Errc code_;
};

// Citation parse failure with the byte offset of the first deviation and a
// description of what the grammar expected there.
class CitationParseError : public Error {
   public:
    CitationParseError(std::size_t position, const std::string& expected)
        : Error(Errc::parse_error,
                "at position " + std::to_string(position) + ", expected " + expected),
          position_(position),
          expected_(expected) {}

    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

   private:
    std::size_t position_;
    std::string expected_;
};

}  // namespace citeguard
