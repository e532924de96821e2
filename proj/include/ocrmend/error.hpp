#pragma once

#include <stdexcept>
#include <string>

namespace ocrmend {

enum class ErrorCode {
    // ingest
    malformed_input,
    schema_violation,
    duplicate_offset,
    degenerate_polygon,
    // filters
    page_mismatch,
    // epub / corpus
    not_an_epub,
    corrupt_archive,
    no_text_content,
    empty_query,
    // prompts / completion
    empty_slot,
    delimiter_collision,
    timeout,
    rate_limited,
    service_error,
    fixture_missing,
    // pipeline
    missing_input,
    config_invalid,
    service_unavailable,
    page_set_mismatch,
    empty_corpus,
    io_error,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::malformed_input: return "malformed_input";
        case ErrorCode::schema_violation: return "schema_violation";
        case ErrorCode::duplicate_offset: return "duplicate_offset";
        case ErrorCode::degenerate_polygon: return "degenerate_polygon";
        case ErrorCode::page_mismatch: return "page_mismatch";
        case ErrorCode::not_an_epub: return "not_an_epub";
        case ErrorCode::corrupt_archive: return "corrupt_archive";
        case ErrorCode::no_text_content: return "no_text_content";
        case ErrorCode::empty_query: return "empty_query";
        case ErrorCode::empty_slot: return "empty_slot";
        case ErrorCode::delimiter_collision: return "delimiter_collision";
        case ErrorCode::timeout: return "timeout";
        case ErrorCode::rate_limited: return "rate_limited";
        case ErrorCode::service_error: return "service_error";
        case ErrorCode::fixture_missing: return "fixture_missing";
        case ErrorCode::missing_input: return "missing_input";
        case ErrorCode::config_invalid: return "config_invalid";
        case ErrorCode::service_unavailable: return "service_unavailable";
        case ErrorCode::page_set_mismatch: return "page_set_mismatch";
        case ErrorCode::empty_corpus: return "empty_corpus";
        case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

/// Exception carrying a machine-checkable error code alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace ocrmend
