#pragma once

#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "ocrmend/completion.hpp"
#include "ocrmend/error.hpp"
#include "ocrmend/levenshtein.hpp"
#include "ocrmend/noise_filter.hpp"
#include "ocrmend/prompts.hpp"
#include "ocrmend/reference_corpus.hpp"
#include "ocrmend/unicode.hpp"

namespace ocrmend {

/// Strip XML/HTML tag wrapping that models occasionally add despite the
/// prompt directive. A fully wrapped answer unwraps to its innermost text
/// (recursively); stray unmatched tags are dropped; tagless answers pass
/// through unchanged.
inline std::string unwrap_xml_tags(std::string_view answer) {
    static const std::regex whole_wrap(
        R"(^\s*<([A-Za-z][A-Za-z0-9._:-]*)(?:\s[^<>]*)?>([\s\S]*)</\1\s*>\s*$)");
    static const std::regex stray_tag(R"(</?[A-Za-z][A-Za-z0-9._:-]*(?:\s[^<>]*)?/?>)");

    std::string text(answer);
    std::smatch m;
    while (std::regex_match(text, m, whole_wrap)) text = m[2].str();
    text = std::regex_replace(text, stray_tag, "");

    // trim outer whitespace
    std::u32string cps = decode_utf8(text);
    size_t begin = 0, end = cps.size();
    while (begin < end && is_space_cp(cps[begin])) ++begin;
    while (end > begin && is_space_cp(cps[end - 1])) --end;
    return encode_utf8(std::u32string_view(cps).substr(begin, end - begin));
}

struct TrimResult {
    std::string text;
    double similarity = 0.0;
};

/// Crop an answer back to the span that corresponds to the original input:
/// slide word windows of the original's length +/-1 over the answer, score
/// each window against the original by Levenshtein similarity, and keep the
/// best. Ties prefer the longest window, then the earliest position. Window
/// lengths below 1 are skipped and lengths beyond the answer are clamped.
inline TrimResult trim_hallucination(std::string_view original, std::string_view answer) {
    std::vector<std::string> answer_words = split_words(answer);
    const size_t n = word_count(original);
    const size_t m = answer_words.size();
    if (n == 0 || m == 0)
        throw Error(ErrorCode::empty_slot, "trim_hallucination requires non-empty texts");

    std::vector<size_t> lengths;
    for (size_t k : {n > 1 ? n - 1 : 0, n, n + 1}) {
        if (k < 1) continue;
        k = std::min(k, m);
        if (std::find(lengths.begin(), lengths.end(), k) == lengths.end()) lengths.push_back(k);
    }
    std::sort(lengths.begin(), lengths.end());

    std::u32string orig32 = decode_utf8(original);
    TrimResult best;
    best.similarity = -1.0;
    size_t best_len = 0, best_pos = 0;
    for (size_t len : lengths) {
        for (size_t pos = 0; pos + len <= m; ++pos) {
            std::string window;
            for (size_t k = 0; k < len; ++k) {
                if (k) window += ' ';
                window += answer_words[pos + k];
            }
            double sim = similarity(orig32, decode_utf8(window));
            bool take = sim > best.similarity ||
                        (sim == best.similarity &&
                         (len > best_len || (len == best_len && pos < best_pos)));
            if (take) {
                best.text = std::move(window);
                best.similarity = sim;
                best_len = len;
                best_pos = pos;
            }
        }
    }
    return best;
}

/// Acceptance policy for the minor-spell path: near-identical answers only.
/// The allowed character-length drift is the larger of the absolute and the
/// relative bound; equal word count is not negotiable.
struct GatePolicy {
    double min_similarity = 0.80;
    double max_length_delta_chars = 3.0;
    double max_length_delta_ratio = 0.05;

    void validate() const {
        if (!(min_similarity >= 0.0 && min_similarity <= 1.0))
            throw Error(ErrorCode::config_invalid, "gate min_similarity must be in [0, 1]");
        if (max_length_delta_chars < 0.0 || max_length_delta_ratio < 0.0)
            throw Error(ErrorCode::config_invalid, "gate length deltas must be non-negative");
    }
};

inline bool gate_minor_correction(std::string_view original, std::string_view answer,
                                  const GatePolicy& policy) {
    std::u32string orig32 = decode_utf8(original);
    std::u32string ans32 = decode_utf8(answer);
    if (similarity(orig32, ans32) < policy.min_similarity) return false;
    double allowed = std::max(policy.max_length_delta_chars,
                              policy.max_length_delta_ratio * static_cast<double>(orig32.size()));
    double delta = ans32.size() > orig32.size()
                       ? static_cast<double>(ans32.size() - orig32.size())
                       : static_cast<double>(orig32.size() - ans32.size());
    if (delta > allowed) return false;
    return word_count(original) == word_count(answer);
}

enum class CorrectionStatus { intact, corrected_with_reference, minor_corrected, rejected_kept_original };

inline const char* correction_status_name(CorrectionStatus s) {
    switch (s) {
        case CorrectionStatus::intact: return "intact";
        case CorrectionStatus::corrected_with_reference: return "corrected_with_reference";
        case CorrectionStatus::minor_corrected: return "minor_corrected";
        case CorrectionStatus::rejected_kept_original: return "rejected_kept_original";
    }
    return "unknown";
}

struct CorrectionResult {
    std::string paragraph_id;
    std::string original;
    std::optional<std::string> llm_raw;
    std::string final_text;
    CorrectionStatus status = CorrectionStatus::intact;
    std::optional<double> trim_similarity;
    std::string diagnostic;
    // service accounting for the run-level availability check
    bool service_attempted = false;
    bool service_ok = false;
};

struct CorrectionOptions {
    GatePolicy gate;
    std::string model_id = "default";
    size_t max_output_chars = 4000;
    std::string reference_style = "text";  // "text" or "tagged"
};

/// Drive one paragraph through the correction flow for its match status:
/// intact paragraphs pass through untouched with no service call, partial
/// matches take the reference-guided prompt plus hallucination trimming, and
/// dangling text takes the gated minor-spell prompt. Service failures (after
/// internal retries) degrade to keeping the original text; a paragraph is
/// never dropped.
inline CorrectionResult correct_paragraph(const Paragraph& paragraph,
                                          const std::string& paragraph_id,
                                          const std::optional<MatchCandidate>& match,
                                          const std::string& nearby,
                                          const CorrectionOptions& opts,
                                          CompletionClient& client) {
    CorrectionResult result;
    result.paragraph_id = paragraph_id;
    result.original = paragraph.text;
    result.final_text = paragraph.text;

    auto reject = [&](std::string why) {
        result.status = CorrectionStatus::rejected_kept_original;
        result.final_text = result.original;
        result.diagnostic = std::move(why);
        return result;
    };

    switch (paragraph.status.kind) {
        case MatchKind::unmatched:
            throw Error(ErrorCode::config_invalid,
                        "paragraph " + paragraph_id + " reached correction unclassified");

        case MatchKind::intact:
            result.status = CorrectionStatus::intact;
            return result;

        case MatchKind::partial: {
            if (!match)
                throw Error(ErrorCode::config_invalid,
                            "partial paragraph " + paragraph_id + " has no match candidate");
            std::string reference = opts.reference_style == "tagged"
                                        ? "<p>" + match->padded_text + "</p>"
                                        : match->padded_text;
            std::string prompt;
            try {
                prompt = render_prompt1(reference, paragraph.text);
            } catch (const Error& e) {
                return reject(e.what());
            }
            std::string answer;
            result.service_attempted = true;
            try {
                answer = client.complete({prompt, 0.0, opts.max_output_chars, opts.model_id,
                                          paragraph_id});
            } catch (const Error& e) {
                if (e.code() == ErrorCode::service_error || e.code() == ErrorCode::timeout ||
                    e.code() == ErrorCode::rate_limited)
                    return reject(e.what());
                throw;
            }
            result.service_ok = true;
            result.llm_raw = answer;
            std::string unwrapped = unwrap_xml_tags(answer);
            size_t n = word_count(paragraph.text);
            if (is_blank(unwrapped) || word_count(unwrapped) + 1 < n)
                return reject("answer degenerate after unwrap (" +
                              std::to_string(word_count(unwrapped)) + " of " + std::to_string(n) +
                              " words)");
            TrimResult trimmed = trim_hallucination(paragraph.text, unwrapped);
            result.final_text = trimmed.text;
            result.trim_similarity = trimmed.similarity;
            result.status = CorrectionStatus::corrected_with_reference;
            return result;
        }

        case MatchKind::dangling: {
            std::string prompt;
            try {
                prompt = render_prompt2(paragraph.text, nearby);
            } catch (const Error& e) {
                return reject(e.what());
            }
            std::string answer;
            result.service_attempted = true;
            try {
                answer = client.complete({prompt, 0.0, opts.max_output_chars, opts.model_id,
                                          paragraph_id});
            } catch (const Error& e) {
                if (e.code() == ErrorCode::service_error || e.code() == ErrorCode::timeout ||
                    e.code() == ErrorCode::rate_limited)
                    return reject(e.what());
                throw;
            }
            result.service_ok = true;
            result.llm_raw = answer;
            std::string unwrapped = unwrap_xml_tags(answer);
            if (is_blank(unwrapped)) return reject("blank answer");
            if (!gate_minor_correction(paragraph.text, unwrapped, opts.gate))
                return reject("gate rejected the answer");
            result.final_text = unwrapped;
            result.status = CorrectionStatus::minor_corrected;
            return result;
        }
    }
    return reject("unreachable");
}

} // namespace ocrmend
