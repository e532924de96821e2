#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ocrmend/error.hpp"
#include "ocrmend/levenshtein.hpp"
#include "ocrmend/unicode.hpp"

namespace ocrmend {

/// Normalized edit distance: distance over scalar values divided by the
/// longer length; empty vs empty is 0.
inline double ned(std::string_view pred, std::string_view ref) {
    std::u32string a = decode_utf8(pred), b = decode_utf8(ref);
    size_t den = std::max(a.size(), b.size());
    if (den == 0) return 0.0;
    return static_cast<double>(edit_distance(a, b)) / static_cast<double>(den);
}

/// Character error rate: distance / reference length. An empty reference
/// against non-empty prediction has no meaningful rate; it is reported as
/// |pred| and flagged degenerate by the corpus scorer.
inline double cer(std::string_view pred, std::string_view ref) {
    std::u32string a = decode_utf8(pred), b = decode_utf8(ref);
    if (b.empty()) return static_cast<double>(a.size());
    return static_cast<double>(edit_distance(a, b)) / static_cast<double>(b.size());
}

/// Word error rate: word-level distance / reference word count, whitespace
/// tokenization. Mirrors cer's degenerate convention for empty references.
inline double wer(std::string_view pred, std::string_view ref) {
    std::vector<std::string> a = split_words(pred), b = split_words(ref);
    if (b.empty()) return static_cast<double>(a.size());
    return static_cast<double>(edit_distance_seq(a, b)) / static_cast<double>(b.size());
}

/// Sentence BLEU with n-grams up to min(4, |pred words|), geometric mean of
/// clipped precisions, brevity penalty exp(1 - |ref|/|pred|) when the
/// prediction is shorter, and no smoothing: any zero precision zeroes the
/// score.
inline double bleu(std::string_view pred, std::string_view ref) {
    std::vector<std::string> p = split_words(pred), r = split_words(ref);
    if (p.empty() && r.empty()) return 1.0;
    if (p.empty() || r.empty()) return 0.0;

    const size_t max_n = std::min<size_t>(4, p.size());
    double log_sum = 0.0;
    for (size_t n = 1; n <= max_n; ++n) {
        std::map<std::vector<std::string>, size_t> ref_counts;
        for (size_t i = 0; n <= r.size() && i + n <= r.size(); ++i)
            ++ref_counts[std::vector<std::string>(r.begin() + i, r.begin() + i + n)];
        std::map<std::vector<std::string>, size_t> pred_counts;
        for (size_t i = 0; i + n <= p.size(); ++i)
            ++pred_counts[std::vector<std::string>(p.begin() + i, p.begin() + i + n)];
        size_t total = 0, clipped = 0;
        for (const auto& [gram, count] : pred_counts) {
            total += count;
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) clipped += std::min(count, it->second);
        }
        if (clipped == 0) return 0.0;
        log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
    }
    double score = std::exp(log_sum / static_cast<double>(max_n));
    if (p.size() < r.size())
        score *= std::exp(1.0 - static_cast<double>(r.size()) / static_cast<double>(p.size()));
    return score;
}

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Order-insensitive word precision/recall/F1 via multiset overlap.
inline Prf word_prf(std::string_view pred, std::string_view ref) {
    std::vector<std::string> p = split_words(pred), r = split_words(ref);
    std::map<std::string, size_t> pc, rc;
    for (const auto& w : p) ++pc[w];
    for (const auto& w : r) ++rc[w];
    size_t inter = 0;
    for (const auto& [w, count] : pc) {
        auto it = rc.find(w);
        if (it != rc.end()) inter += std::min(count, it->second);
    }
    Prf out;
    out.precision = p.empty() ? (r.empty() ? 1.0 : 0.0)
                              : static_cast<double>(inter) / static_cast<double>(p.size());
    out.recall = r.empty() ? (p.empty() ? 1.0 : 0.0)
                           : static_cast<double>(inter) / static_cast<double>(r.size());
    out.f1 = out.precision + out.recall == 0.0
                 ? 0.0
                 : 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

struct PageScore {
    std::string page_id;
    double ned = 0.0;
    double cer = 0.0;
    double wer = 0.0;
    double bleu = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate = false;  // empty reference with non-empty prediction
};

struct CorpusReport {
    std::vector<PageScore> per_page;  // sorted by page_id
    PageScore macro;                  // arithmetic means, page_id "macro"
    size_t page_count = 0;
};

/// Score (page_id, prediction, reference) triples. Texts are normalized
/// first so results do not depend on the input encoding form; macro values
/// are plain per-page means.
inline CorpusReport score_corpus(
    const std::vector<std::tuple<std::string, std::string, std::string>>& pairs) {
    if (pairs.empty()) throw Error(ErrorCode::empty_corpus, "no pages to score");

    std::vector<std::tuple<std::string, std::string, std::string>> sorted = pairs;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    for (size_t i = 1; i < sorted.size(); ++i)
        if (std::get<0>(sorted[i]) == std::get<0>(sorted[i - 1]))
            throw Error(ErrorCode::schema_violation, "duplicate page_id " + std::get<0>(sorted[i]));

    CorpusReport report;
    report.page_count = sorted.size();
    report.macro.page_id = "macro";
    for (const auto& [page_id, pred_raw, ref_raw] : sorted) {
        std::string pred = normalize_text(pred_raw);
        std::string ref = normalize_text(ref_raw);
        PageScore s;
        s.page_id = page_id;
        s.ned = ned(pred, ref);
        s.cer = cer(pred, ref);
        s.wer = wer(pred, ref);
        s.bleu = bleu(pred, ref);
        Prf prf = word_prf(pred, ref);
        s.precision = prf.precision;
        s.recall = prf.recall;
        s.f1 = prf.f1;
        s.degenerate = ref.empty() && !pred.empty();
        report.macro.ned += s.ned;
        report.macro.cer += s.cer;
        report.macro.wer += s.wer;
        report.macro.bleu += s.bleu;
        report.macro.precision += s.precision;
        report.macro.recall += s.recall;
        report.macro.f1 += s.f1;
        report.per_page.push_back(std::move(s));
    }
    double count = static_cast<double>(report.page_count);
    report.macro.ned /= count;
    report.macro.cer /= count;
    report.macro.wer /= count;
    report.macro.bleu /= count;
    report.macro.precision /= count;
    report.macro.recall /= count;
    report.macro.f1 /= count;
    return report;
}

inline nlohmann::ordered_json page_score_json(const PageScore& s) {
    nlohmann::ordered_json j;
    j["page_id"] = s.page_id;
    j["ned"] = s.ned;
    j["cer"] = s.cer;
    j["wer"] = s.wer;
    j["bleu"] = s.bleu;
    j["precision"] = s.precision;
    j["recall"] = s.recall;
    j["f1"] = s.f1;
    if (s.degenerate) j["degenerate"] = true;
    return j;
}

inline std::string report_json(const CorpusReport& report) {
    nlohmann::ordered_json doc;
    doc["page_count"] = report.page_count;
    doc["macro"] = page_score_json(report.macro);
    doc["pages"] = nlohmann::ordered_json::array();
    for (const auto& s : report.per_page) doc["pages"].push_back(page_score_json(s));
    return doc.dump(2) + "\n";
}

inline std::string report_csv(const CorpusReport& report) {
    std::ostringstream out;
    out << "page_id,ned,cer,wer,bleu,precision,recall,f1\n";
    out << std::setprecision(12);
    auto row = [&](const PageScore& s) {
        out << s.page_id << ',' << s.ned << ',' << s.cer << ',' << s.wer << ',' << s.bleu << ','
            << s.precision << ',' << s.recall << ',' << s.f1 << '\n';
    };
    for (const auto& s : report.per_page) row(s);
    row(report.macro);
    return out.str();
}

inline std::string report_table(const CorpusReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(24) << "page" << std::right << std::setw(8) << "NED"
        << std::setw(8) << "CER" << std::setw(8) << "WER" << std::setw(8) << "BLEU"
        << std::setw(8) << "P" << std::setw(8) << "R" << std::setw(8) << "F1" << '\n';
    auto row = [&](const PageScore& s) {
        out << std::left << std::setw(24) << s.page_id << std::right << std::setw(8) << s.ned
            << std::setw(8) << s.cer << std::setw(8) << s.wer << std::setw(8) << s.bleu
            << std::setw(8) << s.precision << std::setw(8) << s.recall << std::setw(8) << s.f1
            << (s.degenerate ? "  (degenerate)" : "") << '\n';
    };
    for (const auto& s : report.per_page) row(s);
    out << std::string(88, '-') << '\n';
    row(report.macro);
    return out.str();
}

} // namespace ocrmend
