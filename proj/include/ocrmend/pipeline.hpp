#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ocrmend/completion.hpp"
#include "ocrmend/config.hpp"
#include "ocrmend/correct.hpp"
#include "ocrmend/error.hpp"
#include "ocrmend/metrics.hpp"
#include "ocrmend/noise_filter.hpp"
#include "ocrmend/ocr_page.hpp"
#include "ocrmend/reference_corpus.hpp"

namespace ocrmend {

namespace fs = std::filesystem;

/// Write-then-rename so readers (and resumed runs) never observe a
/// half-written file.
inline void atomic_write_file(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw Error(ErrorCode::io_error, "short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

/// Provenance timestamp. Honors SOURCE_DATE_EPOCH (the reproducible-build
/// convention) so output trees can be made byte-stable across runs.
inline std::string provenance_timestamp() {
    std::time_t t;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"))
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    else
        t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct BookJob {
    std::string book_id;
    fs::path ocr_dir;                       // one Normalized OCR Page JSON per page
    std::optional<fs::path> epub_path;      // absent: every paragraph is dangling
    std::optional<fs::path> detections_path;
    fs::path output_dir;
    PipelineConfig config;
    bool force = false;
    int workers = 1;
};

struct PageCharRow {
    std::string page_id;
    size_t raw_chars = 0;
    size_t kept_chars = 0;
};

struct RunSummary {
    size_t pages_done = 0;
    size_t pages_skipped = 0;  // valid output already present
    size_t paragraphs_total = 0;
    std::map<std::string, size_t> by_status;
    size_t chars_raw = 0;
    size_t chars_kept = 0;
    std::vector<PageCharRow> page_chars;  // page-file order
    size_t service_attempts = 0;
    size_t service_successes = 0;
};

/// Test/monitoring hooks. `page_done` returning false stops the run after
/// the current page, which is how an interrupt is simulated in tests.
struct RunHooks {
    std::function<bool(const std::string& page_id)> page_done;
};

namespace pipedetail {

inline std::vector<fs::path> list_page_files(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::missing_input, "OCR directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw Error(ErrorCode::missing_input, "no page files in " + dir.string());
    return files;
}

inline bool label_is_valid(const fs::path& path, const std::string& fingerprint) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return false;
    nlohmann::json doc;
    try {
        f >> doc;
    } catch (const nlohmann::json::exception&) {
        return false;
    }
    return doc.is_object() && doc.contains("page_id") && doc.contains("paragraphs") &&
           doc.contains("provenance") &&
           doc["provenance"].value("config_fingerprint", std::string{}) == fingerprint;
}

struct PageResult {
    std::string page_id;
    PageCharRow chars;
    std::map<std::string, size_t> by_status;
    size_t paragraphs = 0;
    size_t service_attempts = 0;
    size_t service_successes = 0;
    bool skipped = false;
};

struct BookContext {
    const BookJob& job;
    const ReferenceCorpus* corpus;  // null when no epub
    const std::map<std::string, std::vector<FigureRegion>>& detections;
    CompletionClient& client;
    std::string fingerprint;
    std::string timestamp;
};

inline PageResult process_page(const BookContext& ctx, const fs::path& page_file,
                               const fs::path& pages_dir) {
    const PipelineConfig& cfg = ctx.job.config;
    OcrPage page = parse_page(read_file(page_file));

    fs::path label_path = pages_dir / (page.page_id + ".label");
    PageResult result;
    result.page_id = page.page_id;
    if (!ctx.job.force && label_is_valid(label_path, ctx.fingerprint)) {
        result.skipped = true;
        return result;
    }

    LineSplit unskewed = remove_skewed_lines(page.lines, cfg.filter);
    std::vector<OcrLine> kept = std::move(unskewed.kept);
    auto det = ctx.detections.find(page.page_id);
    if (det != ctx.detections.end()) {
        LineSplit defigured = remove_figure_text(kept, det->second, cfg.filter);
        kept = std::move(defigured.kept);
    }
    FilterCharReport chars = filter_report(page, kept);
    result.chars = {page.page_id, chars.raw_chars, chars.kept_chars};

    std::vector<Paragraph> paragraphs = group_paragraphs(kept, cfg.filter);
    result.paragraphs = paragraphs.size();

    CorrectionOptions opts;
    opts.gate = cfg.gate;
    opts.model_id = cfg.service.model_id;
    opts.max_output_chars = cfg.service.max_output_chars;
    opts.reference_style = cfg.reference_style;

    std::vector<CorrectionResult> corrections;
    corrections.reserve(paragraphs.size());
    for (size_t i = 0; i < paragraphs.size(); ++i) {
        Paragraph& para = paragraphs[i];
        std::string paragraph_id = page.page_id + ":" + std::to_string(i);
        LocateResult located;
        if (ctx.corpus && !para.text.empty())
            located = locate(para.text, *ctx.corpus, cfg.search);
        para.status = classify_match(para, located, cfg.intact_threshold, cfg.short_len_words);

        std::string nearby;
        if (i > 0) nearby += paragraphs[i - 1].text;
        if (i + 1 < paragraphs.size()) {
            if (!nearby.empty()) nearby += '\n';
            nearby += paragraphs[i + 1].text;
        }
        CorrectionResult cr = correct_paragraph(para, paragraph_id, located.match, nearby, opts,
                                                ctx.client);
        result.by_status[correction_status_name(cr.status)]++;
        result.service_attempts += cr.service_attempted ? 1 : 0;
        result.service_successes += cr.service_ok ? 1 : 0;
        corrections.push_back(std::move(cr));
    }

    nlohmann::ordered_json label;
    label["page_id"] = page.page_id;
    label["paragraphs"] = nlohmann::ordered_json::array();
    for (size_t i = 0; i < paragraphs.size(); ++i) {
        const Paragraph& para = paragraphs[i];
        const CorrectionResult& cr = corrections[i];
        nlohmann::ordered_json jp;
        jp["final_text"] = cr.final_text;
        jp["status"] = correction_status_name(cr.status);
        jp["bbox"] = {para.bbox.min_x, para.bbox.min_y, para.bbox.max_x, para.bbox.max_y};
        if (cr.trim_similarity) jp["trim_similarity"] = *cr.trim_similarity;
        if (!cr.diagnostic.empty()) jp["diagnostic"] = cr.diagnostic;
        label["paragraphs"].push_back(std::move(jp));
    }
    label["provenance"] = {
        {"config_fingerprint", ctx.fingerprint},
        {"model_id", cfg.service.model_id},
        {"generated_at", ctx.timestamp},
        {"config_dump", dump_effective_config(cfg)},
    };
    atomic_write_file(label_path, label.dump(2) + "\n");
    return result;
}

} // namespace pipedetail

/// Fig-plot data: one CSV row per page, (raw, kept) non-whitespace character
/// counts, ordered by raw size descending.
inline std::string filter_plot_csv(const std::vector<RunSummary>& summaries) {
    std::vector<PageCharRow> rows;
    for (const auto& s : summaries)
        rows.insert(rows.end(), s.page_chars.begin(), s.page_chars.end());
    std::stable_sort(rows.begin(), rows.end(), [](const PageCharRow& a, const PageCharRow& b) {
        return a.raw_chars > b.raw_chars;
    });
    std::string out = "page_id,raw_chars,kept_chars\n";
    for (const auto& r : rows)
        out += r.page_id + "," + std::to_string(r.raw_chars) + "," +
               std::to_string(r.kept_chars) + "\n";
    return out;
}

/// Run the whole pipeline for one book: ingest pages, filter noise, group
/// paragraphs, localize them in the reference corpus, correct via the
/// completion client, and persist one label file per page plus report files.
/// Pages with valid existing output are skipped unless job.force. Page-level
/// parallelism is bounded by job.workers; output bytes do not depend on the
/// worker count.
inline RunSummary run_book(const BookJob& job, CompletionClient& client,
                           const RunHooks* hooks = nullptr) {
    job.config.validate();
    if (job.book_id.empty()) throw Error(ErrorCode::config_invalid, "book_id is empty");

    std::vector<fs::path> page_files = pipedetail::list_page_files(job.ocr_dir);

    fs::path book_dir = job.output_dir / job.book_id;
    fs::path pages_dir = book_dir / "pages";
    fs::path report_dir = book_dir / "report";
    fs::create_directories(pages_dir);
    fs::create_directories(report_dir);

    std::map<std::string, std::vector<FigureRegion>> detections;
    if (job.detections_path) {
        if (!fs::exists(*job.detections_path))
            throw Error(ErrorCode::missing_input,
                        "detections file not found: " + job.detections_path->string());
        detections = parse_detections(read_file(*job.detections_path));
    }

    std::optional<ReferenceCorpus> corpus;
    if (job.epub_path) {
        if (!fs::exists(*job.epub_path))
            throw Error(ErrorCode::missing_input, "epub not found: " + job.epub_path->string());
        fs::path cache = book_dir / "corpus.cache.json";
        bool loaded = false;
        if (!job.force && fs::exists(cache)) {
            try {
                corpus = load_corpus_cache(cache.string());
                loaded = true;
            } catch (const Error&) {
                loaded = false;  // stale or truncated cache: re-extract
            }
        }
        if (!loaded) {
            corpus = ReferenceCorpus::from_epub(job.epub_path->string());
            save_corpus_cache(cache.string(), *corpus);
        }
    }

    ThrottledClient throttled(client, job.config.service.inflight_limit);
    pipedetail::BookContext ctx{job,
                                corpus ? &*corpus : nullptr,
                                detections,
                                throttled,
                                config_fingerprint(job.config),
                                provenance_timestamp()};

    const size_t page_count = page_files.size();
    std::vector<std::optional<pipedetail::PageResult>> slots(page_count);
    std::atomic<size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex hook_mutex;
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!stop.load()) {
            size_t i = next.fetch_add(1);
            if (i >= page_count) return;
            try {
                pipedetail::PageResult res = pipedetail::process_page(ctx, page_files[i], pages_dir);
                std::string page_id = res.page_id;
                slots[i] = std::move(res);
                if (hooks && hooks->page_done) {
                    std::lock_guard<std::mutex> lock(hook_mutex);
                    if (!hooks->page_done(page_id)) stop.store(true);
                }
            } catch (...) {
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
                stop.store(true);
                return;
            }
        }
    };

    int thread_count = std::max(1, std::min<int>(job.workers, static_cast<int>(page_count)));
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);

    RunSummary summary;
    for (const auto& slot : slots) {
        if (!slot) continue;  // interrupted before this page
        const auto& res = *slot;
        if (res.skipped) {
            summary.pages_skipped++;
            continue;
        }
        summary.pages_done++;
        summary.paragraphs_total += res.paragraphs;
        for (const auto& [status, count] : res.by_status) summary.by_status[status] += count;
        summary.chars_raw += res.chars.raw_chars;
        summary.chars_kept += res.chars.kept_chars;
        summary.page_chars.push_back(res.chars);
        summary.service_attempts += res.service_attempts;
        summary.service_successes += res.service_successes;
    }

    bool interrupted = stop.load() && !first_error;
    if (!interrupted) {
        nlohmann::ordered_json js;
        js["book_id"] = job.book_id;
        js["pages_done"] = summary.pages_done;
        js["pages_skipped"] = summary.pages_skipped;
        js["paragraphs_total"] = summary.paragraphs_total;
        js["by_status"] = summary.by_status;
        js["chars_raw"] = summary.chars_raw;
        js["chars_kept"] = summary.chars_kept;
        atomic_write_file(report_dir / "summary.json", js.dump(2) + "\n");
        atomic_write_file(report_dir / "filter_chars.csv", filter_plot_csv({summary}));
    }

    if (client.is_live() && summary.service_attempts > 0 && summary.service_successes == 0)
        throw Error(ErrorCode::service_unavailable,
                    "no completion call succeeded in live mode (" +
                        std::to_string(summary.service_attempts) + " attempts)");
    return summary;
}

/// Read per-page text from a directory: .label files contribute their
/// paragraphs' final_text joined by newlines, .txt files their raw content.
inline std::map<std::string, std::string> read_page_texts(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::missing_input, "directory not found: " + dir.string());
    std::map<std::string, std::string> out;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        if (path.extension() == ".label") {
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(read_file(path));
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::malformed_input, path.string() + ": " + e.what());
            }
            std::string text;
            for (const auto& jp : doc.at("paragraphs")) {
                if (!text.empty()) text += '\n';
                text += jp.at("final_text").get<std::string>();
            }
            out[doc.at("page_id").get<std::string>()] = std::move(text);
        } else if (path.extension() == ".txt") {
            out[path.stem().string()] = read_file(path);
        }
    }
    if (out.empty())
        throw Error(ErrorCode::missing_input, "no .label or .txt pages in " + dir.string());
    return out;
}

/// Score predictions against references, page by page. Page sets must agree
/// unless `intersect`, in which case the common subset is scored.
inline CorpusReport evaluate_dirs(const fs::path& pred_dir, const fs::path& ref_dir,
                                  bool intersect = false) {
    std::map<std::string, std::string> pred = read_page_texts(pred_dir);
    std::map<std::string, std::string> ref = read_page_texts(ref_dir);

    std::vector<std::tuple<std::string, std::string, std::string>> pairs;
    if (intersect) {
        for (const auto& [page_id, text] : pred) {
            auto it = ref.find(page_id);
            if (it != ref.end()) pairs.emplace_back(page_id, text, it->second);
        }
        if (pairs.empty())
            throw Error(ErrorCode::page_set_mismatch, "no common pages between directories");
    } else {
        for (const auto& [page_id, text] : pred) {
            auto it = ref.find(page_id);
            if (it == ref.end())
                throw Error(ErrorCode::page_set_mismatch, "page " + page_id + " missing from reference");
            pairs.emplace_back(page_id, text, it->second);
        }
        for (const auto& [page_id, text] : ref)
            if (!pred.count(page_id))
                throw Error(ErrorCode::page_set_mismatch, "page " + page_id + " missing from prediction");
    }
    return score_corpus(pairs);
}

struct LocateSurveyRow {
    std::string page_id;
    size_t paragraph_index = 0;
    double best_similarity = 0.0;
    MatchKind kind = MatchKind::unmatched;
};

inline const char* match_kind_name(MatchKind k) {
    switch (k) {
        case MatchKind::unmatched: return "unmatched";
        case MatchKind::intact: return "intact";
        case MatchKind::partial: return "partial";
        case MatchKind::dangling: return "dangling";
    }
    return "unknown";
}

/// Localization dry run: filter and group every page, locate each paragraph,
/// and report similarity plus routing, without touching the LLM.
inline std::vector<LocateSurveyRow> survey_locate(const BookJob& job) {
    job.config.validate();
    std::vector<fs::path> page_files = pipedetail::list_page_files(job.ocr_dir);
    if (!job.epub_path) throw Error(ErrorCode::missing_input, "locate survey requires an epub");
    ReferenceCorpus corpus = ReferenceCorpus::from_epub(job.epub_path->string());

    std::map<std::string, std::vector<FigureRegion>> detections;
    if (job.detections_path && fs::exists(*job.detections_path))
        detections = parse_detections(read_file(*job.detections_path));

    std::vector<LocateSurveyRow> rows;
    for (const auto& file : page_files) {
        OcrPage page = parse_page(read_file(file));
        LineSplit unskewed = remove_skewed_lines(page.lines, job.config.filter);
        std::vector<OcrLine> kept = std::move(unskewed.kept);
        auto det = detections.find(page.page_id);
        if (det != detections.end())
            kept = remove_figure_text(kept, det->second, job.config.filter).kept;
        std::vector<Paragraph> paragraphs = group_paragraphs(kept, job.config.filter);
        for (size_t i = 0; i < paragraphs.size(); ++i) {
            Paragraph& para = paragraphs[i];
            LocateResult located = locate(para.text, corpus, job.config.search);
            para.status = classify_match(para, located, job.config.intact_threshold,
                                         job.config.short_len_words);
            rows.push_back({page.page_id, i, located.best_similarity, para.status.kind});
        }
    }
    return rows;
}

} // namespace ocrmend
