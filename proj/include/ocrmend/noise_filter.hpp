#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ocrmend/error.hpp"
#include "ocrmend/ocr_page.hpp"
#include "ocrmend/unicode.hpp"

namespace ocrmend {

struct FilterConfig {
    double alpha = 15.0;               // skew threshold, degrees
    double figure_overlap_min = 0.5;   // line area fraction inside a figure
    double para_gap_factor = 1.5;      // gap / median line height

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 90.0))
            throw Error(ErrorCode::config_invalid, "alpha must be in (0, 90]");
        if (!(figure_overlap_min >= 0.0 && figure_overlap_min <= 1.0))
            throw Error(ErrorCode::config_invalid, "figure_overlap_min must be in [0, 1]");
        if (!(para_gap_factor > 0.0))
            throw Error(ErrorCode::config_invalid, "para_gap_factor must be positive");
    }
};

/// Externally detected figure box; the detector itself is out of process.
struct FigureRegion {
    std::string page_id;
    Rect bbox;
    double confidence = 1.0;
    std::string label;
};

enum class MatchKind { unmatched, intact, partial, dangling };

struct MatchStatus {
    MatchKind kind = MatchKind::unmatched;
    double similarity = 0.0;  // meaningful for partial
};

/// Ordered group of kept lines. `text` is the space-joined, normalized
/// concatenation of the line texts.
struct Paragraph {
    std::string page_id;
    std::vector<OcrLine> lines;
    std::string text;
    Rect bbox;
    MatchStatus status;
};

struct LineSplit {
    std::vector<OcrLine> kept;
    std::vector<OcrLine> removed;
    std::vector<std::string> diagnostics;
};

inline LineSplit remove_skewed_lines(const std::vector<OcrLine>& lines, const FilterConfig& cfg) {
    LineSplit out;
    for (const auto& line : lines) {
        try {
            if (line_skew_angle(line).beta <= cfg.alpha)
                out.kept.push_back(line);
            else
                out.removed.push_back(line);
        } catch (const Error& e) {
            // degenerate polygons are noise, not a reason to drop the page
            out.removed.push_back(line);
            out.diagnostics.push_back(e.what());
        }
    }
    return out;
}

/// A line goes iff at least `figure_overlap_min` of its bbox area lies inside
/// some figure box (boundary inclusive). Zero-area line boxes are removed
/// when they touch a figure at all.
inline LineSplit remove_figure_text(const std::vector<OcrLine>& lines,
                                    const std::vector<FigureRegion>& figures,
                                    const FilterConfig& cfg) {
    if (!lines.empty()) {
        for (const auto& fig : figures) {
            if (fig.page_id != lines.front().page_id)
                throw Error(ErrorCode::page_mismatch,
                            "figure from page " + fig.page_id + " applied to page " +
                                lines.front().page_id);
        }
    }
    LineSplit out;
    for (const auto& line : lines) {
        Rect lb = line_bbox(line);
        double la = lb.area();
        bool inside = false;
        for (const auto& fig : figures) {
            double inter = rect_intersection_area(lb, fig.bbox);
            if (la > 0.0 ? inter / la >= cfg.figure_overlap_min
                         : (lb.min_x >= fig.bbox.min_x && lb.max_x <= fig.bbox.max_x &&
                            lb.min_y >= fig.bbox.min_y && lb.max_y <= fig.bbox.max_y)) {
                inside = true;
                break;
            }
        }
        (inside ? out.removed : out.kept).push_back(line);
    }
    return out;
}

/// Offsets give order; geometry gives the breaks. A new paragraph starts when
/// the vertical gap between consecutive line boxes exceeds
/// para_gap_factor x (median line height on the page).
inline std::vector<Paragraph> group_paragraphs(const std::vector<OcrLine>& lines,
                                               const FilterConfig& cfg) {
    std::vector<Paragraph> paragraphs;
    if (lines.empty()) return paragraphs;

    std::vector<OcrLine> sorted = lines;
    std::sort(sorted.begin(), sorted.end(),
              [](const OcrLine& a, const OcrLine& b) { return a.offset < b.offset; });

    std::vector<double> heights;
    heights.reserve(sorted.size());
    for (const auto& line : sorted) heights.push_back(line_bbox(line).height());
    std::vector<double> tmp = heights;
    std::nth_element(tmp.begin(), tmp.begin() + tmp.size() / 2, tmp.end());
    double median_height = tmp[tmp.size() / 2];
    if (sorted.size() % 2 == 0) {
        std::nth_element(tmp.begin(), tmp.begin() + tmp.size() / 2 - 1, tmp.end());
        median_height = (median_height + tmp[tmp.size() / 2 - 1]) / 2.0;
    }
    double gap_limit = cfg.para_gap_factor * median_height;

    auto flush = [&](std::vector<OcrLine>& acc) {
        if (acc.empty()) return;
        Paragraph p;
        p.page_id = acc.front().page_id;
        p.bbox = line_bbox(acc.front());
        std::string text;
        for (const auto& line : acc) {
            p.bbox = rect_union(p.bbox, line_bbox(line));
            std::string norm = normalize_text(line.text);
            if (!text.empty() && !norm.empty()) text += ' ';
            text += norm;
        }
        p.text = std::move(text);
        p.lines = std::move(acc);
        acc = {};
        paragraphs.push_back(std::move(p));
    };

    std::vector<OcrLine> acc;
    Rect prev_box{};
    for (const auto& line : sorted) {
        Rect box = line_bbox(line);
        if (!acc.empty() && box.min_y - prev_box.max_y > gap_limit) flush(acc);
        acc.push_back(line);
        prev_box = box;
    }
    flush(acc);
    return paragraphs;
}

struct FilterCharReport {
    size_t raw_chars = 0;
    size_t kept_chars = 0;
};

/// Character counts (Unicode scalars, whitespace excluded) before/after the
/// filters, the per-page series behind the noise-reduction plot.
inline FilterCharReport filter_report(const OcrPage& page_raw, const std::vector<OcrLine>& kept) {
    FilterCharReport rep;
    for (const auto& line : page_raw.lines) rep.raw_chars += count_non_space_scalars(line.text);
    for (const auto& line : kept) rep.kept_chars += count_non_space_scalars(line.text);
    return rep;
}

/// Detections file: {"<page_id>": [{"bbox": [x0,y0,x1,y1], "confidence": c, "label": s}, ...]}
inline std::map<std::string, std::vector<FigureRegion>> parse_detections(std::string_view bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::malformed_input, e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::schema_violation, "detections root must be an object");
    std::map<std::string, std::vector<FigureRegion>> out;
    for (const auto& [page_id, arr] : doc.items()) {
        if (!arr.is_array()) throw Error(ErrorCode::schema_violation, "detections per page must be an array");
        for (const auto& jf : arr) {
            FigureRegion fig;
            fig.page_id = page_id;
            try {
                const auto& bb = jf.at("bbox");
                if (!bb.is_array() || bb.size() != 4)
                    throw Error(ErrorCode::schema_violation, "bbox must be [x0,y0,x1,y1]");
                fig.bbox = Rect{bb[0].get<double>(), bb[1].get<double>(),
                                bb[2].get<double>(), bb[3].get<double>()};
                fig.confidence = jf.value("confidence", 1.0);
                fig.label = jf.value("label", std::string{});
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::schema_violation, e.what());
            }
            if (!(fig.bbox.area() > 0.0))
                throw Error(ErrorCode::schema_violation, "figure bbox must have positive area");
            if (!(fig.confidence >= 0.0 && fig.confidence <= 1.0))
                throw Error(ErrorCode::schema_violation, "confidence must be in [0, 1]");
            out[page_id].push_back(std::move(fig));
        }
    }
    return out;
}

} // namespace ocrmend
