#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ocrmend/error.hpp"
#include "ocrmend/unicode.hpp"

namespace ocrmend {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Rect {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    double area() const { return width() * height(); }
};

inline Rect rect_union(const Rect& a, const Rect& b) {
    return {std::min(a.min_x, b.min_x), std::min(a.min_y, b.min_y),
            std::max(a.max_x, b.max_x), std::max(a.max_y, b.max_y)};
}

inline double rect_intersection_area(const Rect& a, const Rect& b) {
    double w = std::min(a.max_x, b.max_x) - std::max(a.min_x, b.min_x);
    double h = std::min(a.max_y, b.max_y) - std::max(a.min_y, b.min_y);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

/// One recognized text line. Polygon points are ordered top-left, top-right,
/// bottom-right, bottom-left; `offset` is the engine's reading-order key and
/// is treated as opaque (never used for slicing).
struct OcrLine {
    std::string text;
    std::array<Point, 4> polygon{};
    int64_t offset = 0;
    std::string page_id;
};

struct OcrPage {
    std::string page_id;
    double width = 0.0;
    double height = 0.0;
    std::vector<OcrLine> lines;  // sorted by offset
};

/// Inclination of a line's top edge relative to the horizontal, folded into
/// [0, 90] degrees so that left and right tilt score the same.
struct SkewAngle {
    double beta = 0.0;
};

inline SkewAngle line_skew_angle(const OcrLine& line) {
    const Point& tl = line.polygon[0];
    const Point& tr = line.polygon[1];
    double dx = tr.x - tl.x;
    double dy = tr.y - tl.y;
    if (dx == 0.0 && dy == 0.0)
        throw Error(ErrorCode::degenerate_polygon,
                    "top edge has zero length (page " + line.page_id + ")");
    double beta = std::atan2(std::fabs(dy), std::fabs(dx)) * 180.0 / M_PI;
    return SkewAngle{beta};
}

inline Rect line_bbox(const OcrLine& line) {
    Rect r{line.polygon[0].x, line.polygon[0].y, line.polygon[0].x, line.polygon[0].y};
    for (int i = 1; i < 4; ++i) {
        r.min_x = std::min(r.min_x, line.polygon[i].x);
        r.min_y = std::min(r.min_y, line.polygon[i].y);
        r.max_x = std::max(r.max_x, line.polygon[i].x);
        r.max_y = std::max(r.max_y, line.polygon[i].y);
    }
    return r;
}

namespace detail {

inline double require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw Error(ErrorCode::schema_violation, std::string(what) + " is not finite");
    return v;
}

} // namespace detail

/// Parse one Normalized OCR Page document (JSON). Lines come back sorted by
/// offset; all type invariants are enforced here so downstream code can rely
/// on them.
inline OcrPage parse_page(std::string_view bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::malformed_input, e.what());
    }
    if (!doc.is_object() || !doc.contains("page_id") || !doc.contains("width") ||
        !doc.contains("height") || !doc.contains("lines"))
        throw Error(ErrorCode::schema_violation, "page document missing required field");

    OcrPage page;
    try {
        page.page_id = doc.at("page_id").get<std::string>();
        page.width = detail::require_finite(doc.at("width").get<double>(), "width");
        page.height = detail::require_finite(doc.at("height").get<double>(), "height");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema_violation, e.what());
    }
    if (page.page_id.empty()) throw Error(ErrorCode::schema_violation, "empty page_id");
    if (page.width <= 0.0 || page.height <= 0.0)
        throw Error(ErrorCode::schema_violation, "page dimensions must be positive");

    const auto& lines = doc.at("lines");
    if (!lines.is_array()) throw Error(ErrorCode::schema_violation, "lines must be an array");

    constexpr double kOverhangTolerance = 2.0;  // px
    std::set<int64_t> seen_offsets;
    for (const auto& jl : lines) {
        if (!jl.is_object() || !jl.contains("text") || !jl.contains("polygon") || !jl.contains("offset"))
            throw Error(ErrorCode::schema_violation, "line missing required field");
        OcrLine line;
        line.page_id = page.page_id;
        try {
            line.text = jl.at("text").get<std::string>();
            line.offset = jl.at("offset").get<int64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::schema_violation, e.what());
        }
        if (is_blank(line.text))
            throw Error(ErrorCode::schema_violation, "line text blank (page " + page.page_id + ")");
        if (line.offset < 0)
            throw Error(ErrorCode::schema_violation, "negative offset (page " + page.page_id + ")");
        const auto& poly = jl.at("polygon");
        if (!poly.is_array() || poly.size() != 4)
            throw Error(ErrorCode::schema_violation, "polygon must have exactly 4 points");
        for (int i = 0; i < 4; ++i) {
            const auto& pt = poly[i];
            if (!pt.is_array() || pt.size() != 2)
                throw Error(ErrorCode::schema_violation, "polygon point must be [x, y]");
            double x, y;
            try {
                x = detail::require_finite(pt[0].get<double>(), "polygon x");
                y = detail::require_finite(pt[1].get<double>(), "polygon y");
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::schema_violation, e.what());
            }
            if (x < 0.0 || y < 0.0)
                throw Error(ErrorCode::schema_violation, "negative polygon coordinate");
            if (x > page.width + kOverhangTolerance || y > page.height + kOverhangTolerance)
                throw Error(ErrorCode::schema_violation, "polygon outside page bounds");
            line.polygon[i] = Point{x, y};
        }
        if (!seen_offsets.insert(line.offset).second)
            throw Error(ErrorCode::duplicate_offset,
                        "offset " + std::to_string(line.offset) + " repeats on page " + page.page_id);
        page.lines.push_back(std::move(line));
    }
    std::sort(page.lines.begin(), page.lines.end(),
              [](const OcrLine& a, const OcrLine& b) { return a.offset < b.offset; });
    return page;
}

inline std::string serialize_page(const OcrPage& page) {
    nlohmann::ordered_json doc;
    doc["page_id"] = page.page_id;
    doc["width"] = page.width;
    doc["height"] = page.height;
    doc["lines"] = nlohmann::ordered_json::array();
    for (const auto& line : page.lines) {
        nlohmann::ordered_json jl;
        jl["text"] = line.text;
        jl["polygon"] = {{line.polygon[0].x, line.polygon[0].y},
                         {line.polygon[1].x, line.polygon[1].y},
                         {line.polygon[2].x, line.polygon[2].y},
                         {line.polygon[3].x, line.polygon[3].y}};
        jl["offset"] = line.offset;
        doc["lines"].push_back(std::move(jl));
    }
    return doc.dump(2) + "\n";
}

} // namespace ocrmend
