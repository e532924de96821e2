#pragma once

// Independent oracles for the property and acceptance suites. Everything in
// this header is deliberately written from the contract definitions, not by
// calling into the library, so a shared bug cannot hide.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

/// Textbook full-matrix Levenshtein over arbitrary element sequences.
template <class Seq>
size_t levenshtein(const Seq& a, const Seq& b) {
    const size_t n = a.size(), m = b.size();
    std::vector<std::vector<size_t>> d(n + 1, std::vector<size_t>(m + 1));
    for (size_t i = 0; i <= n; ++i) d[i][0] = i;
    for (size_t j = 0; j <= m; ++j) d[0][j] = j;
    for (size_t i = 1; i <= n; ++i)
        for (size_t j = 1; j <= m; ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    return d[n][m];
}

inline double similarity(const std::u32string& a, const std::u32string& b) {
    size_t den = std::max(a.size(), b.size());
    if (den == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(den);
}

struct WindowPick {
    double sim = -1.0;
    size_t block = 0;
    size_t start = 0;
    size_t len = 0;
    bool any = false;
};

/// Exhaustive window scan: every stride-1 start and every length in
/// [block_size - pad, block_size + pad] within each block, plus the whole
/// block when it is shorter than the minimum length. Ties keep the earliest
/// block, lowest start, shortest window. Quadratic and proud of it.
inline WindowPick exhaustive_best_window(const std::u32string& query,
                                         const std::vector<std::u32string>& blocks,
                                         size_t block_size, size_t pad) {
    const size_t n = query.size();
    const size_t len_lo = block_size > pad ? std::max<size_t>(1, block_size - pad) : 1;
    const size_t len_hi = block_size + pad;
    WindowPick best;
    auto consider = [&](double sim, size_t b, size_t p, size_t l) {
        if (!best.any || sim > best.sim) {
            best = {sim, b, p, l, true};
        }
        // equal similarity keeps the earlier candidate because iteration is
        // in (block, start, len) order
    };
    for (size_t b = 0; b < blocks.size(); ++b) {
        const std::u32string& t = blocks[b];
        const size_t m = t.size();
        if (m < len_lo) {
            double sim = similarity(query, t);
            consider(sim, b, 0, m);
            continue;
        }
        for (size_t p = 0; p + len_lo <= m; ++p) {
            for (size_t l = len_lo; l <= std::min(len_hi, m - p); ++l) {
                std::u32string window = t.substr(p, l);
                size_t dist = levenshtein(query, window);
                double sim = 1.0 - static_cast<double>(dist) /
                                       static_cast<double>(std::max(n, l));
                consider(sim, b, p, l);
            }
        }
    }
    return best;
}

/// Rectangle intersection area by brute force on an integer pixel grid;
/// boxes must have integer corners within [0, limit).
inline long pixel_grid_overlap(long ax0, long ay0, long ax1, long ay1, long bx0, long by0,
                               long bx1, long by1) {
    long count = 0;
    for (long x = std::min(ax0, bx0); x < std::max(ax1, bx1); ++x)
        for (long y = std::min(ay0, by0); y < std::max(ay1, by1); ++y)
            if (x >= ax0 && x < ax1 && y >= ay0 && y < ay1 && x >= bx0 && x < bx1 && y >= by0 &&
                y < by1)
                ++count;
    return count;
}

/// Hand-built tag stripper: removes every <...> span that parses as a tag.
/// Used to cross-check unwrap behaviour on nested wrapping.
inline std::string strip_all_tags(std::string_view s) {
    std::string out;
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '<') {
            size_t close = s.find('>', i);
            if (close != std::string_view::npos &&
                close > i + 1) {
                i = close + 1;
                continue;
            }
        }
        out.push_back(s[i++]);
    }
    return out;
}

} // namespace oracle
