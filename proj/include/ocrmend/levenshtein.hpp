#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "ocrmend/unicode.hpp"

namespace ocrmend {

/// Levenshtein distance with unit insert/delete/substitute costs over any
/// equality-comparable sequence (code points, word tokens, ...).
template <class Seq>
size_t edit_distance_seq(const Seq& a, const Seq& b) {
    const size_t n = a.size(), m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<size_t> prev(m + 1), cur(m + 1);
    std::iota(prev.begin(), prev.end(), size_t{0});
    for (size_t i = 0; i < n; ++i) {
        cur[0] = i + 1;
        for (size_t j = 0; j < m; ++j) {
            size_t sub = prev[j] + (a[i] == b[j] ? 0 : 1);
            cur[j + 1] = std::min({cur[j] + 1, prev[j + 1] + 1, sub});
        }
        prev.swap(cur);
    }
    return prev[m];
}

/// Distance over Unicode scalar values.
inline size_t edit_distance(std::u32string_view a, std::u32string_view b) {
    return edit_distance_seq(a, b);
}

inline size_t edit_distance_utf8(std::string_view a, std::string_view b) {
    return edit_distance_seq(decode_utf8(a), decode_utf8(b));
}

/// 1 - dist/max(|a|,|b|), in [0,1]; two empty strings compare equal (1.0).
inline double similarity(std::u32string_view a, std::u32string_view b) {
    size_t den = std::max(a.size(), b.size());
    if (den == 0) return 1.0;
    return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(den);
}

inline double similarity_utf8(std::string_view a, std::string_view b) {
    std::u32string ua = decode_utf8(a), ub = decode_utf8(b);
    return similarity(ua, ub);
}

/// Distances from `query` to every prefix of `text`:
/// result[j] == edit_distance(query, text[0..j)), j in [0, |text|].
/// One call scores all windows that share a start position.
inline std::vector<size_t> prefix_edit_distances(std::u32string_view query,
                                                 std::u32string_view text) {
    const size_t n = query.size(), m = text.size();
    std::vector<size_t> prev(m + 1), cur(m + 1);
    std::iota(prev.begin(), prev.end(), size_t{0});
    if (n == 0) return prev;
    for (size_t i = 0; i < n; ++i) {
        cur[0] = i + 1;
        for (size_t j = 0; j < m; ++j) {
            size_t sub = prev[j] + (query[i] == text[j] ? 0 : 1);
            cur[j + 1] = std::min({cur[j] + 1, prev[j + 1] + 1, sub});
        }
        prev.swap(cur);
    }
    return prev;
}

} // namespace ocrmend
