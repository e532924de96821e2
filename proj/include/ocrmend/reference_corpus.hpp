#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ocrmend/epub.hpp"
#include "ocrmend/error.hpp"
#include "ocrmend/levenshtein.hpp"
#include "ocrmend/noise_filter.hpp"
#include "ocrmend/unicode.hpp"

namespace ocrmend {

struct ReferenceBlock {
    std::string block_id;
    std::string text;        // normalized UTF-8
    std::u32string text32;   // same text as scalar values, for window scoring
};

/// Normalized, windowable reference text extracted from one ebook.
/// Immutable after construction; safe to share across worker threads.
struct ReferenceCorpus {
    std::vector<ReferenceBlock> blocks;
    size_t total_chars = 0;

    static ReferenceCorpus from_blocks(std::vector<EpubBlock> raw) {
        ReferenceCorpus corpus;
        for (auto& b : raw) {
            ReferenceBlock rb;
            rb.block_id = std::move(b.block_id);
            rb.text = std::move(b.text);
            rb.text32 = decode_utf8(rb.text);
            if (rb.text32.empty()) continue;
            corpus.total_chars += rb.text32.size();
            corpus.blocks.push_back(std::move(rb));
        }
        return corpus;
    }

    static ReferenceCorpus from_epub(const std::string& path) {
        return from_blocks(extract_epub_blocks(path));
    }
};

inline void save_corpus_cache(const std::string& path, const ReferenceCorpus& corpus) {
    nlohmann::ordered_json doc;
    doc["blocks"] = nlohmann::ordered_json::array();
    for (const auto& b : corpus.blocks)
        doc["blocks"].push_back({{"block_id", b.block_id}, {"text", b.text}});
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + path);
    f << doc.dump(2) << "\n";
}

inline ReferenceCorpus load_corpus_cache(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::io_error, "cannot open " + path);
    nlohmann::json doc;
    try {
        f >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::malformed_input, e.what());
    }
    std::vector<EpubBlock> raw;
    for (const auto& jb : doc.at("blocks"))
        raw.push_back(EpubBlock{jb.at("block_id").get<std::string>(),
                                jb.at("text").get<std::string>()});
    return ReferenceCorpus::from_blocks(std::move(raw));
}

struct SearchConfig {
    size_t block_size = 800;       // window length, scalars
    size_t stride = 0;             // 0 = block_size / 2
    double found_threshold = 0.60;
    size_t pad = 200;              // context added each side of the best window

    size_t effective_stride() const { return stride == 0 ? std::max<size_t>(1, block_size / 2) : stride; }

    void validate() const {
        if (block_size == 0) throw Error(ErrorCode::config_invalid, "block_size must be positive");
        if (stride > block_size)
            throw Error(ErrorCode::config_invalid, "stride must be in (0, block_size]");
        if (!(found_threshold >= 0.0 && found_threshold <= 1.0))
            throw Error(ErrorCode::config_invalid, "found_threshold must be in [0, 1]");
    }
};

/// A located reference window. `span_*` are scalar-value indices into the
/// normalized block text; `padded_text` is the span widened by `pad` scalars
/// on each side, clamped to the block.
struct MatchCandidate {
    std::string block_id;
    size_t span_begin = 0;
    size_t span_end = 0;
    double similarity = 0.0;
    std::string padded_text;
};

struct LocateResult {
    std::optional<MatchCandidate> match;  // engaged iff best similarity >= threshold
    double best_similarity = 0.0;         // always the true best over the candidate set
};

namespace locatedetail {

// Candidate windows per block of length m: every (start, len) with
// len in [len_lo, len_hi] and start+len <= m; if the whole block is shorter
// than len_lo, the single candidate (0, m). Best = highest similarity, ties
// to the earliest (block, start), then the shortest window.
struct BestWindow {
    double sim = -1.0;
    size_t block = 0;
    size_t start = 0;
    size_t len = 0;

    void consider(double s, size_t b, size_t p, size_t l) {
        if (s > sim) {
            sim = s; block = b; start = p; len = l;
        } else if (s == sim && std::tie(b, p, l) < std::tie(block, start, len)) {
            block = b; start = p; len = l;
        }
    }
};

struct CoarseWindow {
    size_t start = 0;
    size_t len = 0;
    size_t dist = 0;
};

} // namespace locatedetail

namespace locatedetail {

// Below this corpus size, the refinement sweep covers every start position,
// so the result equals an exhaustive stride-1 scan over all candidate
// windows (start, length). Larger corpora refine only around the coarse
// winner, which keeps the cost near linear in the corpus size.
constexpr size_t kExhaustiveTotalChars = 4096;

} // namespace locatedetail

/// Localize `query` inside the corpus.
///
/// Candidate windows per block of m scalars: every (start, len) with
/// len in [block_size - pad, block_size + pad] and start + len <= m, plus the
/// whole block when it is shorter than block_size - pad. A coarse pass scores
/// stride-spaced windows of block_size scalars; a stride-1 sweep then refines
/// start and length. Small corpora sweep every start (exhaustive by
/// construction); large corpora sweep one stride around the coarse winner.
/// Ties always resolve to the earliest block, lowest start, shortest window.
inline LocateResult locate(std::string_view query, const ReferenceCorpus& corpus,
                           const SearchConfig& cfg) {
    cfg.validate();
    std::u32string q32 = decode_utf8(query);
    if (q32.empty()) throw Error(ErrorCode::empty_query, "locate called with empty query");
    if (corpus.blocks.empty()) return {};

    const size_t n = q32.size();
    const size_t L = cfg.block_size;
    const size_t s = cfg.effective_stride();
    const size_t len_lo = L > cfg.pad ? std::max<size_t>(1, L - cfg.pad) : 1;
    const size_t len_hi = L + cfg.pad;
    const bool exhaustive = corpus.total_chars <= locatedetail::kExhaustiveTotalChars;

    locatedetail::BestWindow best;

    std::vector<std::vector<locatedetail::CoarseWindow>> coarse(corpus.blocks.size());
    size_t best_coarse_block = 0;
    size_t best_coarse_start = 0;
    size_t best_coarse_dist = std::numeric_limits<size_t>::max();
    for (size_t b = 0; b < corpus.blocks.size(); ++b) {
        const std::u32string& t = corpus.blocks[b].text32;
        const size_t m = t.size();
        for (size_t p = 0;; p += s) {
            size_t end = std::min(p + L, m);
            size_t dist = edit_distance(q32, std::u32string_view(t).substr(p, end - p));
            coarse[b].push_back({p, end - p, dist});
            if (dist < best_coarse_dist) {
                best_coarse_dist = dist;
                best_coarse_block = b;
                best_coarse_start = p;
            }
            if (end == m) break;
        }
    }

    auto sweep_start = [&](size_t b, size_t p) {
        const std::u32string& t = corpus.blocks[b].text32;
        const size_t m = t.size();
        if (p + len_lo > m) return;
        size_t span_hi = std::min(len_hi, m - p);
        auto dists = prefix_edit_distances(q32, std::u32string_view(t).substr(p, span_hi));
        for (size_t l = len_lo; l <= span_hi; ++l) {
            double sim = 1.0 - static_cast<double>(dists[l]) /
                                   static_cast<double>(std::max(n, l));
            best.consider(sim, b, p, l);
        }
    };

    // whole-block candidates for blocks too short to hold a minimum window
    for (size_t b = 0; b < corpus.blocks.size(); ++b) {
        const size_t m = corpus.blocks[b].text32.size();
        if (m < len_lo) {
            double sim = 1.0 - static_cast<double>(coarse[b].front().dist) /
                                   static_cast<double>(std::max(n, m));
            best.consider(sim, b, 0, m);
        }
    }

    if (exhaustive) {
        const double den_cap = static_cast<double>(std::max(n, len_hi));
        for (size_t b = 0; b < corpus.blocks.size(); ++b) {
            const std::u32string& t = corpus.blocks[b].text32;
            const size_t m = t.size();
            if (m < len_lo) continue;
            // seed with the block's best coarse region so pruning bites early
            size_t seed = coarse[b].front().start;
            size_t seed_dist = coarse[b].front().dist;
            for (const auto& c : coarse[b])
                if (c.dist < seed_dist) { seed_dist = c.dist; seed = c.start; }
            sweep_start(b, seed);

            for (size_t p = 0; p + len_lo <= m; ++p) {
                if (p == seed) continue;
                size_t span_hi = std::min(len_hi, m - p);
                // Lower-bound the best distance reachable from this start via
                // the coarse scores: dist(q, w') >= c.dist - dist(w, w') and
                // dist(w, w') <= start shift + end shift, with the end shift
                // taken at its worst over the length range so the bound holds
                // for every candidate window at p. Pruning is an optimization
                // only; a pruned start provably cannot beat the current best.
                double d_lb = 0.0;
                for (const auto& c : coarse[b]) {
                    size_t start_shift = p > c.start ? p - c.start : c.start - p;
                    size_t target = c.start + c.len;
                    size_t end_min = p + len_lo, end_max = p + span_hi;
                    size_t end_shift =
                        std::max(target > end_min ? target - end_min : end_min - target,
                                 target > end_max ? target - end_max : end_max - target);
                    double lb = static_cast<double>(c.dist) -
                                static_cast<double>(start_shift + end_shift);
                    d_lb = std::max(d_lb, lb);
                }
                if (d_lb > 0.0 && 1.0 - d_lb / den_cap < best.sim) continue;
                sweep_start(b, p);
            }
        }
    } else {
        const size_t m = corpus.blocks[best_coarse_block].text32.size();
        if (m >= len_lo) {
            size_t from = best_coarse_start > s ? best_coarse_start - s : 0;
            size_t to = std::min(best_coarse_start + s, m >= len_lo ? m - len_lo : 0);
            for (size_t p = from; p <= to; ++p) sweep_start(best_coarse_block, p);
        }
    }

    LocateResult result;
    if (best.sim < 0.0) return result;
    result.best_similarity = best.sim;
    if (best.sim >= cfg.found_threshold) {
        const ReferenceBlock& blk = corpus.blocks[best.block];
        size_t pad_begin = best.start > cfg.pad ? best.start - cfg.pad : 0;
        size_t pad_end = std::min(blk.text32.size(), best.start + best.len + cfg.pad);
        MatchCandidate cand;
        cand.block_id = blk.block_id;
        cand.span_begin = best.start;
        cand.span_end = best.start + best.len;
        cand.similarity = best.sim;
        cand.padded_text = encode_utf8(
            std::u32string_view(blk.text32).substr(pad_begin, pad_end - pad_begin));
        result.match = std::move(cand);
    }
    return result;
}

/// Route a paragraph by its localization outcome. Short texts go to the
/// dangling path even when a window was found; they carry too little signal
/// for reference-guided correction.
inline MatchStatus classify_match(const Paragraph& paragraph, const LocateResult& result,
                                  double intact_threshold = 0.995, size_t short_len_words = 4) {
    if (!result.match || word_count(paragraph.text) <= short_len_words)
        return {MatchKind::dangling, 0.0};
    if (result.match->similarity >= intact_threshold)
        return {MatchKind::intact, result.match->similarity};
    return {MatchKind::partial, result.match->similarity};
}

} // namespace ocrmend
