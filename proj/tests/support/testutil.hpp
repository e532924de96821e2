#pragma once

// Shared helpers for the test suites: scoped temp directories, synthetic
// page/book builders, directory hashing for byte-identity checks, and small
// random-text generators.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <ocrmend/epub.hpp>
#include <ocrmend/ocr_page.hpp>
#include <ocrmend/pipeline.hpp>

namespace testutil {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<uint64_t> counter{0};
        path_ = fs::temp_directory_path() /
                ("ocrmend_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

/// A horizontal line box of the given height at (x, y), optionally tilted by
/// `skew_deg` around its left edge.
inline ocrmend::OcrLine make_line(const std::string& page_id, const std::string& text,
                                  int64_t offset, double x, double y, double width,
                                  double height, double skew_deg = 0.0) {
    ocrmend::OcrLine line;
    line.page_id = page_id;
    line.text = text;
    line.offset = offset;
    double rad = skew_deg * M_PI / 180.0;
    double dx = width * std::cos(rad);
    double dy = width * std::sin(rad);
    line.polygon = {ocrmend::Point{x, y}, ocrmend::Point{x + dx, y + dy},
                    ocrmend::Point{x + dx, y + dy + height}, ocrmend::Point{x, y + height}};
    return line;
}

inline std::string page_json(const std::string& page_id, double width, double height,
                             const std::vector<ocrmend::OcrLine>& lines) {
    ocrmend::OcrPage page;
    page.page_id = page_id;
    page.width = width;
    page.height = height;
    page.lines = lines;
    return ocrmend::serialize_page(page);
}

/// Vietnamese-flavoured word pool for realistic diacritic-heavy text.
inline const std::vector<std::string>& word_pool() {
    static const std::vector<std::string> pool = {
        "người", "trời", "đất", "nước", "làng", "quê", "hương", "sách", "chữ",
        "việc", "đường", "phố", "chợ", "đêm", "ngày", "tháng", "năm", "mùa",
        "xuân", "hạ", "thu", "đông", "cây", "lúa", "ruộng", "vườn", "nhà",
        "cửa", "sông", "núi", "biển", "gió", "mưa", "nắng", "trăng", "sao",
        "the", "quick", "brown", "fox", "jumps", "over", "lazy", "dog",
        "histoire", "ancienne", "livre", "papier",
    };
    return pool;
}

inline std::string random_sentence(std::mt19937& rng, size_t words) {
    const auto& pool = word_pool();
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    std::string out;
    for (size_t i = 0; i < words; ++i) {
        if (i) out += ' ';
        out += pool[pick(rng)];
    }
    return out;
}

/// Random ASCII-ish word characters, for adversarial fuzz.
inline std::string random_chars(std::mt19937& rng, size_t len) {
    std::uniform_int_distribution<int> pick('a', 'z');
    std::string out;
    for (size_t i = 0; i < len; ++i) out.push_back(static_cast<char>(pick(rng)));
    return out;
}

/// Corrupt roughly `rate` of the characters (swap vowels, drop diacritics).
inline std::string corrupt_text(std::mt19937& rng, const std::string& text, double rate) {
    std::u32string cps = ocrmend::decode_utf8(text);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> letter('a', 'z');
    for (auto& cp : cps) {
        if (ocrmend::is_space_cp(cp)) continue;
        if (coin(rng) < rate) cp = static_cast<char32_t>(letter(rng));
    }
    return ocrmend::encode_utf8(cps);
}

/// FNV-1a over the sorted relative paths and contents of a directory tree.
inline uint64_t hash_tree(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](const std::string& bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& file : files) {
        mix(fs::relative(file, root).string());
        mix("\x01");
        mix(ocrmend::read_file(file));
        mix("\x02");
    }
    return h;
}

/// A synthetic book: OCR pages whose paragraphs come from `paragraphs` (one
/// list per page), plus an epub containing `epub_paragraphs`.
struct SyntheticBook {
    fs::path ocr_dir;
    fs::path epub_path;
};

inline SyntheticBook write_book(const fs::path& root,
                                const std::vector<std::vector<std::string>>& pages,
                                const std::vector<std::string>& epub_paragraphs,
                                double page_width = 1000, double page_height = 1400) {
    SyntheticBook book;
    book.ocr_dir = root / "ocr";
    fs::create_directories(book.ocr_dir);
    for (size_t p = 0; p < pages.size(); ++p) {
        char name[32];
        std::snprintf(name, sizeof name, "page_%03zu", p);
        std::vector<ocrmend::OcrLine> lines;
        double y = 50;
        int64_t offset = 0;
        for (const auto& para : pages[p]) {
            lines.push_back(make_line(name, para, offset++, 60, y, 800, 20));
            y += 80;  // clear paragraph gap (median height 20, factor 1.5)
        }
        std::ofstream f(book.ocr_dir / (std::string(name) + ".json"), std::ios::binary);
        f << page_json(name, page_width, page_height, lines);
    }
    if (!epub_paragraphs.empty()) {
        book.epub_path = root / "book.epub";
        std::string body;
        for (const auto& para : epub_paragraphs) body += "<p>" + para + "</p>\n";
        ocrmend::write_minimal_epub(book.epub_path.string(), {{"chapter1.xhtml", body}});
    }
    return book;
}

} // namespace testutil
