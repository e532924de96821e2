#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "ocrmend/error.hpp"

namespace ocrmend {

/// Whitespace test over code points: ASCII whitespace plus the Unicode
/// space/line separators that show up in ebook text.
inline bool is_space_cp(char32_t c) {
    switch (c) {
        case U'\t': case U'\n': case U'\v': case U'\f': case U'\r': case U' ':
        case 0x0085:  // NEL
        case 0x00A0:  // no-break space
        case 0x1680:
        case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

/// Decode UTF-8 into code points. Invalid sequences become U+FFFD unless
/// `strict`, in which case they raise malformed_input.
inline std::u32string decode_utf8(std::string_view s, bool strict = false) {
    std::u32string out;
    out.reserve(s.size());
    size_t i = 0;
    auto bad = [&](size_t n) -> size_t {
        if (strict) throw Error(ErrorCode::malformed_input, "invalid UTF-8 sequence");
        out.push_back(0xFFFD);
        return n;
    };
    while (i < s.size()) {
        unsigned char b0 = static_cast<unsigned char>(s[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int len;
        char32_t cp;
        if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
        else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
        else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
        else { i += bad(1); continue; }
        if (i + len > s.size()) { i += bad(1); continue; }
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            unsigned char bk = static_cast<unsigned char>(s[i + k]);
            if ((bk & 0xC0) != 0x80) { ok = false; break; }
            cp = (cp << 6) | (bk & 0x3F);
        }
        if (!ok) { i += bad(1); continue; }
        // overlong forms, surrogates, out of range
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
            i += bad(len);
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) append_utf8(out, cp);
    return out;
}

/// Canonical composition (NFC) of a UTF-8 string.
inline std::string nfc(std::string_view s) {
    UErrorCode ec = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(ec);
    if (U_FAILURE(ec)) throw Error(ErrorCode::io_error, "ICU NFC instance unavailable");
    icu::UnicodeString us = icu::UnicodeString::fromUTF8(
        icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    icu::UnicodeString composed = norm->normalize(us, ec);
    if (U_FAILURE(ec)) throw Error(ErrorCode::malformed_input, "NFC normalization failed");
    std::string out;
    composed.toUTF8String(out);
    return out;
}

/// NFC + whitespace-run collapse to single spaces + trim. Idempotent.
inline std::string normalize_text(std::string_view s) {
    std::u32string cps = decode_utf8(nfc(s));
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    bool emitted = false;
    for (char32_t cp : cps) {
        if (is_space_cp(cp)) {
            pending_space = emitted;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        append_utf8(out, cp);
        emitted = true;
    }
    return out;
}

/// Words are maximal runs of non-whitespace code points.
inline std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> words;
    std::u32string cps = decode_utf8(s);
    std::string cur;
    for (char32_t cp : cps) {
        if (is_space_cp(cp)) {
            if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
        } else {
            append_utf8(cur, cp);
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

inline size_t word_count(std::string_view s) {
    std::u32string cps = decode_utf8(s);
    size_t n = 0;
    bool in_word = false;
    for (char32_t cp : cps) {
        bool sp = is_space_cp(cp);
        if (!sp && !in_word) ++n;
        in_word = !sp;
    }
    return n;
}

inline size_t count_scalars(std::string_view s) { return decode_utf8(s).size(); }

inline size_t count_non_space_scalars(std::string_view s) {
    std::u32string cps = decode_utf8(s);
    size_t n = 0;
    for (char32_t cp : cps)
        if (!is_space_cp(cp)) ++n;
    return n;
}

inline bool is_blank(std::string_view s) {
    for (char32_t cp : decode_utf8(s))
        if (!is_space_cp(cp)) return false;
    return true;
}

} // namespace ocrmend
