#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ocrmend/error.hpp"
#include "ocrmend/unicode.hpp"
#include "ocrmend/zip.hpp"

namespace ocrmend {

namespace epubdetail {

inline std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back(s[i++]);
            continue;
        }
        std::string_view ent = s.substr(i + 1, semi - i - 1);
        if (ent == "amp") out.push_back('&');
        else if (ent == "lt") out.push_back('<');
        else if (ent == "gt") out.push_back('>');
        else if (ent == "quot") out.push_back('"');
        else if (ent == "apos") out.push_back('\'');
        else if (ent == "nbsp") append_utf8(out, 0x00A0);
        else if (!ent.empty() && ent[0] == '#') {
            char32_t cp = 0;
            bool ok = ent.size() > 1;
            if (ent.size() > 2 && (ent[1] == 'x' || ent[1] == 'X')) {
                for (size_t k = 2; k < ent.size() && ok; ++k) {
                    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(ent[k])));
                    if (c >= '0' && c <= '9') cp = cp * 16 + (c - '0');
                    else if (c >= 'a' && c <= 'f') cp = cp * 16 + (c - 'a' + 10);
                    else ok = false;
                }
            } else {
                for (size_t k = 1; k < ent.size() && ok; ++k) {
                    if (ent[k] >= '0' && ent[k] <= '9') cp = cp * 10 + (ent[k] - '0');
                    else ok = false;
                }
            }
            if (ok && cp > 0 && cp <= 0x10FFFF) append_utf8(out, cp);
            else { out.push_back(s[i]); ++i; continue; }
        } else {
            out.push_back(s[i++]);
            continue;
        }
        i = semi + 1;
    }
    return out;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool is_block_tag(std::string_view name) {
    static const char* kBlocks[] = {
        "p", "div", "h1", "h2", "h3", "h4", "h5", "h6", "li", "ul", "ol",
        "table", "tr", "blockquote", "pre", "section", "article", "aside",
        "header", "footer", "figure", "figcaption", "dl", "dt", "dd", "hr",
        "body", "title",
    };
    for (const char* b : kBlocks)
        if (name == b) return true;
    return false;
}

/// Pull an attribute value out of a raw tag string, e.g. find_attr(tag, "href").
inline std::optional<std::string> find_attr(std::string_view tag, std::string_view attr) {
    std::string lowered = lower(tag);
    std::string needle = std::string(attr) + "=";
    size_t pos = 0;
    while ((pos = lowered.find(needle, pos)) != std::string::npos) {
        // attribute name must not be a suffix of a longer name
        if (pos > 0 && (std::isalnum(static_cast<unsigned char>(lowered[pos - 1])) ||
                        lowered[pos - 1] == '-' || lowered[pos - 1] == '_')) {
            pos += needle.size();
            continue;
        }
        size_t v = pos + needle.size();
        if (v >= tag.size()) return std::nullopt;
        char quote = tag[v];
        if (quote != '"' && quote != '\'') return std::nullopt;
        size_t end = tag.find(quote, v + 1);
        if (end == std::string_view::npos) return std::nullopt;
        return decode_entities(tag.substr(v + 1, end - v - 1));
    }
    return std::nullopt;
}

/// Strip markup down to visible text. Inline tags vanish without inserting
/// separation (so `<p>A<b>B</b>C</p>` reads "ABC"); block-level tags split
/// the output into blocks; script/style/head content is dropped entirely.
inline std::vector<std::string> extract_text_blocks(std::string_view xhtml) {
    std::vector<std::string> blocks;
    std::string cur;
    auto flush = [&] {
        if (!is_blank(cur)) blocks.push_back(cur);
        cur.clear();
    };

    size_t i = 0;
    const size_t n = xhtml.size();
    while (i < n) {
        char c = xhtml[i];
        if (c != '<') {
            cur.push_back(c);
            ++i;
            continue;
        }
        if (xhtml.compare(i, 4, "<!--") == 0) {
            size_t end = xhtml.find("-->", i + 4);
            i = end == std::string_view::npos ? n : end + 3;
            continue;
        }
        if (xhtml.compare(i, 9, "<![CDATA[") == 0) {
            size_t end = xhtml.find("]]>", i + 9);
            size_t stop = end == std::string_view::npos ? n : end;
            cur.append(xhtml.substr(i + 9, stop - (i + 9)));
            i = end == std::string_view::npos ? n : end + 3;
            continue;
        }
        if (i + 1 >= n || !(std::isalpha(static_cast<unsigned char>(xhtml[i + 1])) ||
                            xhtml[i + 1] == '/' || xhtml[i + 1] == '!' || xhtml[i + 1] == '?')) {
            cur.push_back(c);  // stray '<' in text
            ++i;
            continue;
        }
        size_t close = xhtml.find('>', i + 1);
        if (close == std::string_view::npos) break;
        std::string_view tag = xhtml.substr(i + 1, close - i - 1);
        i = close + 1;

        bool closing = !tag.empty() && tag[0] == '/';
        std::string_view body = closing ? tag.substr(1) : tag;
        size_t name_end = 0;
        while (name_end < body.size() && !std::isspace(static_cast<unsigned char>(body[name_end])) &&
               body[name_end] != '/')
            ++name_end;
        std::string name = lower(body.substr(0, name_end));

        if (!closing && (name == "script" || name == "style" || name == "head")) {
            std::string close_tag = "</" + name;
            size_t end = lower(std::string(xhtml.substr(i))).find(close_tag);
            if (end == std::string::npos) { i = n; continue; }
            size_t gt = xhtml.find('>', i + end);
            i = gt == std::string_view::npos ? n : gt + 1;
            continue;
        }
        if (name == "br") {
            cur.push_back(' ');
            continue;
        }
        if (is_block_tag(name)) flush();
        // inline tags contribute nothing
    }
    flush();

    for (auto& b : blocks) b = decode_entities(b);
    return blocks;
}

inline std::string dirname(std::string_view path) {
    size_t slash = path.rfind('/');
    return slash == std::string_view::npos ? std::string{} : std::string(path.substr(0, slash + 1));
}

/// Resolve href relative to the OPF directory, handling "../" hops.
inline std::string resolve_href(std::string_view base_dir, std::string_view href) {
    std::string path = std::string(base_dir) + std::string(href);
    std::vector<std::string> parts;
    size_t start = 0;
    while (start <= path.size()) {
        size_t slash = path.find('/', start);
        std::string part = path.substr(start, slash == std::string::npos ? std::string::npos
                                                                         : slash - start);
        if (part == "..") {
            if (!parts.empty()) parts.pop_back();
        } else if (!part.empty() && part != ".") {
            parts.push_back(part);
        }
        if (slash == std::string::npos) break;
        start = slash + 1;
    }
    std::string out;
    for (size_t k = 0; k < parts.size(); ++k) {
        if (k) out += '/';
        out += parts[k];
    }
    return out;
}

} // namespace epubdetail

/// Raw extraction result: one entry per non-empty text block, in spine order.
struct EpubBlock {
    std::string block_id;  // "<content-doc href>#<index>"
    std::string text;      // normalized
};

inline std::vector<EpubBlock> extract_epub_blocks(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw Error(ErrorCode::io_error, "cannot open " + path);
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != 'K')
        throw Error(ErrorCode::not_an_epub, path + " is not a zip container");
    probe.close();

    ZipReader zip = ZipReader::open(path);

    if (!zip.contains("META-INF/container.xml"))
        throw Error(ErrorCode::not_an_epub, "missing META-INF/container.xml");
    std::string container = zip.read("META-INF/container.xml");
    size_t rf = epubdetail::lower(container).find("<rootfile");
    std::optional<std::string> opf_path;
    if (rf != std::string::npos) {
        size_t gt = container.find('>', rf);
        if (gt != std::string::npos)
            opf_path = epubdetail::find_attr(
                std::string_view(container).substr(rf, gt - rf), "full-path");
    }
    if (!opf_path) throw Error(ErrorCode::not_an_epub, "container.xml has no rootfile");
    if (!zip.contains(*opf_path))
        throw Error(ErrorCode::not_an_epub, "missing package document " + *opf_path);

    std::string opf = zip.read(*opf_path);
    std::string opf_dir = epubdetail::dirname(*opf_path);

    // manifest: id -> href
    std::map<std::string, std::string> manifest;
    {
        std::string lowered = epubdetail::lower(opf);
        size_t pos = 0;
        while ((pos = lowered.find("<item", pos)) != std::string::npos) {
            if (lowered.compare(pos, 8, "<itemref") == 0) { pos += 8; continue; }
            size_t gt = opf.find('>', pos);
            if (gt == std::string::npos) break;
            std::string_view tag = std::string_view(opf).substr(pos, gt - pos);
            auto id = epubdetail::find_attr(tag, "id");
            auto href = epubdetail::find_attr(tag, "href");
            if (id && href) manifest[*id] = *href;
            pos = gt + 1;
        }
    }
    // spine: ordered idrefs
    std::vector<std::string> spine_hrefs;
    {
        std::string lowered = epubdetail::lower(opf);
        size_t pos = 0;
        while ((pos = lowered.find("<itemref", pos)) != std::string::npos) {
            size_t gt = opf.find('>', pos);
            if (gt == std::string::npos) break;
            auto idref = epubdetail::find_attr(std::string_view(opf).substr(pos, gt - pos), "idref");
            if (idref) {
                auto it = manifest.find(*idref);
                if (it != manifest.end()) spine_hrefs.push_back(it->second);
            }
            pos = gt + 1;
        }
    }
    if (spine_hrefs.empty()) {
        // tolerate spineless packages: fall back to manifest xhtml order
        for (const auto& [id, href] : manifest)
            if (href.find(".xhtml") != std::string::npos || href.find(".html") != std::string::npos ||
                href.find(".xml") != std::string::npos)
                spine_hrefs.push_back(href);
    }
    if (spine_hrefs.empty()) throw Error(ErrorCode::not_an_epub, "package has no content documents");

    std::vector<EpubBlock> blocks;
    for (const auto& href : spine_hrefs) {
        std::string member = epubdetail::resolve_href(opf_dir, href);
        if (!zip.contains(member)) continue;
        std::string doc = zip.read(member);
        size_t idx = 0;
        for (const auto& raw : epubdetail::extract_text_blocks(doc)) {
            std::string norm = normalize_text(raw);
            if (norm.empty()) continue;
            blocks.push_back(EpubBlock{href + "#" + std::to_string(idx++), std::move(norm)});
        }
    }
    if (blocks.empty()) throw Error(ErrorCode::no_text_content, "no visible text in " + path);
    return blocks;
}

/// Build a minimal single-rendition epub from (name, xhtml body) documents.
/// Used by tests and the sample generator; spine order follows `docs`.
inline void write_minimal_epub(const std::string& path,
                               const std::vector<std::pair<std::string, std::string>>& docs,
                               const std::string& title = "book") {
    ZipWriter zip;
    zip.add("mimetype", "application/epub+zip");
    zip.add("META-INF/container.xml",
            "<?xml version=\"1.0\"?>\n"
            "<container version=\"1.0\" xmlns=\"urn:oasis:names:tc:opendocument:xmlns:container\">\n"
            "  <rootfiles>\n"
            "    <rootfile full-path=\"OEBPS/content.opf\" media-type=\"application/oebps-package+xml\"/>\n"
            "  </rootfiles>\n"
            "</container>\n");

    std::string manifest, spine;
    for (size_t i = 0; i < docs.size(); ++i) {
        std::string id = "doc" + std::to_string(i);
        manifest += "    <item id=\"" + id + "\" href=\"" + docs[i].first +
                    "\" media-type=\"application/xhtml+xml\"/>\n";
        spine += "    <itemref idref=\"" + id + "\"/>\n";
    }
    zip.add("OEBPS/content.opf",
            "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n"
            "<package xmlns=\"http://www.idpf.org/2007/opf\" version=\"3.0\" unique-identifier=\"uid\">\n"
            "  <metadata xmlns:dc=\"http://purl.org/dc/elements/1.1/\">\n"
            "    <dc:identifier id=\"uid\">urn:uuid:00000000-0000-0000-0000-000000000000</dc:identifier>\n"
            "    <dc:title>" + title + "</dc:title>\n"
            "    <dc:language>vi</dc:language>\n"
            "  </metadata>\n"
            "  <manifest>\n" + manifest + "  </manifest>\n"
            "  <spine>\n" + spine + "  </spine>\n"
            "</package>\n");

    for (const auto& [name, body] : docs) {
        zip.add("OEBPS/" + name,
                "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n"
                "<html xmlns=\"http://www.w3.org/1999/xhtml\">\n"
                "<head><title>" + title + "</title></head>\n"
                "<body>\n" + body + "\n</body>\n</html>\n");
    }
    zip.write(path);
}

} // namespace ocrmend
