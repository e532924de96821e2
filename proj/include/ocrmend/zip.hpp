#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "ocrmend/error.hpp"

namespace ocrmend {

// Just enough of the ZIP format for epub containers: central-directory
// reading with stored/deflate entries, and a stored-only writer. No zip64.

namespace zipdetail {

inline uint16_t rd16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
inline uint32_t rd32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline void wr16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void wr32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

constexpr uint32_t kLocalSig = 0x04034b50;
constexpr uint32_t kCentralSig = 0x02014b50;
constexpr uint32_t kEocdSig = 0x06054b50;

inline std::string inflate_raw(const uint8_t* data, size_t comp_size, size_t uncomp_size) {
    std::string out(uncomp_size, '\0');
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK)
        throw Error(ErrorCode::corrupt_archive, "inflate init failed");
    zs.next_in = const_cast<Bytef*>(data);
    zs.avail_in = static_cast<uInt>(comp_size);
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != uncomp_size)
        throw Error(ErrorCode::corrupt_archive, "deflate stream truncated or corrupt");
    return out;
}

} // namespace zipdetail

struct ZipEntry {
    std::string name;
    uint16_t method = 0;
    uint32_t crc32 = 0;
    uint32_t comp_size = 0;
    uint32_t uncomp_size = 0;
    uint32_t local_offset = 0;
};

/// Read-only view over a ZIP archive held in memory.
class ZipReader {
public:
    explicit ZipReader(std::string bytes) : bytes_(std::move(bytes)) { parse_directory(); }

    static ZipReader open(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return ZipReader(std::move(bytes));
    }

    const std::vector<ZipEntry>& entries() const { return entries_; }

    bool contains(std::string_view name) const {
        return index_.find(std::string(name)) != index_.end();
    }

    std::string read(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end())
            throw Error(ErrorCode::corrupt_archive, "missing archive member: " + std::string(name));
        return extract(entries_[it->second]);
    }

private:
    void parse_directory() {
        using namespace zipdetail;
        const auto* data = reinterpret_cast<const uint8_t*>(bytes_.data());
        const size_t size = bytes_.size();
        if (size < 22) throw Error(ErrorCode::corrupt_archive, "file too small for a zip archive");

        // EOCD: scan backwards over at most 64 KiB of trailing comment
        size_t eocd = size;
        size_t lo = size >= 22 + 65535 ? size - 22 - 65535 : 0;
        for (size_t i = size - 22 + 1; i-- > lo;) {
            if (rd32(data + i) == kEocdSig) { eocd = i; break; }
        }
        if (eocd == size) throw Error(ErrorCode::corrupt_archive, "end-of-central-directory not found");

        uint16_t count = rd16(data + eocd + 10);
        uint32_t cd_size = rd32(data + eocd + 12);
        uint32_t cd_offset = rd32(data + eocd + 16);
        if (static_cast<size_t>(cd_offset) + cd_size > size)
            throw Error(ErrorCode::corrupt_archive, "central directory out of bounds");

        size_t pos = cd_offset;
        for (uint16_t i = 0; i < count; ++i) {
            if (pos + 46 > size || rd32(data + pos) != kCentralSig)
                throw Error(ErrorCode::corrupt_archive, "bad central directory entry");
            ZipEntry e;
            e.method = rd16(data + pos + 10);
            e.crc32 = rd32(data + pos + 16);
            e.comp_size = rd32(data + pos + 20);
            e.uncomp_size = rd32(data + pos + 24);
            uint16_t name_len = rd16(data + pos + 28);
            uint16_t extra_len = rd16(data + pos + 30);
            uint16_t comment_len = rd16(data + pos + 32);
            e.local_offset = rd32(data + pos + 42);
            if (pos + 46 + name_len > size)
                throw Error(ErrorCode::corrupt_archive, "entry name out of bounds");
            e.name.assign(bytes_, pos + 46, name_len);
            pos += 46 + name_len + extra_len + comment_len;
            index_[e.name] = entries_.size();
            entries_.push_back(std::move(e));
        }
    }

    std::string extract(const ZipEntry& e) const {
        using namespace zipdetail;
        const auto* data = reinterpret_cast<const uint8_t*>(bytes_.data());
        const size_t size = bytes_.size();
        size_t pos = e.local_offset;
        if (pos + 30 > size || rd32(data + pos) != kLocalSig)
            throw Error(ErrorCode::corrupt_archive, "bad local header for " + e.name);
        uint16_t name_len = rd16(data + pos + 26);
        uint16_t extra_len = rd16(data + pos + 28);
        size_t start = pos + 30 + name_len + extra_len;
        if (start + e.comp_size > size)
            throw Error(ErrorCode::corrupt_archive, "entry data out of bounds for " + e.name);

        std::string out;
        if (e.method == 0) {
            if (e.comp_size != e.uncomp_size)
                throw Error(ErrorCode::corrupt_archive, "stored entry size mismatch");
            out.assign(bytes_, start, e.comp_size);
        } else if (e.method == 8) {
            out = inflate_raw(data + start, e.comp_size, e.uncomp_size);
        } else {
            throw Error(ErrorCode::corrupt_archive,
                        "unsupported compression method " + std::to_string(e.method));
        }
        uint32_t crc = ::crc32(0L, reinterpret_cast<const Bytef*>(out.data()),
                               static_cast<uInt>(out.size()));
        if (crc != e.crc32) throw Error(ErrorCode::corrupt_archive, "CRC mismatch in " + e.name);
        return out;
    }

    std::string bytes_;
    std::vector<ZipEntry> entries_;
    std::map<std::string, size_t> index_;
};

/// Stored-only ZIP writer; enough for building test/sample epubs.
class ZipWriter {
public:
    void add(std::string_view name, std::string_view content) {
        files_.emplace_back(std::string(name), std::string(content));
    }

    std::string finish() const {
        using namespace zipdetail;
        std::string out;
        std::string central;
        for (const auto& [name, content] : files_) {
            uint32_t offset = static_cast<uint32_t>(out.size());
            uint32_t crc = ::crc32(0L, reinterpret_cast<const Bytef*>(content.data()),
                                   static_cast<uInt>(content.size()));
            uint32_t sz = static_cast<uint32_t>(content.size());

            wr32(out, kLocalSig);
            wr16(out, 20);      // version needed
            wr16(out, 0);       // flags
            wr16(out, 0);       // method: stored
            wr16(out, 0);       // mod time
            wr16(out, 0x21);    // mod date (1980-01-01)
            wr32(out, crc);
            wr32(out, sz);
            wr32(out, sz);
            wr16(out, static_cast<uint16_t>(name.size()));
            wr16(out, 0);       // extra len
            out += name;
            out += content;

            wr32(central, kCentralSig);
            wr16(central, 20);
            wr16(central, 20);
            wr16(central, 0);
            wr16(central, 0);
            wr16(central, 0);
            wr16(central, 0x21);
            wr32(central, crc);
            wr32(central, sz);
            wr32(central, sz);
            wr16(central, static_cast<uint16_t>(name.size()));
            wr16(central, 0);
            wr16(central, 0);
            wr16(central, 0);
            wr16(central, 0);
            wr32(central, 0);
            wr32(central, offset);
            central += name;
        }
        uint32_t cd_offset = static_cast<uint32_t>(out.size());
        out += central;
        wr32(out, kEocdSig);
        wr16(out, 0);
        wr16(out, 0);
        wr16(out, static_cast<uint16_t>(files_.size()));
        wr16(out, static_cast<uint16_t>(files_.size()));
        wr32(out, static_cast<uint32_t>(central.size()));
        wr32(out, cd_offset);
        wr16(out, 0);
        return out;
    }

    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::io_error, "cannot write " + path);
        std::string bytes = finish();
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

} // namespace ocrmend
