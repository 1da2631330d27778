#pragma once

#include <zlib.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "droidlens/core/error.hpp"

namespace droidlens::dex {

inline constexpr std::size_t kHeaderSize = 0x70;
inline constexpr std::uint32_t kEndianConstant = 0x12345678;
inline constexpr std::uint32_t kReverseEndianConstant = 0x78563412;
inline constexpr std::size_t kClassDefSize = 32;
inline constexpr std::size_t kCodeItemHeaderSize = 16;

/// Bounds-checked little-endian reader over an immutable byte buffer.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t size() const noexcept { return bytes_.size(); }
    std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

    void require(std::size_t offset, std::size_t count, const char* what) const {
        if (offset > bytes_.size() || count > bytes_.size() - offset) {
            throw DexError(std::string(what) + " at offset " + std::to_string(offset) + " (+" +
                           std::to_string(count) + " bytes) exceeds buffer of " +
                           std::to_string(bytes_.size()) + " bytes");
        }
    }

    std::uint16_t u16(std::size_t offset, const char* what = "u16") const {
        require(offset, 2, what);
        return static_cast<std::uint16_t>(bytes_[offset] | (bytes_[offset + 1] << 8));
    }

    std::uint32_t u32(std::size_t offset, const char* what = "u32") const {
        require(offset, 4, what);
        return static_cast<std::uint32_t>(bytes_[offset]) | (static_cast<std::uint32_t>(bytes_[offset + 1]) << 8) |
               (static_cast<std::uint32_t>(bytes_[offset + 2]) << 16) |
               (static_cast<std::uint32_t>(bytes_[offset + 3]) << 24);
    }

private:
    std::span<const std::uint8_t> bytes_;
};

struct DexHeader {
    std::uint32_t checksum = 0;
    std::uint32_t file_size = 0;
    std::uint32_t header_size = 0;
    std::uint32_t endian_tag = 0;
    std::uint32_t string_ids_size = 0;
    std::uint32_t string_ids_off = 0;
    std::uint32_t type_ids_size = 0;
    std::uint32_t type_ids_off = 0;
    std::uint32_t method_ids_size = 0;
    std::uint32_t method_ids_off = 0;
    std::uint32_t class_defs_size = 0;
    std::uint32_t class_defs_off = 0;
    std::uint32_t data_size = 0;
    std::uint32_t data_off = 0;
};

struct ClassDef {
    std::uint32_t class_data_off = 0;
};

struct CodeItem {
    std::uint16_t registers_size = 0;
    std::uint32_t insns_size = 0;
    std::vector<std::uint16_t> insns;
};

/// A parsed DEX container. Owns its bytes; only the header and class_defs
/// table are materialized.
struct DexFile {
    int version = 0;
    DexHeader header;
    std::vector<ClassDef> class_defs;
    std::vector<std::uint8_t> data;
};

struct ParseOptions {
    bool verify_checksum = false;
};

/// adler32 over everything after the checksum field.
inline std::uint32_t compute_checksum(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12) throw DexError("buffer too short for checksum");
    uLong a = ::adler32(0L, Z_NULL, 0);
    std::span<const std::uint8_t> rest = bytes.subspan(12);
    while (!rest.empty()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(rest.size(), 1u << 30));
        a = ::adler32(a, rest.data(), chunk);
        rest = rest.subspan(chunk);
    }
    return static_cast<std::uint32_t>(a);
}

namespace detail {

inline int parse_magic(std::span<const std::uint8_t> bytes) {
    static constexpr char kPrefix[] = {'d', 'e', 'x', '\n'};
    const std::size_t avail = std::min<std::size_t>(bytes.size(), 8);
    for (std::size_t i = 0; i < std::min<std::size_t>(avail, 4); ++i) {
        if (bytes[i] != static_cast<std::uint8_t>(kPrefix[i])) throw DexError("bad magic: not a DEX file");
    }
    if (bytes.size() < 8) throw DexError("truncated header: " + std::to_string(bytes.size()) + " bytes");
    const auto digit = [](std::uint8_t c) { return c >= '0' && c <= '9'; };
    if (!digit(bytes[4]) || !digit(bytes[5]) || !digit(bytes[6]) || bytes[7] != 0) {
        throw DexError("bad magic: malformed version");
    }
    const int version = (bytes[4] - '0') * 100 + (bytes[5] - '0') * 10 + (bytes[6] - '0');
    if (version < 35 || version > 40) {
        throw DexError("bad magic: unsupported DEX version " + std::to_string(version));
    }
    return version;
}

inline void check_table(const ByteReader& r, std::uint32_t off, std::uint32_t count, std::size_t entry,
                        const char* what) {
    if (count == 0) return;
    r.require(off, static_cast<std::size_t>(count) * entry, what);
}

} // namespace detail

/// Parses and validates a DEX header and its class_defs table.
inline DexFile parse_dex(std::span<const std::uint8_t> bytes, const ParseOptions& options = {}) {
    DexFile dex;
    dex.version = detail::parse_magic(bytes);
    if (bytes.size() < kHeaderSize) {
        throw DexError("truncated header: " + std::to_string(bytes.size()) + " bytes, need " +
                       std::to_string(kHeaderSize));
    }
    const ByteReader r(bytes);
    DexHeader& h = dex.header;
    h.checksum = r.u32(8);
    h.file_size = r.u32(32);
    h.header_size = r.u32(36);
    h.endian_tag = r.u32(40);
    h.string_ids_size = r.u32(56);
    h.string_ids_off = r.u32(60);
    h.type_ids_size = r.u32(64);
    h.type_ids_off = r.u32(68);
    h.method_ids_size = r.u32(88);
    h.method_ids_off = r.u32(92);
    h.class_defs_size = r.u32(96);
    h.class_defs_off = r.u32(100);
    h.data_size = r.u32(104);
    h.data_off = r.u32(108);

    if (h.endian_tag == kReverseEndianConstant) throw DexError("big-endian DEX files are not supported");
    if (h.endian_tag != kEndianConstant) throw DexError("bad endian tag");
    if (h.header_size != kHeaderSize) throw DexError("bad header_size " + std::to_string(h.header_size));
    if (h.file_size > bytes.size()) {
        throw DexError("truncated file: header declares " + std::to_string(h.file_size) + " bytes, buffer has " +
                       std::to_string(bytes.size()));
    }
    if (h.file_size < kHeaderSize) throw DexError("file_size smaller than header");

    const ByteReader file(bytes.first(h.file_size));
    detail::check_table(file, h.string_ids_off, h.string_ids_size, 4, "string_ids");
    detail::check_table(file, h.type_ids_off, h.type_ids_size, 4, "type_ids");
    detail::check_table(file, h.method_ids_off, h.method_ids_size, 8, "method_ids");
    detail::check_table(file, h.class_defs_off, h.class_defs_size, kClassDefSize, "class_defs");
    detail::check_table(file, h.data_off, h.data_size, 1, "data section");

    if (options.verify_checksum) {
        const std::uint32_t actual = compute_checksum(bytes.first(h.file_size));
        if (actual != h.checksum) throw DexError("checksum mismatch");
    }

    dex.class_defs.reserve(h.class_defs_size);
    for (std::uint32_t i = 0; i < h.class_defs_size; ++i) {
        const std::size_t base = std::size_t{h.class_defs_off} + std::size_t{i} * kClassDefSize;
        ClassDef def;
        def.class_data_off = file.u32(base + 24, "class_def");
        if (def.class_data_off != 0) file.require(def.class_data_off, 1, "class_data");
        dex.class_defs.push_back(def);
    }
    dex.data.assign(bytes.begin(), bytes.begin() + h.file_size);
    return dex;
}

/// Reads the code_item at `offset`.
inline CodeItem read_code_item(std::span<const std::uint8_t> bytes, std::size_t offset) {
    const ByteReader r(bytes);
    r.require(offset, kCodeItemHeaderSize, "code_item header");
    CodeItem item;
    item.registers_size = r.u16(offset);
    item.insns_size = r.u32(offset + 12);
    const std::size_t insns_off = offset + kCodeItemHeaderSize;
    r.require(insns_off, std::size_t{item.insns_size} * 2, "code_item insns");
    item.insns.resize(item.insns_size);
    for (std::uint32_t i = 0; i < item.insns_size; ++i) item.insns[i] = r.u16(insns_off + 2 * std::size_t{i});
    return item;
}

} // namespace droidlens::dex
