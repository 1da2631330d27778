#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "droidlens/core/error.hpp"
#include "droidlens/dex/dex_file.hpp"
#include "droidlens/dex/leb128.hpp"
#include "droidlens/dex/opcodes.hpp"

namespace droidlens::dex {

/// Per-file opcode frequencies, one bucket per opcode byte.
struct OpcodeHistogram {
    std::array<std::uint64_t, 256> counts{};
    std::uint64_t total = 0;

    void add(std::uint8_t opcode) noexcept {
        ++counts[opcode];
        ++total;
    }

    OpcodeHistogram& operator+=(const OpcodeHistogram& other) noexcept {
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
        total += other.total;
        return *this;
    }

    friend bool operator==(const OpcodeHistogram&, const OpcodeHistogram&) = default;
};

/// Steps one method's instruction stream and counts its opcodes. Payload
/// pseudo-instructions are consumed but not counted. Returns the number of
/// instructions counted.
inline std::uint64_t count_instructions(std::span<const std::uint16_t> insns, OpcodeHistogram& hist) {
    std::uint64_t counted = 0;
    std::size_t pc = 0;
    while (pc < insns.size()) {
        const std::size_t width = instruction_width(insns, pc);
        if (width > insns.size() - pc) {
            throw DexError("instruction at code unit " + std::to_string(pc) + " extends past end of code");
        }
        if (!is_payload_ident(insns[pc])) {
            hist.add(static_cast<std::uint8_t>(insns[pc] & 0xff));
            ++counted;
        }
        pc += width;
    }
    return counted;
}

namespace detail {

inline void count_methods(const DexFile& dex, std::size_t& pos, std::uint32_t method_count, OpcodeHistogram& hist) {
    for (std::uint32_t m = 0; m < method_count; ++m) {
        pos = read_uleb128(dex.data, pos).next_offset;  // method_idx_diff
        pos = read_uleb128(dex.data, pos).next_offset;  // access_flags
        const auto code = read_uleb128(dex.data, pos);
        pos = code.next_offset;
        if (code.value == 0) continue;  // abstract or native
        const CodeItem item = read_code_item(dex.data, code.value);
        count_instructions(item.insns, hist);
    }
}

} // namespace detail

/// Opcode frequencies over every method body reachable from class_defs.
inline OpcodeHistogram opcode_histogram(const DexFile& dex) {
    OpcodeHistogram hist;
    for (std::size_t c = 0; c < dex.class_defs.size(); ++c) {
        const std::uint32_t off = dex.class_defs[c].class_data_off;
        if (off == 0) continue;
        try {
            std::size_t pos = off;
            std::uint32_t sizes[4];
            for (auto& s : sizes) {
                const auto v = read_uleb128(dex.data, pos);
                s = v.value;
                pos = v.next_offset;
            }
            // static and instance fields: (field_idx_diff, access_flags) each
            for (std::uint64_t f = 0; f < std::uint64_t{sizes[0]} + sizes[1]; ++f) {
                pos = read_uleb128(dex.data, pos).next_offset;
                pos = read_uleb128(dex.data, pos).next_offset;
            }
            detail::count_methods(dex, pos, sizes[2], hist);
            detail::count_methods(dex, pos, sizes[3], hist);
        } catch (const DexError& e) {
            throw DexError("class_defs[" + std::to_string(c) + "]: " + e.what());
        }
    }
    return hist;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Sample id for a DEX path: the file name up to its first dot, so
/// `app.dex` and `app.classes2.dex` both belong to `app`.
inline std::string sample_id_for(const std::filesystem::path& path) {
    const std::string name = path.filename().string();
    return name.substr(0, name.find('.'));
}

struct ExtractOptions {
    ParseOptions parse;
    bool skip_invalid = false;
};

struct ExtractResult {
    std::map<std::string, OpcodeHistogram> histograms;  // keyed by sample id
    std::vector<std::string> skipped;                   // "path: reason"
};

/// Histograms for every `.dex` file directly inside `dir`. Files sharing a
/// sample id are summed.
inline ExtractResult extract_directory(const std::filesystem::path& dir, const ExtractOptions& options = {}) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".dex") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    ExtractResult result;
    for (const auto& file : files) {
        try {
            const auto bytes = read_file_bytes(file);
            const DexFile dex = parse_dex(bytes, options.parse);
            result.histograms[sample_id_for(file)] += opcode_histogram(dex);
        } catch (const DexError& e) {
            if (!options.skip_invalid) throw DexError(file.string() + ": " + e.what());
            result.skipped.push_back(file.string() + ": " + e.what());
        }
    }
    return result;
}

} // namespace droidlens::dex
