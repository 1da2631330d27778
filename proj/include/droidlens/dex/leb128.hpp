#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "droidlens/core/error.hpp"

namespace droidlens::dex {

struct Leb128Result {
    std::uint32_t value;
    std::size_t next_offset;

    friend bool operator==(const Leb128Result&, const Leb128Result&) = default;
};

/// Decodes an unsigned LEB128 value starting at `offset`. At most five bytes
/// are consumed; bits beyond the 32nd in the fifth byte are discarded, as the
/// Android runtime does.
inline Leb128Result read_uleb128(std::span<const std::uint8_t> bytes, std::size_t offset) {
    std::uint32_t value = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        if (offset + i >= bytes.size()) {
            throw DexError("uleb128 at offset " + std::to_string(offset) + " runs past end of buffer");
        }
        const std::uint8_t b = bytes[offset + i];
        value |= static_cast<std::uint32_t>(b & 0x7f) << (7 * i);
        if ((b & 0x80) == 0) return {value, offset + i + 1};
    }
    throw DexError("uleb128 at offset " + std::to_string(offset) + " longer than 5 bytes");
}

} // namespace droidlens::dex
