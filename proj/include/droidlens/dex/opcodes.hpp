#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>

#include "droidlens/core/error.hpp"

namespace droidlens::dex {

inline constexpr std::uint16_t kPackedSwitchPayload = 0x0100;
inline constexpr std::uint16_t kSparseSwitchPayload = 0x0200;
inline constexpr std::uint16_t kFillArrayDataPayload = 0x0300;

namespace detail {

struct WidthRange {
    std::uint8_t first;
    std::uint8_t last;
    std::uint8_t width;
};

// Instruction width in 16-bit code units, by opcode byte, from the Dalvik
// instruction formats (10x=1, 22x=2, 32x=3, 51l=5, 45cc=4, ...). Bytes not
// listed are unused and have width 0.
inline constexpr WidthRange kWidthRanges[] = {
    {0x00, 0x01, 1}, {0x02, 0x02, 2}, {0x03, 0x03, 3},   // nop, move, move/from16, move/16
    {0x04, 0x04, 1}, {0x05, 0x05, 2}, {0x06, 0x06, 3},   // move-wide*
    {0x07, 0x07, 1}, {0x08, 0x08, 2}, {0x09, 0x09, 3},   // move-object*
    {0x0a, 0x12, 1},                                     // move-result* .. return-object, const/4
    {0x13, 0x13, 2}, {0x14, 0x14, 3}, {0x15, 0x16, 2},   // const/16, const, const/high16, const-wide/16
    {0x17, 0x17, 3}, {0x18, 0x18, 5}, {0x19, 0x1a, 2},   // const-wide/32, const-wide, const-wide/high16, const-string
    {0x1b, 0x1b, 3}, {0x1c, 0x1c, 2}, {0x1d, 0x1e, 1},   // const-string/jumbo, const-class, monitor-*
    {0x1f, 0x20, 2}, {0x21, 0x21, 1}, {0x22, 0x23, 2},   // check-cast, instance-of, array-length, new-*
    {0x24, 0x26, 3}, {0x27, 0x28, 1}, {0x29, 0x29, 2},   // filled-new-array*, fill-array-data, throw, goto, goto/16
    {0x2a, 0x2c, 3},                                     // goto/32, packed-switch, sparse-switch
    {0x2d, 0x3d, 2},                                     // cmp*, if-test, if-testz
    {0x44, 0x6d, 2},                                     // aget/aput, iget/iput, sget/sput
    {0x6e, 0x72, 3}, {0x74, 0x78, 3},                    // invoke-kind, invoke-kind/range
    {0x7b, 0x8f, 1},                                     // unop
    {0x90, 0xaf, 2}, {0xb0, 0xcf, 1},                    // binop, binop/2addr
    {0xd0, 0xe2, 2},                                     // binop/lit16, binop/lit8
    {0xfa, 0xfb, 4}, {0xfc, 0xfd, 3}, {0xfe, 0xff, 2},   // invoke-polymorphic*, invoke-custom*, const-method-*
};

constexpr std::array<std::uint8_t, 256> build_width_table() {
    std::array<std::uint8_t, 256> t{};
    for (const auto& r : kWidthRanges) {
        for (unsigned op = r.first; op <= r.last; ++op) t[op] = r.width;
    }
    return t;
}

} // namespace detail

/// Width of each opcode in code units; 0 marks an unused opcode byte.
inline constexpr std::array<std::uint8_t, 256> kOpcodeWidth = detail::build_width_table();

/// True when the code unit is the identifier of a payload pseudo-instruction.
constexpr bool is_payload_ident(std::uint16_t unit) noexcept {
    return unit == kPackedSwitchPayload || unit == kSparseSwitchPayload || unit == kFillArrayDataPayload;
}

/// Width in 16-bit code units of the instruction starting at `index`.
/// Payload pseudo-instructions are sized from their headers.
inline std::size_t instruction_width(std::span<const std::uint16_t> units, std::size_t index) {
    if (index >= units.size()) {
        throw DexError("instruction index " + std::to_string(index) + " past end of code");
    }
    const std::uint16_t unit = units[index];
    auto need = [&](std::size_t count) {
        if (index + count > units.size()) {
            throw DexError("payload header at code unit " + std::to_string(index) + " extends past end of code");
        }
    };
    switch (unit) {
    case kPackedSwitchPayload: {
        need(2);
        return std::size_t{units[index + 1]} * 2 + 4;
    }
    case kSparseSwitchPayload: {
        need(2);
        return std::size_t{units[index + 1]} * 4 + 2;
    }
    case kFillArrayDataPayload: {
        need(4);
        const std::size_t element_width = units[index + 1];
        const std::size_t size = std::size_t{units[index + 2]} | (std::size_t{units[index + 3]} << 16);
        return (size * element_width + 1) / 2 + 4;
    }
    default:
        break;
    }
    const std::uint8_t op = static_cast<std::uint8_t>(unit & 0xff);
    const std::size_t width = kOpcodeWidth[op];
    if (width == 0) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "0x%02x", op);
        throw DexError(std::string("unknown opcode ") + buf + " at code unit " + std::to_string(index));
    }
    return width;
}

} // namespace droidlens::dex
