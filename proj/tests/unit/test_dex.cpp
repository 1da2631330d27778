#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "droidlens/dex/dex_file.hpp"
#include "droidlens/dex/histogram.hpp"
#include "droidlens/dex/leb128.hpp"
#include "droidlens/dex/opcodes.hpp"
#include "support/dex_builder.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace droidlens;
using namespace droidlens::dex;
using testsupport::build_dex;
using testsupport::ClassSpec;
using testsupport::DexSpec;
using testsupport::MethodSpec;
namespace opc = testsupport::op;

namespace {

std::vector<std::uint8_t> bytes_of(std::initializer_list<int> v) {
    std::vector<std::uint8_t> out;
    for (int b : v) out.push_back(static_cast<std::uint8_t>(b));
    return out;
}

OpcodeHistogram histogram_of(const std::vector<std::uint8_t>& bytes) { return opcode_histogram(parse_dex(bytes)); }

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST(Uleb128, SingleByteValues) {
    EXPECT_EQ(read_uleb128(bytes_of({0x00}), 0), (Leb128Result{0, 1}));
    EXPECT_EQ(read_uleb128(bytes_of({0x7f}), 0), (Leb128Result{127, 1}));
}

TEST(Uleb128, TwoByteValue) { EXPECT_EQ(read_uleb128(bytes_of({0x80, 0x7f}), 0), (Leb128Result{16256, 2})); }

TEST(Uleb128, StartsAtOffset) { EXPECT_EQ(read_uleb128(bytes_of({0xff, 0xe5, 0x8e, 0x26}), 1), (Leb128Result{624485, 4})); }

TEST(Uleb128, FiveByteMaximum) {
    EXPECT_EQ(read_uleb128(bytes_of({0xff, 0xff, 0xff, 0xff, 0x0f}), 0), (Leb128Result{0xffffffffu, 5}));
}

TEST(Uleb128, UnterminatedAtEndOfBuffer) {
    EXPECT_THROW(read_uleb128(bytes_of({0x80, 0x80}), 0), DexError);
    EXPECT_THROW(read_uleb128(bytes_of({}), 0), DexError);
    EXPECT_THROW(read_uleb128(bytes_of({0x01}), 1), DexError);
}

TEST(Uleb128, LongerThanFiveBytes) {
    EXPECT_THROW(read_uleb128(bytes_of({0x80, 0x80, 0x80, 0x80, 0x80, 0x00}), 0), DexError);
}

TEST(Uleb128, ExhaustiveTwoByteAgreementWithOracle) {
    for (int b0 = 0; b0 < 256; ++b0) {
        for (int b1 = 0; b1 < 256; ++b1) {
            const std::vector<std::uint8_t> buf{static_cast<std::uint8_t>(b0), static_cast<std::uint8_t>(b1)};
            const auto want = testsupport::uleb_oracle(buf);
            if (!want.ok) {
                EXPECT_THROW(read_uleb128(buf, 0), DexError);
                continue;
            }
            const auto got = read_uleb128(buf, 0);
            ASSERT_EQ(got.value, want.value);
            ASSERT_EQ(got.next_offset, want.length);
        }
    }
}

TEST(InstructionWidth, TableExamples) {
    const std::vector<std::uint16_t> units{0x0000, 0x0013, 0x0000};
    EXPECT_EQ(instruction_width(units, 0), 1u);
    EXPECT_EQ(instruction_width(units, 1), 2u);
}

TEST(InstructionWidth, FormatSpotChecks) {
    struct Case {
        std::uint8_t op;
        std::size_t width;
    };
    // One opcode per format family: 10x, 12x, 22x, 32x, 31i, 51l, 21c, 35c, 3rc, 10t, 20t, 30t, 22t, 23x, 22b, 45cc, 4rcc, 35c, 21c.
    const Case cases[] = {{0x0e, 1}, {0x01, 1}, {0x02, 2}, {0x03, 3}, {0x14, 3}, {0x18, 5}, {0x1a, 2},
                          {0x6e, 3}, {0x74, 3}, {0x28, 1}, {0x29, 2}, {0x2a, 3}, {0x32, 2}, {0x90, 2},
                          {0xd8, 2}, {0xfa, 4}, {0xfb, 4}, {0xfc, 3}, {0xfe, 2}, {0xb0, 1}, {0x7b, 1}};
    for (const auto& c : cases) {
        const std::vector<std::uint16_t> units(6, c.op);
        EXPECT_EQ(instruction_width(units, 0), c.width) << "opcode " << int(c.op);
    }
}

TEST(InstructionWidth, UnusedOpcodesAreErrors) {
    for (int op : {0x3e, 0x43, 0x73, 0x79, 0x7a, 0xe3, 0xf9}) {
        const std::vector<std::uint16_t> units(4, static_cast<std::uint16_t>(op));
        EXPECT_THROW(instruction_width(units, 0), DexError) << op;
    }
}

TEST(InstructionWidth, PackedSwitchPayload) {
    // ident, size=2, first_key (2 units), 2 targets (2 units each)
    const std::vector<std::uint16_t> units{0x0100, 2, 0, 0, 1, 0, 2, 0};
    EXPECT_EQ(instruction_width(units, 0), 8u);
}

TEST(InstructionWidth, SparseSwitchPayload) {
    const std::vector<std::uint16_t> units{0x0200, 3};
    EXPECT_EQ(instruction_width(units, 0), 3u * 4 + 2);
}

TEST(InstructionWidth, FillArrayDataPayloadRoundsUp) {
    // 3 one-byte elements: ceil(3/2) + 4 = 6
    const std::vector<std::uint16_t> units{0x0300, 1, 3, 0};
    EXPECT_EQ(instruction_width(units, 0), 6u);
    // size uses both halves of the u32
    const std::vector<std::uint16_t> big{0x0300, 2, 0, 1};
    EXPECT_EQ(instruction_width(big, 0), 65536u + 4);
}

TEST(InstructionWidth, PayloadHeaderPastEnd) {
    EXPECT_THROW(instruction_width(std::vector<std::uint16_t>{0x0100}, 0), DexError);
    EXPECT_THROW(instruction_width(std::vector<std::uint16_t>{0x0300, 1, 3}, 0), DexError);
    EXPECT_THROW(instruction_width(std::vector<std::uint16_t>{0x0000}, 1), DexError);
}

TEST(ParseDex, MinimalFixture) {
    const auto bytes = build_dex(testsupport::single_method({opc::const4(0, 1), opc::const4(1, 2), opc::return_void}));
    const DexFile dex = parse_dex(bytes);
    EXPECT_EQ(dex.version, 35);
    EXPECT_EQ(dex.header.class_defs_size, 1u);
    EXPECT_EQ(dex.header.header_size, 0x70u);
    EXPECT_EQ(dex.header.endian_tag, 0x12345678u);
    EXPECT_EQ(dex.header.file_size, bytes.size());
    ASSERT_EQ(dex.class_defs.size(), 1u);
    EXPECT_NE(dex.class_defs[0].class_data_off, 0u);
}

TEST(ParseDex, BadMagic) {
    std::vector<std::uint8_t> bytes = bytes_of({'x', 'y', 'z'});
    bytes.resize(0x70, 0);
    EXPECT_THROW(parse_dex(bytes), DexError);
    try {
        parse_dex(bytes);
    } catch (const DexError& e) {
        EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
    }
}

TEST(ParseDex, TruncatedHeader) {
    auto bytes = build_dex(testsupport::single_method({opc::return_void}));
    bytes.resize(40);
    try {
        parse_dex(bytes);
        FAIL() << "expected an error";
    } catch (const DexError& e) {
        EXPECT_NE(std::string(e.what()).find("truncated header"), std::string::npos);
    }
}

TEST(ParseDex, VersionsAccepted) {
    for (const char* v : {"035", "036", "037", "038", "039", "040"}) {
        DexSpec s = testsupport::single_method({opc::return_void});
        s.version = v;
        EXPECT_NO_THROW(parse_dex(build_dex(s))) << v;
    }
    for (const char* v : {"034", "041", "0a5"}) {
        DexSpec s = testsupport::single_method({opc::return_void});
        s.version = v;
        EXPECT_THROW(parse_dex(build_dex(s)), DexError) << v;
    }
}

TEST(ParseDex, HeaderFieldChecks) {
    const auto good = build_dex(testsupport::single_method({opc::return_void}));
    auto patched = [&](std::size_t at, std::uint32_t v) {
        auto b = good;
        testsupport::put_u32(b, at, v);
        return b;
    };
    EXPECT_THROW(parse_dex(patched(40, 0x78563412)), DexError);                            // big-endian
    EXPECT_THROW(parse_dex(patched(40, 0)), DexError);                                     // bad tag
    EXPECT_THROW(parse_dex(patched(36, 0x78)), DexError);                                  // header_size
    EXPECT_THROW(parse_dex(patched(32, static_cast<std::uint32_t>(good.size() + 1))), DexError);  // file_size
    EXPECT_THROW(parse_dex(patched(100, static_cast<std::uint32_t>(good.size()))), DexError);     // class_defs_off
    EXPECT_THROW(parse_dex(patched(96, 1000)), DexError);                                  // class_defs_size
    EXPECT_THROW(parse_dex(patched(88, 0xffffffff)), DexError);                            // method_ids_size
}

TEST(ParseDex, ChecksumVerifiedOnlyOnRequest) {
    auto bytes = build_dex(testsupport::single_method({opc::return_void}));
    ParseOptions verify;
    verify.verify_checksum = true;
    EXPECT_NO_THROW(parse_dex(bytes, verify));
    EXPECT_EQ(compute_checksum(bytes), testsupport::adler32_reference(bytes.data() + 12, bytes.size() - 12));
    bytes[8] ^= 0x01;
    EXPECT_NO_THROW(parse_dex(bytes));
    EXPECT_THROW(parse_dex(bytes, verify), DexError);
}

TEST(OpcodeHistogram, ConstConstReturn) {
    const auto h = histogram_of(build_dex(testsupport::single_method({opc::const4(0, 1), opc::const4(1, 2), opc::return_void})));
    EXPECT_EQ(h.counts[0x12], 2u);
    EXPECT_EQ(h.counts[0x0e], 1u);
    EXPECT_EQ(h.total, 3u);
}

TEST(OpcodeHistogram, ZeroMethodsGiveZeroHistogram) {
    DexSpec s;
    s.classes.push_back(ClassSpec{});
    ClassSpec no_data;
    no_data.has_class_data = false;
    s.classes.push_back(no_data);
    const auto h = histogram_of(build_dex(s));
    EXPECT_EQ(h, OpcodeHistogram{});
    EXPECT_EQ(h.total, 0u);

    EXPECT_EQ(histogram_of(build_dex(DexSpec{})), OpcodeHistogram{});
}

TEST(OpcodeHistogram, FillArrayDataPayloadNotCounted) {
    // fill-array-data v0, +4 ; return-void ; payload (width 2, 2 elements)
    const std::vector<std::uint16_t> insns{0x0026, 0x0004, 0x0000, 0x000e, 0x0300, 2, 2, 0, 0x1111, 0x2222};
    const auto h = histogram_of(build_dex(testsupport::single_method(insns)));
    EXPECT_EQ(h.counts[0x26], 1u);
    EXPECT_EQ(h.counts[0x0e], 1u);
    EXPECT_EQ(h.counts[0x00], 0u);
    EXPECT_EQ(h.total, 2u);
}

TEST(OpcodeHistogram, SwitchPayloadsNotCounted) {
    // packed-switch v0 +4; return-void; payload size 2 -> 8 units
    const std::vector<std::uint16_t> packed{0x002b, 0x0004, 0x0000, 0x000e, 0x0100, 2, 5, 0, 1, 0, 2, 0};
    auto h = histogram_of(build_dex(testsupport::single_method(packed)));
    EXPECT_EQ(h.counts[0x2b], 1u);
    EXPECT_EQ(h.total, 2u);
    // nop; sparse-switch v0 +5; return-void; payload size 1 -> 6 units; nop after the payload
    const std::vector<std::uint16_t> sparse{0x0000, 0x002c, 0x0005, 0x0000, 0x000e, 0x0200, 1, 7, 0, 3, 0, 0x0000};
    h = histogram_of(build_dex(testsupport::single_method(sparse)));
    EXPECT_EQ(h.counts[0x00], 2u);
    EXPECT_EQ(h.counts[0x2c], 1u);
    EXPECT_EQ(h.counts[0x0e], 1u);
    EXPECT_EQ(h.total, 4u);
}

TEST(OpcodeHistogram, ManyClassesFieldsAndMethodKinds) {
    DexSpec s;
    ClassSpec a;
    a.static_fields = 2;
    a.instance_fields = 3;
    a.direct.push_back({{0x0018, 1, 2, 3, 4, 0x0010}, true});           // const-wide; return-wide
    a.direct.push_back({{}, false});                                     // native
    a.virtuals.push_back({{0x006e, 0x0010, 0x0000, 0x000e}, true});      // invoke-virtual; return-void
    a.virtuals.push_back({{0x0001, 0x0001, 0x00b0, 0x000f}, true});      // move x2; add-int/2addr; return
    ClassSpec b;
    b.virtuals.push_back({{0x0013, 0x0007, 0x000f}, true});              // const/16; return
    ClassSpec c;
    c.has_class_data = false;
    s.classes = {a, c, b};
    const auto h = histogram_of(build_dex(s));
    OpcodeHistogram want;
    for (int op : {0x18, 0x10, 0x6e, 0x0e, 0x01, 0x01, 0xb0, 0x0f, 0x13, 0x0f}) want.add(static_cast<std::uint8_t>(op));
    EXPECT_EQ(h, want);
    EXPECT_EQ(h.total, 10u);
}

TEST(OpcodeHistogram, InstructionRunningPastCodeEnd) {
    // const-wide needs 5 units; only 3 present
    const auto bytes = build_dex(testsupport::single_method({0x0018, 0, 0}));
    const DexFile dex = parse_dex(bytes);
    try {
        opcode_histogram(dex);
        FAIL() << "expected an error";
    } catch (const DexError& e) {
        EXPECT_NE(std::string(e.what()).find("class_defs[0]"), std::string::npos);
    }
}

TEST(OpcodeHistogram, UnknownOpcodeNamesClass) {
    DexSpec s;
    s.classes.push_back(testsupport::single_method({opc::return_void}).classes[0]);
    s.classes.push_back(testsupport::single_method({0x003e}).classes[0]);
    try {
        opcode_histogram(parse_dex(build_dex(s)));
        FAIL() << "expected an error";
    } catch (const DexError& e) {
        EXPECT_NE(std::string(e.what()).find("class_defs[1]"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("0x3e"), std::string::npos);
    }
}

TEST(OpcodeHistogram, CountMatchesSteppedInstructions) {
    const std::vector<std::uint16_t> insns{0x0000, 0x0013, 0x0001, 0x0026, 0x0005, 0x0000, 0x000e,
                                           0x0000, 0x0300, 1, 3, 0, 0x0201, 0x0003};
    OpcodeHistogram h;
    EXPECT_EQ(count_instructions(insns, h), 5u);
    EXPECT_EQ(h.total, 5u);
}

TEST(OpcodeHistogram, Deterministic) {
    const auto bytes = build_dex(testsupport::single_method({opc::const4(0, 1), opc::return_void}));
    EXPECT_EQ(histogram_of(bytes), histogram_of(bytes));
}

TEST(Extract, DirectoryWithMultiDexSumming) {
    const auto dir = testsupport::temp_dir("extract");
    write_bytes(dir / "app.dex", build_dex(testsupport::single_method({opc::return_void})));
    write_bytes(dir / "app.classes2.dex", build_dex(testsupport::single_method({opc::const4(0, 0), opc::return_void})));
    write_bytes(dir / "other.dex", build_dex(testsupport::single_method({0x0000, 0x000e})));
    write_bytes(dir / "notes.txt", {1, 2, 3});
    const auto r = extract_directory(dir);
    ASSERT_EQ(r.histograms.size(), 2u);
    EXPECT_EQ(r.histograms.at("app").counts[0x0e], 2u);
    EXPECT_EQ(r.histograms.at("app").counts[0x12], 1u);
    EXPECT_EQ(r.histograms.at("other").total, 2u);
    EXPECT_TRUE(r.skipped.empty());
}

TEST(Extract, InvalidFilesFailOrSkip) {
    const auto dir = testsupport::temp_dir("extract_bad");
    write_bytes(dir / "good.dex", build_dex(testsupport::single_method({opc::return_void})));
    write_bytes(dir / "bad.dex", bytes_of({'x', 'y', 'z'}));
    EXPECT_THROW(extract_directory(dir), DexError);
    ExtractOptions opt;
    opt.skip_invalid = true;
    const auto r = extract_directory(dir, opt);
    EXPECT_EQ(r.histograms.size(), 1u);
    ASSERT_EQ(r.skipped.size(), 1u);
    EXPECT_NE(r.skipped[0].find("bad.dex"), std::string::npos);
    EXPECT_THROW(extract_directory(dir / "missing"), DataError);
}

TEST(Extract, TruncationsAlwaysError) {
    DexSpec s = testsupport::single_method({0x0026, 0x0004, 0x0000, 0x000e, 0x0300, 2, 2, 0, 1, 2});
    s.classes[0].static_fields = 1;
    s.classes[0].virtuals.push_back({{0x006e, 0x0010, 0x0000, 0x000e}, true});
    const auto full = build_dex(s);
    for (std::size_t len = 0; len < full.size(); ++len) {
        std::vector<std::uint8_t> cut(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(len));
        EXPECT_THROW(opcode_histogram(parse_dex(cut)), DexError) << len;
        if (len >= 0x70) {
            testsupport::put_u32(cut, 32, static_cast<std::uint32_t>(len));
            EXPECT_THROW(opcode_histogram(parse_dex(cut)), DexError) << "patched " << len;
        }
    }
}
