#include <gtest/gtest.h>

#include "eosscan/error.hpp"
#include "fixtures.hpp"

using namespace eosscan;
using namespace eosscan::wasm;

namespace {

bytes header()
{
    return {0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00};
}

// wat2wasm '(module (func (export "apply") (param i64 i64 i64)))', frozen.
const bytes apply_reference = {0x00, 0x61, 0x73, 0x6d, 0x01, 0x00, 0x00, 0x00, 0x01, 0x07, 0x01, 0x60, 0x03,
                               0x7e, 0x7e, 0x7e, 0x00, 0x03, 0x02, 0x01, 0x00, 0x07, 0x09, 0x01, 0x05, 0x61,
                               0x70, 0x70, 0x6c, 0x79, 0x00, 0x00, 0x0a, 0x04, 0x01, 0x02, 0x00, 0x0b};

}  // namespace

TEST(parse_module, minimal_module_is_empty)
{
    const auto m = parse_module(header());
    EXPECT_EQ(m.version, 1u);
    EXPECT_TRUE(m.types.empty());
    EXPECT_TRUE(m.imports.empty());
    EXPECT_TRUE(m.functions.empty());
    EXPECT_TRUE(m.code.empty());
    EXPECT_TRUE(m.exports.empty());
    EXPECT_FALSE(m.memory_limits.has_value());
}

TEST(parse_module, reference_apply_export)
{
    const auto m = parse_module(apply_reference);
    const auto* e = m.find_export("apply");
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->kind, ExternalKind::function);
    EXPECT_EQ(e->index, 0u);
    EXPECT_EQ(m.function_signature(0), fixtures::apply_sig);
}

TEST(parse_module, builder_matches_reference_assembler)
{
    ModuleBuilder b;
    const auto f = b.add_function(fixtures::apply_sig, {}, CodeBuilder().finish());
    b.export_function("apply", f);
    EXPECT_EQ(b.encode(), apply_reference);
}

TEST(parse_module, bad_magic)
{
    bytes data = header();
    data[1] = 'b';
    EXPECT_THROW(parse_module(data), MalformedBinary);
    EXPECT_THROW(parse_module(bytes{0x00, 0x61}), MalformedBinary);
}

TEST(parse_module, unsupported_version)
{
    bytes data = header();
    data[4] = 2;
    EXPECT_THROW(parse_module(data), UnsupportedVersion);
}

TEST(parse_module, truncated_code_section)
{
    bytes data = apply_reference;
    data.pop_back();
    EXPECT_THROW(parse_module(data), MalformedBinary);
    data = apply_reference;
    data[33] = 0x09;  // code section claims more bytes than remain
    EXPECT_THROW(parse_module(data), MalformedBinary);
}

TEST(parse_module, leb_overflow)
{
    bytes data = header();
    // type section whose size is a 6-byte LEB
    data.insert(data.end(), {0x01, 0x80, 0x80, 0x80, 0x80, 0x80, 0x01});
    EXPECT_THROW(parse_module(data), MalformedBinary);
}

TEST(parse_module, function_and_code_counts_must_agree)
{
    bytes data = apply_reference;
    // drop the code section entirely
    data.resize(32);
    EXPECT_THROW(parse_module(data), MalformedBinary);
}

TEST(parse_module, custom_sections_are_kept)
{
    bytes data = apply_reference;
    const bytes custom = {0x00, 0x06, 0x03, 'f', 'o', 'o', 0xAA, 0xBB};
    data.insert(data.end(), custom.begin(), custom.end());
    const auto m = parse_module(data);
    ASSERT_EQ(m.customs.size(), 1u);
    EXPECT_EQ(m.customs[0].name, "foo");
    EXPECT_EQ(m.customs[0].payload, (bytes{0xAA, 0xBB}));
    EXPECT_EQ(write_module(m), data);
}

TEST(parse_module, name_section_decoded)
{
    ModuleBuilder b;
    const auto f = b.add_function(fixtures::apply_sig, {}, CodeBuilder().finish());
    b.export_function("apply", f);
    bytes data = b.encode();
    // "name" section, function-names subsection: func 0 -> "main"
    const bytes names = {0x00, 0x0E, 0x04, 'n', 'a', 'm', 'e', 0x01, 0x07, 0x01, 0x00, 0x04, 'm', 'a', 'i', 'n'};
    data.insert(data.end(), names.begin(), names.end());
    const auto m = parse_module(data);
    ASSERT_EQ(m.function_names.count(0), 1u);
    EXPECT_EQ(m.function_names.at(0), "main");
    EXPECT_EQ(m.function_label(0), "main");
}

TEST(decode_function_body, const_end)
{
    FunctionBody body;
    body.code = CodeBuilder().i64_const(0).finish();
    const auto ins = decode_function_body(body);
    ASSERT_EQ(ins.size(), 2u);
    EXPECT_EQ(ins[0].op, Opcode::i64_const);
    EXPECT_EQ(ins[0].i64(), 0);
    EXPECT_EQ(ins[1].op, Opcode::end);
}

TEST(decode_function_body, br_table_with_default)
{
    FunctionBody body;
    body.code = CodeBuilder()
                    .block()
                    .block()
                    .block()
                    .local_get(0)
                    .br_table({0, 1, 2}, 0)
                    .end()
                    .end()
                    .end()
                    .finish();
    const auto ins = decode_function_body(body);
    const auto it = std::find_if(ins.begin(), ins.end(), [](const Instruction& i) { return i.op == Opcode::br_table; });
    ASSERT_NE(it, ins.end());
    EXPECT_EQ(it->br_table().size(), 4u);
    EXPECT_EQ(it->br_table().targets, (std::vector<uint32_t>{0, 1, 2}));
}

TEST(decode_function_body, missing_end)
{
    FunctionBody body;
    body.code = CodeBuilder().i64_const(0).drop().code();
    EXPECT_THROW(decode_function_body(body), MalformedBinary);
}

TEST(decode_function_body, unbalanced_and_unknown)
{
    FunctionBody body;
    body.code = CodeBuilder().block().finish();
    EXPECT_THROW(decode_function_body(body), MalformedBinary);
    body.code = CodeBuilder().raw({0xFF}).finish();
    EXPECT_THROW(decode_function_body(body), MalformedBinary);
}

TEST(decode_function_body, links_if_else_end)
{
    FunctionBody body;
    body.code = CodeBuilder().i32_const(1).if_().op(Opcode::nop).else_().op(Opcode::nop).end().finish();
    const auto ins = decode_function_body(body);
    ASSERT_EQ(ins.size(), 7u);
    EXPECT_EQ(ins[1].op, Opcode::if_);
    ASSERT_TRUE(ins[1].else_index.has_value());
    EXPECT_EQ(*ins[1].else_index, 3u);
    EXPECT_EQ(ins[1].end_index, 5u);
    EXPECT_EQ(ins[3].end_index, 5u);
    EXPECT_EQ(ins[5].end_index, 1u);
}

TEST(write_module, corpus_round_trip)
{
    for (const auto& entry : std::filesystem::directory_iterator(fixtures::corpus_dir()))
    {
        if (entry.path().extension() != ".wasm")
            continue;
        SCOPED_TRACE(entry.path().filename().string());
        const auto data = fixtures::read_file(entry.path());
        const auto m = parse_module(data);
        EXPECT_EQ(write_module(m), data);
        const auto again = parse_module(write_module(m));
        EXPECT_EQ(again.function_count(), m.function_count());
        for (uint32_t f = m.imported_function_count(); f < m.function_count(); ++f)
            EXPECT_EQ(decode_function_body(again.body(f)).size(), decode_function_body(m.body(f)).size());
    }
}

TEST(parse_module, deterministic)
{
    const auto data = fixtures::read_file(fixtures::corpus_dir() / "d2_missing_auth_withdraw.wasm");
    EXPECT_EQ(write_module(parse_module(data)), write_module(parse_module(data)));
}
