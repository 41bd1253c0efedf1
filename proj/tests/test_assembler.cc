#include <stdexcept>

#include "doctest.h"
#include "texpand/assembler.h"
#include "texpand/isa_register.h"
#include "texpand/isa_stack.h"
#include "texpand/workloads.h"

using namespace texpand;
using assembler::assemble;
using assembler::AssemblyError;

namespace {

int error_line(const std::string& source, const isa::Profile& p) {
  try {
    assemble(source, p);
  } catch (const AssemblyError& e) {
    return e.line();
  }
  return -1;
}

std::uint32_t op(const isa::Profile& p, const char* m) {
  return p.store.find(m)->opcode << micro::kOpcodeShift;
}

}  // namespace

TEST_CASE("register machine encodings") {
  const auto p = isa::reg::make_base_profile();
  const auto img = assemble(R"(
    ADD R3, R4, R5
    ADDI R3, R4, -1
    LD R7, 12(R1)
    SW R7, -2(R31)
    BEQZ R9, 8191
    JR R31
    J 0x7FFFFF
    HALT
)",
                            p);
  REQUIRE(img.code.size() == 8);
  CHECK(img.code[0] == (op(p, "ADD") | 3u << 18 | 4u << 13 | 5u << 8));
  CHECK(img.code[1] == (op(p, "ADDI") | 3u << 18 | 4u << 13 | 0x1FFFu));
  CHECK(img.code[2] == (op(p, "LD") | 7u << 18 | 1u << 13 | 12u));
  CHECK(img.code[3] == (op(p, "SW") | 7u << 18 | 31u << 13 | 0x1FFEu));
  CHECK(img.code[4] == (op(p, "BEQZ") | 9u << 18 | 8191u));
  CHECK(img.code[5] == (op(p, "JR") | 31u << 18));
  CHECK(img.code[6] == (op(p, "J") | 0x7FFFFFu));
  CHECK(img.code[7] == op(p, "HALT"));
}

TEST_CASE("stack machine encodings") {
  const auto p = isa::stack::make_base_profile();
  const auto img = assemble("bipush -1\niload 48\ngoto 3\nhalt\n", p);
  CHECK(img.code[0] == (op(p, "bipush") | 0x7FFFFFu));
  CHECK(img.code[1] == (op(p, "iload") | 48u));
  CHECK(img.code[2] == (op(p, "goto") | 3u));
}

TEST_CASE("labels, constants, sections and entry point") {
  const auto p = isa::reg::make_base_profile();
  const auto img = assemble(R"(
.equ SIZE, 4
.text
.org 0x100
start:  addi r1, r0, SIZE+1
Start:  J start            ; labels are case-sensitive
        j Start
.data
.org 0x400
table:  .word 1, 2, SIZE
        .word table+1
)",
                            p);
  CHECK(img.entry == 0x100);
  CHECK(img.symbols.at("start") == 0x100);
  CHECK(img.symbols.at("Start") == 0x101);
  CHECK(img.symbols.at("table") == 0x400);
  CHECK((img.code[0] & 0x1FFFu) == 5);
  CHECK((img.code[1] & 0x7FFFFFu) == 0x100);
  CHECK((img.code[2] & 0x7FFFFFu) == 0x101);
  REQUIRE(img.data.size() == 4);
  CHECK(img.data[2] == assembler::DataWord{0x402, 4});
  CHECK(img.data[3] == assembler::DataWord{0x403, 0x401});
}

TEST_CASE("data without .org follows the code") {
  const auto p = isa::reg::make_base_profile();
  const auto img = assemble("LD R1, x(R0)\nHALT\n.data\nx: .word 9\n", p);
  CHECK(img.symbols.at("x") == 2);
  CHECK(img.data.front() == assembler::DataWord{2, 9});
}

TEST_CASE("errors name the offending line") {
  const auto p = isa::reg::make_base_profile();
  CHECK(error_line("HALT\nFROB R1\n", p) == 2);
  CHECK(error_line("J nowhere\n", p) == 1);
  CHECK(error_line("a: HALT\na: HALT\n", p) == 2);
  CHECK(error_line("HALT\n\nADD R1, R2\n", p) == 3);
  CHECK(error_line("ADDI R1, R0, 4096\n", p) == 1);
  CHECK(error_line("ADDI R1, R0, -4097\n", p) == 1);
  CHECK(error_line("ADD R32, R0, R0\n", p) == 1);
  CHECK(error_line("LD R1, 4\n", p) == 1);
  CHECK(error_line("HALT\n.org 10\n", p) == 2);
  CHECK(error_line(".word 3\n", p) == 1);
  CHECK(error_line(".data\nHALT\n", p) == 2);
  CHECK(error_line(".bogus\n", p) == 1);
  CHECK(error_line("TEXPAND\n", p) == 1);
  CHECK(error_line("BEQZ R1, 8192\n", p) == 1);
  CHECK_THROWS_AS(assemble("HALT\n.data\n.org 0\n.word 1\n", p), AssemblyError);
  CHECK_THROWS_AS(assemble(".data\n.org 9\n.word 1\n.org 9\n.word 2\n", p), AssemblyError);
  const auto s = isa::stack::make_base_profile();
  CHECK(error_line("bipush 4194304\n", s) == 1);
  CHECK(error_line("iload -1\n", s) == 1);
  CHECK(error_line("iadd 1\n", s) == 1);
}

TEST_CASE("mnemonics are case-insensitive") {
  const auto p = isa::stack::make_profile();
  CHECK(assemble("BIPUSH 1\nTexpand\nHALT\n", p).code == assemble("bipush 1\ntexpand\nhalt\n", p).code);
}

TEST_CASE("disassembly round-trips every workload") {
  for (auto profile : {isa::ProfileId::kRegister, isa::ProfileId::kStack}) {
    for (auto variant : {workloads::Variant::kAssemblyFunction, workloads::Variant::kTexpand}) {
      for (std::size_t n : {12, 24, 36, 48, 60}) {
        const auto cfg = workloads::make_config(profile, variant, n);
        const auto p = workloads::profile_for(cfg);
        const auto first = assemble(workloads::gen_program(cfg).source, p);
        const auto second = assemble(assembler::disassemble(first, p), p);
        CHECK(second.code == first.code);
        CHECK(second.data == first.data);
        CHECK(second.entry == first.entry);
      }
    }
  }
}

TEST_CASE("disassembler canonical form and unknown opcodes") {
  const auto p = isa::reg::make_base_profile();
  const auto img = assemble(".org 4\nld r2, -3(r1)\nbeqz r4, 4\n", p);
  const std::string text = assembler::disassemble(img, p);
  CHECK(text.find("LD R2, -3(R1)") != std::string::npos);
  CHECK(text.find("BEQZ R4, 4") != std::string::npos);
  assembler::Image bad = img;
  bad.code.push_back(0x1FFu << micro::kOpcodeShift);
  try {
    assembler::disassemble(bad, p);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("0x6") != std::string::npos);
  }
}

TEST_CASE("JSON image round trip and loading") {
  const auto p = isa::stack::make_base_profile();
  const auto img = assemble(".org 16\nx: bipush 1\nhalt\n.data\n.org 100\n.word 5, 6\n", p);
  const auto back = assembler::image_from_json(nlohmann::json::parse(assembler::to_json(img).dump()));
  CHECK(back == img);
  auto state = p.make_state();
  assembler::load(img, p, state);
  CHECK(state.reg("pc") == 16);
  CHECK(state.memory()[101] == 6);
  auto other = isa::reg::make_base_profile().make_state();
  CHECK_THROWS_AS(assembler::load(img, isa::reg::make_base_profile(), other), std::invalid_argument);
}
