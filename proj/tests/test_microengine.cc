#include <stdexcept>

#include "doctest.h"
#include "texpand/machine.h"
#include "texpand/microcode.h"

using namespace texpand::micro;

namespace {

RegisterFile toy_registers() { return RegisterFile({"pc", "ir", "a", "b", "mar", "mdr", "sp"}, 4); }

ControlStore toy_store() {
  const RegisterFile regs = toy_registers();
  ControlStore store(parse_routine("fetch", "Main[pc] -> ir; pc <- pc + #1; end", regs),
                     regs.index("pc"), regs.index("ir"));
  const auto routines = parse_control_store(R"(
routine HALT:
  halt
routine COUNT:            // loops ir(7-0) times
  a <- ir(7-0)
loop:
  a <- a - #1
  if nonzero(a) goto loop
  end
routine LOADR:            // R[ir(1-0)] <- Main[ir(15-8)]
  mar <- ir(15-8); rd
  mdr -> R[ir(1-0)]; end
routine FAULT:
  fault custom failure
routine POP:
  sp <- sp - #1; end
)",
                                            regs);
  std::uint32_t opcode = 1;
  for (const auto& r : routines) {
    InstructionDef def;
    def.opcode = opcode++;
    def.mnemonic = r.name;
    def.routine = r;
    if (r.name == "POP") def.stack = StackSignature{1, 0};
    store.bind(def);
  }
  store.set_stack({regs.index("sp"), 100});
  return store;
}

std::uint32_t word(std::uint32_t opcode, std::uint32_t operand = 0) {
  return opcode << kOpcodeShift | operand;
}

}  // namespace

TEST_CASE("ir fields number bits from the LSB and normalize bounds") {
  const RegisterFile regs = toy_registers();
  const auto r1 = parse_routine("x", "a <- ir(12-0); end", regs);
  const auto r2 = parse_routine("x", "a <- ir(0-12); end", regs);
  const auto& f1 = std::get<BitfieldToReg>(r1.lines[0].ops[0]).field;
  const auto& f2 = std::get<BitfieldToReg>(r2.lines[0].ops[0]).field;
  CHECK(f1.hi == f2.hi);
  CHECK(f1.lo == f2.lo);
  CHECK(IrField{12, 0, false}.extract(0xFFFFF000u | 0x1FFFu) == 0x1FFFu);
  CHECK(IrField{12, 0, true}.extract(0x1000u) == 0xFFFFF000u);
  CHECK(IrField{22, 18, false}.extract(5u << 18) == 5u);
}

TEST_CASE("alu semantics") {
  CHECK(alu(AluOp::kAdd, 0xFFFFFFFFu, 1) == 0);
  CHECK(alu(AluOp::kSub, 1, 2) == 0xFFFFFFFFu);
  CHECK(alu(AluOp::kCmp, 0xFFFFFFFFu, 0) == 1);  // -1 < 0
  CHECK(alu(AluOp::kCmp, 0, 0) == 0);
  CHECK(alu(AluOp::kMin, 5, 0xFFFFFFFEu) == 0xFFFFFFFEu);
  CHECK(alu(AluOp::kShl, 1, 33) == 2);
  CHECK(alu(AluOp::kShr, 0x80000000u, 31) == 1);
}

TEST_CASE("compound lines chain assignments in MIC-1 style") {
  const RegisterFile regs = toy_registers();
  const auto r = parse_routine("x", "MAR = SP = SP + #1; rd; end", regs);
  REQUIRE(r.lines.size() == 1);
  CHECK(r.lines[0].ops.size() == 4);
}

TEST_CASE("microcode syntax errors carry line numbers") {
  const RegisterFile regs = toy_registers();
  auto line_of = [&](const char* text) {
    try {
      parse_control_store(text, regs);
    } catch (const MicrocodeError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("routine X:\n  a <- q\n  end\n") == 2);
  CHECK(line_of("routine X:\n  a <- b\n  end; a <- b\n") == 3);
  CHECK(line_of("routine X:\n  goto nowhere\n") == 2);
  CHECK(line_of("routine X:\n  a <- b\n") > 0);  // falls off the end
  CHECK(line_of("routine X:\nl:\nl:\n  end\n") == 3);
  CHECK(line_of("routine X:\n  ir(3-0) <- a\n  end\n") == 2);
  CHECK(line_of("  end\n") == 1);
  CHECK(line_of("routine X:\n  end\nroutine X:\n  end\n") == 3);
}

TEST_CASE("micro-loop executes the expected number of microinstructions") {
  const ControlStore store = toy_store();
  MachineState s(toy_registers(), 64);
  s.memory()[0] = word(store.find("COUNT")->opcode, 3);
  s.memory()[1] = word(store.find("HALT")->opcode);
  const ExecStats first = step_instruction(s, store);
  // a <- 3, then (a <- a-1, test) x3, then end.
  CHECK(first.counters.microinstructions == 1 + 3 * 2 + 1);
  CHECK(first.counters.fetch_microsteps == 1);
  CHECK(first.counters.cycles == 4 * 9);
  const ExecStats total = run(s, store);
  CHECK(total.reason == HaltReason::kHalted);
  CHECK(total.counters.assembly_instructions == 2);
  CHECK(total.counters.cycles == 4 * total.counters.total_micro());
  CHECK(total.counters.per_opcode.at(store.find("COUNT")->opcode).microinstructions == 8);
}

TEST_CASE("general register zero ignores writes") {
  const ControlStore store = toy_store();
  MachineState s(toy_registers(), 64);
  s.memory()[0] = word(store.find("LOADR")->opcode, 40u << 8 | 0);
  s.memory()[1] = word(store.find("LOADR")->opcode, 40u << 8 | 2);
  s.memory()[2] = word(store.find("HALT")->opcode);
  s.memory()[40] = 77;
  run(s, store);
  CHECK(s.gpr(0) == 0);
  CHECK(s.gpr(2) == 77);
}

TEST_CASE("faults stop the machine with a reason") {
  const ControlStore store = toy_store();
  SUBCASE("illegal opcode") {
    MachineState s(toy_registers(), 64);
    s.memory()[0] = 0;
    CHECK(run(s, store).reason == HaltReason::kIllegalInstruction);
  }
  SUBCASE("memory fault") {
    MachineState s(toy_registers(), 16);
    s.memory()[0] = word(store.find("LOADR")->opcode, 200u << 8);
    CHECK(run(s, store).reason == HaltReason::kMemoryFault);
  }
  SUBCASE("microcode fault") {
    MachineState s(toy_registers(), 16);
    s.memory()[0] = word(store.find("FAULT")->opcode);
    const auto st = run(s, store);
    CHECK(st.reason == HaltReason::kMicroFault);
    CHECK(st.detail == "custom failure");
    CHECK(is_fault(st.reason));
  }
  SUBCASE("stack underflow is checked before the routine") {
    MachineState s(toy_registers(), 16);
    s.set_reg("sp", 99);  // empty
    s.memory()[0] = word(store.find("POP")->opcode);
    const auto st = run(s, store);
    CHECK(st.reason == HaltReason::kStackUnderflow);
    CHECK(s.reg("sp") == 99);
    CHECK(st.counters.microinstructions == 0);
  }
  SUBCASE("running off the end of memory") {
    MachineState s(toy_registers(), 4);
    s.set_reg("pc", 4);
    CHECK(run(s, store).reason == HaltReason::kMemoryFault);
  }
}

TEST_CASE("cycle limit stops before exceeding the budget") {
  const ControlStore store = toy_store();
  MachineState s(toy_registers(), 64);
  s.memory()[0] = word(store.find("COUNT")->opcode, 200);
  const auto st = run(s, store, 100);
  CHECK(st.reason == HaltReason::kCycleLimit);
  CHECK(st.counters.cycles <= 100);
  CHECK(st.counters.cycles == 100);
  CHECK_FALSE(is_fault(st.reason));
}

TEST_CASE("custom opcode space holds 256 instructions") {
  ControlStore store = toy_store();
  const RegisterFile regs = toy_registers();
  const MicroRoutine body = parse_routine("C", "a <- a + #1; end", regs);
  for (std::uint32_t i = 0; i < 256; ++i) {
    MicroRoutine r = body;
    r.name = "C" + std::to_string(i);
    store = register_custom_instruction(store, kCustomOpcodeBase + i, r);
  }
  CHECK(store.find(kCustomOpcodeBase + 255)->mnemonic == "C255");
  MicroRoutine extra = body;
  extra.name = "EXTRA";
  CHECK_THROWS_AS(register_custom_instruction(store, kCustomOpcodeBase + 256, extra),
                  ControlStoreError);
  CHECK_THROWS_AS(register_custom_instruction(store, kCustomOpcodeBase, extra), ControlStoreError);
  MicroRoutine dup = body;
  dup.name = "c7";  // mnemonics are case-insensitive
  CHECK_THROWS_AS(register_custom_instruction(store, 0x80, dup), ControlStoreError);

  MicroRoutine replacement = parse_routine("C0", "a <- a + #2; end", regs);
  store = register_custom_instruction(store, kCustomOpcodeBase, replacement, true);
  MachineState s(regs, 8);
  s.memory()[0] = word(kCustomOpcodeBase);
  step_instruction(s, store);
  CHECK(s.reg("a") == 2);
}
