#include "texpand/isa_register.h"

#include <array>

namespace texpand::isa::reg {

namespace {

using micro::OperandFormat;

constexpr const char* kFetch = "Main[pc] -> ir; pc <- pc + #1; end";

// Field map: rd ir(22-18), rs1 ir(17-13), rs2 ir(12-8), imm ir(12-0),
// jump target ir(22-0).
constexpr const char* kMicrocode = R"(
routine LD:
  mar <- R[ir(17-13)] + sext(ir(12-0))
  Main[mar] -> mdr
  mdr -> R[ir(22-18)]
  end

routine SW:
  mar <- R[ir(17-13)] + sext(ir(12-0))
  R[ir(22-18)] -> mdr
  mdr -> Main[mar]
  end

routine ADD:
  R[ir(12-8)] -> B
  R[ir(17-13)] -> A
  acc <- A + B
  acc -> R[ir(22-18)]
  end

routine SUB:
  R[ir(12-8)] -> B
  R[ir(17-13)] -> A
  acc <- A - B
  acc -> R[ir(22-18)]
  end

routine AND:
  R[ir(12-8)] -> B
  R[ir(17-13)] -> A
  acc <- A & B
  acc -> R[ir(22-18)]
  end

routine OR:
  R[ir(12-8)] -> B
  R[ir(17-13)] -> A
  acc <- A | B
  acc -> R[ir(22-18)]
  end

routine XOR:
  R[ir(12-8)] -> B
  R[ir(17-13)] -> A
  acc <- A ^ B
  acc -> R[ir(22-18)]
  end

routine SLL:
  R[ir(12-8)] -> B
  R[ir(17-13)] -> A
  acc <- A << B
  acc -> R[ir(22-18)]
  end

routine SRL:
  R[ir(12-8)] -> B
  R[ir(17-13)] -> A
  acc <- A >> B
  acc -> R[ir(22-18)]
  end

routine SLT:
  R[ir(12-8)] -> B
  R[ir(17-13)] -> A
  acc <- cmp(A, B)
  acc -> R[ir(22-18)]
  end

routine ADDI:
  sext(ir(12-0)) -> B
  R[ir(17-13)] -> A
  acc <- A + B
  acc -> R[ir(22-18)]
  end

routine ANDI:
  sext(ir(12-0)) -> B
  R[ir(17-13)] -> A
  acc <- A & B
  acc -> R[ir(22-18)]
  end

routine ORI:
  sext(ir(12-0)) -> B
  R[ir(17-13)] -> A
  acc <- A | B
  acc -> R[ir(22-18)]
  end

routine XORI:
  sext(ir(12-0)) -> B
  R[ir(17-13)] -> A
  acc <- A ^ B
  acc -> R[ir(22-18)]
  end

routine SLLI:
  sext(ir(12-0)) -> B
  R[ir(17-13)] -> A
  acc <- A << B
  acc -> R[ir(22-18)]
  end

routine SRLI:
  sext(ir(12-0)) -> B
  R[ir(17-13)] -> A
  acc <- A >> B
  acc -> R[ir(22-18)]
  end

routine SLTI:
  sext(ir(12-0)) -> B
  R[ir(17-13)] -> A
  acc <- cmp(A, B)
  acc -> R[ir(22-18)]
  end

routine BEQZ:
  R[ir(22-18)] -> A
  if nonzero(A) goto skip
  ir(12-0) -> pc
skip:
  end

routine BNEZ:
  R[ir(22-18)] -> A
  if zero(A) goto skip
  ir(12-0) -> pc
skip:
  end

routine J:
  ir(22-0) -> pc
  end

routine JAL:
  pc -> R31
  ir(22-0) -> pc
  end

routine JR:
  R[ir(22-18)] -> pc
  end

routine TRAP:
  fault trap

routine HALT:
  halt
)";

struct Binding {
  const char* mnemonic;
  std::uint32_t opcode;
  OperandFormat format;
};

constexpr std::array kBindings = {
    Binding{"HALT", 0x01, OperandFormat::kNone},
    Binding{"LD", 0x02, OperandFormat::kMem},
    Binding{"SW", 0x03, OperandFormat::kMem},
    Binding{"ADD", 0x04, OperandFormat::kReg3},
    Binding{"SUB", 0x05, OperandFormat::kReg3},
    Binding{"AND", 0x06, OperandFormat::kReg3},
    Binding{"OR", 0x07, OperandFormat::kReg3},
    Binding{"XOR", 0x08, OperandFormat::kReg3},
    Binding{"SLL", 0x09, OperandFormat::kReg3},
    Binding{"SRL", 0x0A, OperandFormat::kReg3},
    Binding{"SLT", 0x0B, OperandFormat::kReg3},
    Binding{"ADDI", 0x0C, OperandFormat::kRegRegImm},
    Binding{"ANDI", 0x0D, OperandFormat::kRegRegImm},
    Binding{"ORI", 0x0E, OperandFormat::kRegRegImm},
    Binding{"XORI", 0x0F, OperandFormat::kRegRegImm},
    Binding{"SLLI", 0x10, OperandFormat::kRegRegImm},
    Binding{"SRLI", 0x11, OperandFormat::kRegRegImm},
    Binding{"SLTI", 0x12, OperandFormat::kRegRegImm},
    Binding{"BEQZ", 0x13, OperandFormat::kRegTarget},
    Binding{"BNEZ", 0x14, OperandFormat::kRegTarget},
    Binding{"J", 0x15, OperandFormat::kTarget},
    Binding{"JAL", 0x16, OperandFormat::kTarget},
    Binding{"JR", 0x17, OperandFormat::kReg},
    Binding{"TRAP", 0x18, OperandFormat::kNone},
};

}  // namespace

micro::RegisterFile registers() {
  std::vector<std::string> names = {"pc", "ir", "mar", "mdr", "a", "b", "acc"};
  for (auto& s : texpand_scratch_registers()) names.push_back(s);
  return micro::RegisterFile(std::move(names), 32);
}

micro::ControlStore base_isa() {
  const micro::RegisterFile regs = registers();
  micro::ControlStore store(micro::parse_routine("fetch", kFetch, regs), regs.index("pc"),
                            regs.index("ir"));
  auto routines = micro::parse_control_store(kMicrocode, regs);
  for (const Binding& b : kBindings) {
    micro::InstructionDef def;
    def.opcode = b.opcode;
    def.mnemonic = b.mnemonic;
    def.format = b.format;
    for (auto& r : routines) {
      if (r.name == b.mnemonic) def.routine = r;
    }
    store.bind(std::move(def));
  }
  return store;
}

micro::MicroRoutine texpand_routine(const TrellisLayout& layout, const convcode::Trellis& trellis) {
  return micro::parse_routine("TEXPAND", texpand_body_source(layout, trellis, "R1"), registers());
}

Profile make_base_profile() {
  Profile p;
  p.id = ProfileId::kRegister;
  p.regs = registers();
  p.store = base_isa();
  return p;
}

Profile make_profile(const convcode::EncoderSpec& spec) {
  Profile p = make_base_profile();
  const convcode::Trellis trellis = convcode::build_trellis(spec);
  p.store = micro::register_custom_instruction(
      std::move(p.store), kTexpandOpcode,
      texpand_routine(TrellisLayout{trellis.n_states}, trellis));
  return p;
}

}  // namespace texpand::isa::reg
