#include "texpand/isa_stack.h"

#include <array>

namespace texpand::isa::stack {

namespace {

using micro::OperandFormat;
using micro::StackSignature;

constexpr const char* kFetch = "Main[pc] -> ir; sext(ir(22-0)) -> mbr; pc <- pc + #1; end";

constexpr const char* kMicrocode = R"(
routine iadd:
  MAR = SP = SP - #1; rd
  H = TOS
  MDR = TOS = MDR + H; wr; end

routine isub:
  MAR = SP = SP - #1; rd
  H = TOS
  MDR = TOS = MDR - H; wr; end

routine iand:
  MAR = SP = SP - #1; rd
  H = TOS
  MDR = TOS = MDR & H; wr; end

routine ior:
  MAR = SP = SP - #1; rd
  H = TOS
  MDR = TOS = MDR | H; wr; end

routine ixor:
  MAR = SP = SP - #1; rd
  H = TOS
  MDR = TOS = MDR ^ H; wr; end

routine ishl:
  MAR = SP = SP - #1; rd
  H = TOS
  MDR = TOS = MDR << H; wr; end

routine iushr:
  MAR = SP = SP - #1; rd
  H = TOS
  MDR = TOS = MDR >> H; wr; end

routine bipush:
  MAR = SP = SP + #1
  MDR = TOS = MBR; wr; end

routine iload:
  H = LV
  MAR = MBR + H; rd
  MAR = SP = SP + #1; wr; TOS = MDR; end

routine istore:
  H = LV
  MAR = MBR + H
  MDR = TOS; wr
  MAR = SP = SP - #1; rd
  TOS = MDR; end

routine dup:
  MAR = SP = SP + #1
  MDR = TOS; wr; end

routine pop:
  MAR = SP = SP - #1; rd
  TOS = MDR; end

routine swap:
  MAR = SP - #1; rd
  MAR = SP
  H = MDR; wr
  MDR = TOS
  MAR = SP - #1; wr
  TOS = H; end

routine goto:
  PC = MBR; end

routine ifeq:
  MAR = SP = SP - #1; rd
  OPC = TOS
  TOS = MDR; if nonzero(OPC) goto skip
  PC = MBR
skip:
  end

routine iflt:
  MAR = SP = SP - #1; rd
  OPC = TOS
  TOS = MDR; if ge(OPC) goto skip
  PC = MBR
skip:
  end

// Pops value2 (top) and value1; branches when value1 < value2.
routine if_icmplt:
  MAR = SP = SP - #1; rd
  MAR = SP = SP - #1; H = MDR; rd
  OPC <- cmp(H, TOS); TOS = MDR; if zero(OPC) goto skip
  PC = MBR
skip:
  end

// Pushes the return address; the callee usually stores it in a local.
routine jsr:
  MAR = SP = SP + #1
  MDR = TOS = PC; wr
  PC = MBR; end

routine ret:
  H = LV
  MAR = MBR + H; rd
  PC = MDR; end

routine nop:
  end

routine trap:
  fault trap

routine halt:
  halt
)";

struct Binding {
  const char* mnemonic;
  std::uint32_t opcode;
  OperandFormat format;
  StackSignature stack;
};

constexpr std::array kBindings = {
    Binding{"nop", 0x02, OperandFormat::kNone, {0, 0}},
    Binding{"bipush", 0x10, OperandFormat::kImm, {0, 1}},
    Binding{"iload", 0x15, OperandFormat::kIndex, {0, 1}},
    Binding{"istore", 0x36, OperandFormat::kIndex, {1, 0}},
    Binding{"pop", 0x57, OperandFormat::kNone, {1, 0}},
    Binding{"dup", 0x59, OperandFormat::kNone, {1, 2}},
    Binding{"swap", 0x5F, OperandFormat::kNone, {2, 2}},
    Binding{"iadd", 0x60, OperandFormat::kNone, {2, 1}},
    Binding{"isub", 0x64, OperandFormat::kNone, {2, 1}},
    Binding{"ishl", 0x78, OperandFormat::kNone, {2, 1}},
    Binding{"iushr", 0x7C, OperandFormat::kNone, {2, 1}},
    Binding{"iand", 0x7E, OperandFormat::kNone, {2, 1}},
    Binding{"ior", 0x80, OperandFormat::kNone, {2, 1}},
    Binding{"ixor", 0x82, OperandFormat::kNone, {2, 1}},
    Binding{"ifeq", 0x99, OperandFormat::kTarget, {1, 0}},
    Binding{"iflt", 0x9B, OperandFormat::kTarget, {1, 0}},
    Binding{"if_icmplt", 0xA1, OperandFormat::kTarget, {2, 0}},
    Binding{"goto", 0xA7, OperandFormat::kTarget, {0, 0}},
    Binding{"jsr", 0xA8, OperandFormat::kTarget, {0, 1}},
    Binding{"ret", 0xA9, OperandFormat::kIndex, {0, 0}},
    Binding{"trap", 0xFE, OperandFormat::kNone, {0, 0}},
    Binding{"halt", 0xFF, OperandFormat::kNone, {0, 0}},
};

}  // namespace

micro::RegisterFile registers() {
  std::vector<std::string> names = {"pc", "ir", "mbr", "sp", "lv", "tos", "h", "opc", "mar", "mdr"};
  for (auto& s : texpand_scratch_registers()) names.push_back(s);
  return micro::RegisterFile(std::move(names), 0);
}

micro::ControlStore base_isa() {
  const micro::RegisterFile regs = registers();
  micro::ControlStore store(micro::parse_routine("fetch", kFetch, regs), regs.index("pc"),
                            regs.index("ir"));
  store.set_stack({regs.index("sp"), kStackBase});
  auto routines = micro::parse_control_store(kMicrocode, regs);
  for (const Binding& b : kBindings) {
    micro::InstructionDef def;
    def.opcode = b.opcode;
    def.mnemonic = b.mnemonic;
    def.format = b.format;
    def.stack = b.stack;
    for (auto& r : routines) {
      if (r.name == b.mnemonic) def.routine = r;
    }
    store.bind(std::move(def));
  }
  return store;
}

micro::MicroRoutine texpand_routine(const TrellisLayout& layout, const convcode::Trellis& trellis) {
  const std::string body = "  tbase = TOS\n"
                           "  MAR = SP = SP - #1; rd\n"
                           "  TOS = MDR\n" +
                           texpand_body_source(layout, trellis, "tbase");
  return micro::parse_routine("texpand", body, registers());
}

Profile make_base_profile() {
  Profile p;
  p.id = ProfileId::kStack;
  p.regs = registers();
  p.store = base_isa();
  p.reset_values = {{p.regs.index("lv"), kFrameBase}, {p.regs.index("sp"), kStackBase - 1}};
  return p;
}

Profile make_profile(const convcode::EncoderSpec& spec) {
  Profile p = make_base_profile();
  const convcode::Trellis trellis = convcode::build_trellis(spec);
  p.store = micro::register_custom_instruction(
      std::move(p.store), kTexpandOpcode,
      texpand_routine(TrellisLayout{trellis.n_states}, trellis), false, OperandFormat::kNone,
      StackSignature{1, 0});
  return p;
}

}  // namespace texpand::isa::stack
