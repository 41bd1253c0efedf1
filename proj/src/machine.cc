#include "texpand/machine.h"

#include <cctype>
#include <cstdio>

namespace texpand::micro {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%X", v);
  return buf;
}

class Executor {
 public:
  Executor(MachineState& s, const ControlStore& store, std::uint64_t max_cycles)
      : s_(s), store_(store), max_cycles_(max_cycles) {}

  // Runs a routine; returns false if the machine stopped inside it.
  bool run(const MicroRoutine& routine, std::uint64_t& line_counter,
           OpcodeCounts* opcode_counts) {
    const auto cpm = static_cast<std::uint64_t>(store_.cycles_per_micro());
    std::size_t pc = 0;
    Counters& c = s_.counters();
    while (true) {
      if (c.cycles + cpm > max_cycles_) {
        s_.halt(HaltReason::kCycleLimit, "cycle limit " + std::to_string(max_cycles_));
        return false;
      }
      ++line_counter;
      c.cycles += cpm;
      if (opcode_counts) ++opcode_counts->microinstructions;

      const MicroInstruction& mi = routine.lines[pc];
      std::size_t next = pc + 1;
      for (const MicroOp& op : mi.ops) {
        const Flow f = exec(op, next);
        if (f == Flow::kStop) return false;
        if (f == Flow::kEnd) return true;
      }
      pc = next;
    }
  }

 private:
  enum class Flow { kContinue, kEnd, kStop };

  std::uint32_t ir() const { return s_.reg(store_.ir_register()); }

  std::uint32_t read(const Operand& o) const {
    switch (o.kind) {
      case Operand::Kind::kRegister: return s_.reg(o.reg);
      case Operand::Kind::kGpr: return s_.gpr(o.reg);
      case Operand::Kind::kGprField: return s_.gpr(static_cast<int>(o.field.extract(ir()) & 31u));
      case Operand::Kind::kIrField: return o.field.extract(ir());
      case Operand::Kind::kLiteral: return o.literal;
    }
    return 0;
  }

  void write(const Operand& o, std::uint32_t v) {
    switch (o.kind) {
      case Operand::Kind::kRegister: s_.set_reg(o.reg, v); break;
      case Operand::Kind::kGpr: s_.set_gpr(o.reg, v); break;
      case Operand::Kind::kGprField: s_.set_gpr(static_cast<int>(o.field.extract(ir()) & 31u), v); break;
      default: break;  // rejected by the parser
    }
  }

  bool address_ok(std::uint32_t addr) {
    if (addr < s_.memory().size()) return true;
    s_.halt(HaltReason::kMemoryFault, "memory fault at address " + hex(addr));
    return false;
  }

  Flow exec(const MicroOp& op, std::size_t& next) {
    return std::visit(
        [&](const auto& o) -> Flow {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, RegTransfer>) {
            write(o.dst, read(o.src));
          } else if constexpr (std::is_same_v<T, BitfieldToReg>) {
            write(o.dst, o.field.extract(ir()));
          } else if constexpr (std::is_same_v<T, MemRead>) {
            const std::uint32_t addr = s_.reg(o.addr_reg);
            if (!address_ok(addr)) return Flow::kStop;
            s_.set_reg(o.data_reg, s_.memory()[addr]);
          } else if constexpr (std::is_same_v<T, MemWrite>) {
            const std::uint32_t addr = s_.reg(o.addr_reg);
            if (!address_ok(addr)) return Flow::kStop;
            s_.memory()[addr] = s_.reg(o.data_reg);
          } else if constexpr (std::is_same_v<T, Alu>) {
            write(o.dst, alu(o.op, read(o.a), read(o.b)));
          } else if constexpr (std::is_same_v<T, CondMicroBranch>) {
            const auto v = static_cast<std::int32_t>(read(o.subject));
            bool taken = false;
            switch (o.cond) {
              case Condition::kZero: taken = v == 0; break;
              case Condition::kNonzero: taken = v != 0; break;
              case Condition::kNeg: taken = v < 0; break;
              case Condition::kGe: taken = v >= 0; break;
            }
            if (taken) next = static_cast<std::size_t>(o.target);
          } else if constexpr (std::is_same_v<T, MicroJump>) {
            next = static_cast<std::size_t>(o.target);
          } else if constexpr (std::is_same_v<T, End>) {
            return Flow::kEnd;
          } else if constexpr (std::is_same_v<T, Halt>) {
            s_.halt(HaltReason::kHalted);
            return Flow::kStop;
          } else if constexpr (std::is_same_v<T, Fault>) {
            s_.halt(HaltReason::kMicroFault, o.reason);
            return Flow::kStop;
          }
          return Flow::kContinue;
        },
        op);
  }

  MachineState& s_;
  const ControlStore& store_;
  std::uint64_t max_cycles_;
};

Counters diff(const Counters& after, const Counters& before) {
  Counters d;
  d.assembly_instructions = after.assembly_instructions - before.assembly_instructions;
  d.microinstructions = after.microinstructions - before.microinstructions;
  d.fetch_microsteps = after.fetch_microsteps - before.fetch_microsteps;
  d.cycles = after.cycles - before.cycles;
  for (const auto& [op, counts] : after.per_opcode) {
    OpcodeCounts prev;
    if (auto it = before.per_opcode.find(op); it != before.per_opcode.end()) prev = it->second;
    if (counts == prev) continue;
    d.per_opcode[op] = {counts.executed - prev.executed,
                        counts.microinstructions - prev.microinstructions};
  }
  return d;
}

}  // namespace

ControlStore::ControlStore(MicroRoutine fetch, int pc_register, int ir_register)
    : fetch_(std::move(fetch)), pc_register_(pc_register), ir_register_(ir_register) {
  fetch_.validate();
}

void ControlStore::bind(InstructionDef def, bool rebind) {
  if (def.opcode >= kOpcodeSpace) {
    throw ControlStoreError("opcode " + hex(def.opcode) + " outside the " +
                            std::to_string(kOpcodeSpace) + "-entry opcode space");
  }
  def.routine.validate();
  if (!rebind) {
    if (by_opcode_.count(def.opcode)) {
      throw ControlStoreError("opcode " + hex(def.opcode) + " already bound to " +
                              by_opcode_.at(def.opcode).mnemonic);
    }
    if (find(def.mnemonic) != nullptr) {
      throw ControlStoreError("mnemonic '" + def.mnemonic + "' already bound");
    }
  } else if (const InstructionDef* other = find(def.mnemonic);
             other != nullptr && other->opcode != def.opcode) {
    throw ControlStoreError("mnemonic '" + def.mnemonic + "' bound to another opcode");
  }
  by_opcode_[def.opcode] = std::move(def);
}

const InstructionDef* ControlStore::find(std::uint32_t opcode) const {
  auto it = by_opcode_.find(opcode);
  return it == by_opcode_.end() ? nullptr : &it->second;
}

const InstructionDef* ControlStore::find(std::string_view mnemonic) const {
  const std::string key = lower(mnemonic);
  for (const auto& [op, def] : by_opcode_) {
    if (lower(def.mnemonic) == key) return &def;
  }
  return nullptr;
}

ControlStore register_custom_instruction(ControlStore store, std::uint32_t opcode,
                                         MicroRoutine routine, bool rebind, OperandFormat format,
                                         std::optional<StackSignature> stack) {
  InstructionDef def;
  def.opcode = opcode;
  def.mnemonic = routine.name;
  def.format = format;
  def.routine = std::move(routine);
  def.stack = stack;
  store.bind(std::move(def), rebind);
  return store;
}

const char* to_string(HaltReason r) {
  switch (r) {
    case HaltReason::kRunning: return "running";
    case HaltReason::kHalted: return "halted";
    case HaltReason::kCycleLimit: return "cycle-limit";
    case HaltReason::kIllegalInstruction: return "illegal instruction";
    case HaltReason::kMemoryFault: return "memory fault";
    case HaltReason::kStackUnderflow: return "stack underflow";
    case HaltReason::kMicroFault: return "microcode fault";
  }
  return "?";
}

bool is_fault(HaltReason r) {
  return r == HaltReason::kIllegalInstruction || r == HaltReason::kMemoryFault ||
         r == HaltReason::kStackUnderflow || r == HaltReason::kMicroFault;
}

MachineState::MachineState(const RegisterFile& regs, std::size_t memory_words)
    : regs_(regs), regs_values_(regs.size(), 0), memory_(memory_words, 0) {}

void MachineState::halt(HaltReason r, std::string detail) {
  reason_ = r;
  detail_ = std::move(detail);
}

ExecStats step_instruction(MachineState& state, const ControlStore& store,
                           std::uint64_t max_cycles) {
  const Counters before = state.counters();
  auto delta = [&] { return ExecStats{diff(state.counters(), before), state.halt_reason(),
                                      state.halt_detail()}; };
  if (state.halted()) return delta();

  Executor exec(state, store, max_cycles);
  Counters& c = state.counters();
  if (!exec.run(store.fetch(), c.fetch_microsteps, nullptr)) return delta();

  const std::uint32_t word = state.reg(store.ir_register());
  const InstructionDef* def = store.find(opcode_of(word));
  if (def == nullptr) {
    state.halt(HaltReason::kIllegalInstruction,
               "illegal instruction " + hex(word) + " before pc " +
                   hex(state.reg(store.pc_register())));
    return delta();
  }
  if (def->stack && store.stack()) {
    const auto sp = static_cast<std::int64_t>(state.reg(store.stack()->sp_register));
    const std::int64_t depth = sp - (static_cast<std::int64_t>(store.stack()->base) - 1);
    if (depth < def->stack->pops) {
      state.halt(HaltReason::kStackUnderflow,
                 def->mnemonic + " needs " + std::to_string(def->stack->pops) +
                     " operands, stack holds " + std::to_string(depth));
      return delta();
    }
  }
  ++c.assembly_instructions;
  OpcodeCounts& counts = c.per_opcode[def->opcode];
  ++counts.executed;
  exec.run(def->routine, c.microinstructions, &counts);
  return delta();
}

ExecStats run(MachineState& state, const ControlStore& store, std::uint64_t max_cycles) {
  while (!state.halted()) step_instruction(state, store, max_cycles);
  return state.snapshot();
}

}  // namespace texpand::micro
