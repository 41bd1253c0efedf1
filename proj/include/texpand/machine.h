#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "texpand/microcode.h"

namespace texpand::micro {

inline constexpr int kOpcodeShift = 23;
inline constexpr std::uint32_t kOpcodeSpace = 1u << (32 - kOpcodeShift);  // 512
inline constexpr std::uint32_t kCustomOpcodeBase = 0x100;
inline constexpr std::uint64_t kDefaultCycleLimit = 1'000'000'000;

inline std::uint32_t opcode_of(std::uint32_t word) { return word >> kOpcodeShift; }

// How the assembler lays out operands for an instruction. Register-machine
// fields: rd [22:18], rs1 [17:13], rs2 [12:8], imm [12:0], target [22:0].
// Stack-machine operand: [22:0].
enum class OperandFormat {
  kNone,        // HALT
  kReg3,        // ADD Rd,Rs1,Rs2
  kRegRegImm,   // ADDI Rd,Rs1,imm
  kMem,         // LD Rd,imm(Rs1)
  kRegTarget,   // BEQZ Rd,label
  kReg,         // JR Rd
  kTarget,      // J label / goto label
  kImm,         // bipush c
  kIndex,       // iload n
};

// Operand-stack effect checked before the routine runs.
struct StackSignature {
  int pops = 0;
  int pushes = 0;
};

struct InstructionDef {
  std::uint32_t opcode = 0;
  std::string mnemonic;
  OperandFormat format = OperandFormat::kNone;
  MicroRoutine routine;
  std::optional<StackSignature> stack;
};

// Stack-machine discipline: an empty stack has SP == base - 1.
struct StackDiscipline {
  int sp_register = 0;
  std::uint32_t base = 0;
};

class ControlStoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ControlStore {
 public:
  ControlStore() = default;
  ControlStore(MicroRoutine fetch, int pc_register, int ir_register);

  // Throws ControlStoreError on an opcode outside the opcode space, or an
  // opcode/mnemonic that is already bound unless `rebind` is set.
  void bind(InstructionDef def, bool rebind = false);

  const InstructionDef* find(std::uint32_t opcode) const;
  const InstructionDef* find(std::string_view mnemonic) const;  // case-insensitive
  const std::map<std::uint32_t, InstructionDef>& instructions() const { return by_opcode_; }

  const MicroRoutine& fetch() const { return fetch_; }
  int pc_register() const { return pc_register_; }
  int ir_register() const { return ir_register_; }

  int cycles_per_micro() const { return cycles_per_micro_; }
  void set_cycles_per_micro(int c) { cycles_per_micro_ = c; }

  const std::optional<StackDiscipline>& stack() const { return stack_; }
  void set_stack(StackDiscipline s) { stack_ = s; }

 private:
  MicroRoutine fetch_;
  int pc_register_ = 0;
  int ir_register_ = 0;
  int cycles_per_micro_ = 4;
  std::optional<StackDiscipline> stack_;
  std::map<std::uint32_t, InstructionDef> by_opcode_;
};

// Returns a copy of `store` with `routine` bound to `opcode` under the
// routine's name as mnemonic.
ControlStore register_custom_instruction(ControlStore store, std::uint32_t opcode,
                                         MicroRoutine routine, bool rebind = false,
                                         OperandFormat format = OperandFormat::kNone,
                                         std::optional<StackSignature> stack = std::nullopt);

enum class HaltReason {
  kRunning,
  kHalted,
  kCycleLimit,
  kIllegalInstruction,
  kMemoryFault,
  kStackUnderflow,
  kMicroFault,
};

const char* to_string(HaltReason r);
bool is_fault(HaltReason r);

struct OpcodeCounts {
  std::uint64_t executed = 0;
  std::uint64_t microinstructions = 0;

  friend bool operator==(const OpcodeCounts&, const OpcodeCounts&) = default;
};

struct Counters {
  std::uint64_t assembly_instructions = 0;
  std::uint64_t microinstructions = 0;
  std::uint64_t fetch_microsteps = 0;
  std::uint64_t cycles = 0;
  std::map<std::uint32_t, OpcodeCounts> per_opcode;

  std::uint64_t total_micro() const { return microinstructions + fetch_microsteps; }
  friend bool operator==(const Counters&, const Counters&) = default;
};

struct ExecStats {
  Counters counters;
  HaltReason reason = HaltReason::kRunning;
  std::string detail;
};

class MachineState {
 public:
  MachineState(const RegisterFile& regs, std::size_t memory_words);

  const RegisterFile& register_file() const { return regs_; }

  std::uint32_t reg(int index) const { return regs_values_.at(index); }
  void set_reg(int index, std::uint32_t v) { regs_values_.at(index) = v; }
  std::uint32_t reg(std::string_view name) const { return reg(regs_.index(name)); }
  void set_reg(std::string_view name, std::uint32_t v) { set_reg(regs_.index(name), v); }

  std::uint32_t gpr(int n) const { return gprs_.at(n); }
  void set_gpr(int n, std::uint32_t v) {
    if (n != 0) gprs_.at(n) = v;
  }

  std::vector<std::uint32_t>& memory() { return memory_; }
  const std::vector<std::uint32_t>& memory() const { return memory_; }

  bool halted() const { return reason_ != HaltReason::kRunning; }
  HaltReason halt_reason() const { return reason_; }
  const std::string& halt_detail() const { return detail_; }
  void halt(HaltReason r, std::string detail = {});

  const Counters& counters() const { return counters_; }
  Counters& counters() { return counters_; }

  ExecStats snapshot() const { return {counters_, reason_, detail_}; }

 private:
  RegisterFile regs_;
  std::vector<std::uint32_t> regs_values_;
  std::array<std::uint32_t, 32> gprs_{};
  std::vector<std::uint32_t> memory_;
  HaltReason reason_ = HaltReason::kRunning;
  std::string detail_;
  Counters counters_;
};

// Fetches, decodes and executes one instruction. Returns the counter delta.
// Faults halt the machine rather than throwing.
ExecStats step_instruction(MachineState& state, const ControlStore& store,
                           std::uint64_t max_cycles = kDefaultCycleLimit);

// Steps until the machine halts or the next microinstruction would take the
// cycle count past `max_cycles`.
ExecStats run(MachineState& state, const ControlStore& store,
              std::uint64_t max_cycles = kDefaultCycleLimit);

}  // namespace texpand::micro
