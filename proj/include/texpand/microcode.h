#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace texpand::micro {

// Named internal registers of a datapath. Names are case-insensitive and
// stored lower-case. A profile may also expose an indexed general-purpose
// register file (R0..R31) with R0 hardwired to zero.
class RegisterFile {
 public:
  RegisterFile() = default;
  RegisterFile(std::vector<std::string> names, int gpr_count);

  std::optional<int> find(std::string_view name) const;
  int index(std::string_view name) const;  // throws std::out_of_range
  const std::string& name(int index) const { return names_.at(index); }
  int size() const { return static_cast<int>(names_.size()); }
  int gpr_count() const { return gpr_count_; }

 private:
  std::vector<std::string> names_;
  int gpr_count_ = 0;
};

// Bit field of the instruction register, bits numbered from the LSB.
struct IrField {
  int hi = 0;
  int lo = 0;
  bool is_signed = false;

  std::uint32_t extract(std::uint32_t ir) const;
};

// Source/destination of a register transfer.
struct Operand {
  enum class Kind { kRegister, kGpr, kGprField, kIrField, kLiteral };
  Kind kind = Kind::kRegister;
  int reg = 0;            // kRegister index or kGpr number
  IrField field;          // kGprField selector or kIrField value
  std::uint32_t literal = 0;

  static Operand Register(int r) { return {Kind::kRegister, r, {}, 0}; }
  static Operand Gpr(int n) { return {Kind::kGpr, n, {}, 0}; }
  static Operand GprField(IrField f) { return {Kind::kGprField, 0, f, 0}; }
  static Operand Field(IrField f) { return {Kind::kIrField, 0, f, 0}; }
  static Operand Literal(std::uint32_t v) { return {Kind::kLiteral, 0, {}, v}; }

  bool writable() const {
    return kind == Kind::kRegister || kind == Kind::kGpr || kind == Kind::kGprField;
  }
};

enum class AluOp { kAdd, kSub, kAnd, kOr, kXor, kShl, kShr, kMin, kCmp };

// Signed less-than for kCmp yields 1/0; shifts use the low five bits of b.
std::uint32_t alu(AluOp op, std::uint32_t a, std::uint32_t b);

enum class Condition { kZero, kNonzero, kNeg, kGe };

struct RegTransfer {
  Operand src;
  Operand dst;
};
struct BitfieldToReg {
  IrField field;
  Operand dst;
};
struct MemRead {
  int addr_reg = 0;
  int data_reg = 0;
};
struct MemWrite {
  int addr_reg = 0;
  int data_reg = 0;
};
struct Alu {
  AluOp op = AluOp::kAdd;
  Operand a;
  Operand b;
  Operand dst;
};
struct CondMicroBranch {
  Condition cond = Condition::kZero;
  Operand subject;
  int target = 0;  // line index within the routine
};
struct MicroJump {
  int target = 0;
};
struct End {};
struct Halt {};
struct Fault {
  std::string reason;
};

using MicroOp = std::variant<RegTransfer, BitfieldToReg, MemRead, MemWrite, Alu,
                             CondMicroBranch, MicroJump, End, Halt, Fault>;

bool is_control(const MicroOp& op);

// One microinstruction: the ops on one control-store line, applied in order.
// It costs one microinstruction slot however many ops it carries; a control
// op may only appear last.
struct MicroInstruction {
  std::vector<MicroOp> ops;
  int source_line = 0;
};

struct MicroRoutine {
  std::string name;
  std::vector<MicroInstruction> lines;

  // Throws std::invalid_argument if a branch leaves the routine, a control op
  // is not last on its line, or the final line can fall through.
  void validate() const;
};

class MicrocodeError : public std::runtime_error {
 public:
  MicrocodeError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// Parses the text control-store format:
//
//   routine LD:
//     mar <- R[ir(17-13)] + sext(ir(12-0))
//     Main[mar] -> mdr
//     mdr -> R[ir(22-18)]
//     end
//
// Statements on one line are separated by ';'. Forms: `src -> dst`,
// `dst <- expr`, `d1 = d2 = expr`, `Main[a] -> d`, `s -> Main[a]`, `rd`, `wr`,
// `goto L`, `if zero|nonzero|neg|ge(x) goto L`, `end`, `halt`, `fault text`.
// `L:` labels a line. Literals are written `#n`; comments start with `//`.
std::vector<MicroRoutine> parse_control_store(std::string_view text, const RegisterFile& regs);

// Parses a single routine body (no `routine` header) named `name`.
MicroRoutine parse_routine(std::string_view name, std::string_view body,
                           const RegisterFile& regs);

}  // namespace texpand::micro
