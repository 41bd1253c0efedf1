#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "texpand/profile.h"

namespace texpand::assembler {

struct DataWord {
  std::uint32_t addr = 0;
  std::uint32_t word = 0;

  friend bool operator==(const DataWord&, const DataWord&) = default;
};

// Assembled program. Code occupies consecutive words starting at `entry`.
struct Image {
  isa::ProfileId profile = isa::ProfileId::kRegister;
  std::uint32_t entry = 0;
  std::vector<std::uint32_t> code;
  std::vector<DataWord> data;
  std::map<std::string, std::uint32_t> symbols;

  friend bool operator==(const Image&, const Image&) = default;
};

class AssemblyError : public std::runtime_error {
 public:
  AssemblyError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// Two-pass assembler for the instruction set bound in `profile.store`.
//
//   .text / .data     switch section
//   .org <addr>       set the location counter; in .text only before the
//                     first instruction, and it becomes the entry point
//   .word v, ...      emit data words (in .data)
//   .equ name, v      define a constant
//   label:            define a label (case-sensitive)
//   ; comment
//
// Mnemonics and register names are case-insensitive. Operands accept a number,
// a symbol, or `sym+n` / `sym-n`. Register machine: `LD R5, 12(R1)`,
// `ADD R1, R2, R3`, `BEQZ R4, loop`. Stack machine: `bipush -3`, `iload 12`.
Image assemble(std::string_view source, const isa::Profile& profile);

// Canonical source for `image` with numeric operands; reassembles to the same
// code and data. Throws std::runtime_error naming the address of an unknown
// opcode.
std::string disassemble(const Image& image, const isa::Profile& profile);
std::string disassemble_word(std::uint32_t word, const isa::Profile& profile);

nlohmann::json to_json(const Image& image);
Image image_from_json(const nlohmann::json& j);

// Copies code and data into memory and points the PC at the entry.
void load(const Image& image, const isa::Profile& profile, micro::MachineState& state);

}  // namespace texpand::assembler
