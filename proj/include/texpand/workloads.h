#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "texpand/assembler.h"
#include "texpand/convcode.h"
#include "texpand/profile.h"

namespace texpand::workloads {

enum class Variant { kAssemblyFunction, kTexpand };

const char* to_string(Variant v);              // "asm" | "texpand"
Variant parse_variant(std::string_view name);  // also accepts "assembly_function"

// Data memory shared by both machines. The stack machine's LV points at
// kLayoutBase, so the same words double as its local variables.
struct MemoryMap {
  std::uint32_t layout_base = 0x800;     // trellis working area
  std::uint32_t inf_word = 0x80F;        // holds kDeadWeight
  std::uint32_t scratch_base = 0x810;    // locals used by the assembly function
  std::uint32_t received_base = 0x830;   // one received pair per stage
  std::uint32_t schedule_base = 0x850;   // one admissible-state mask per stage
  std::uint32_t output_base = 0x870;     // one decoded bit per word

  std::uint32_t local(std::uint32_t addr) const { return addr - layout_base; }
};

inline constexpr std::uint32_t kDefaultSeed = 0xC0DE;
inline constexpr std::size_t kMaxReceivedBits = 2 * kMaxHistoryBits;

struct WorkloadConfig {
  isa::ProfileId profile = isa::ProfileId::kRegister;
  Variant variant = Variant::kTexpand;
  std::size_t n_received_bits = 12;
  convcode::EncoderSpec spec = convcode::kWorkedExampleSpec;
  convcode::BitVec received;  // length n_received_bits
  MemoryMap memory;

  // Throws std::invalid_argument on an odd, too short or too long bit count,
  // a received word of the wrong length, or an encoder other than K=3.
  void validate() const;
};

// The worked-example word for 12 bits; otherwise a seeded pseudo-random
// message plus flush zeros, encoded, with one bit flipped per 12-bit block.
convcode::BitVec received_word(const convcode::EncoderSpec& spec, std::size_t n_bits,
                               std::uint32_t seed = kDefaultSeed);

WorkloadConfig make_config(isa::ProfileId profile, Variant variant, std::size_t n_bits,
                           const convcode::EncoderSpec& spec = convcode::kWorkedExampleSpec,
                           std::uint32_t seed = kDefaultSeed);

struct GeneratedProgram {
  std::string source;
  convcode::BitVec expected_output;
  std::size_t expected_calls = 0;
};

GeneratedProgram gen_program(const WorkloadConfig& cfg);

// Base-ISA subroutine performing one trellis step on the layout. Register
// machine: layout base in R1, called with JAL, returns through R31. Stack
// machine: called with jsr, net stack effect zero.
std::string trellis_function_source(isa::ProfileId profile,
                                    const convcode::EncoderSpec& spec = convcode::kWorkedExampleSpec,
                                    const MemoryMap& memory = {});

// Number of instructions the trellis subroutine assembles to.
std::size_t trellis_function_size(isa::ProfileId profile,
                                   const convcode::EncoderSpec& spec = convcode::kWorkedExampleSpec);

// Profile with TEXPAND bound for the texpand variant, base ISA otherwise.
isa::Profile profile_for(const WorkloadConfig& cfg);

// Assembles the program; for the assembly variant also rejects any image
// that contains the TEXPAND opcode.
assembler::Image assemble_program(const WorkloadConfig& cfg, const GeneratedProgram& program,
                                  const isa::Profile& profile);

// Decoded bits read back from the output area.
convcode::BitVec read_output(const micro::MachineState& state, const WorkloadConfig& cfg);

// workloads/<profile>/<variant>/viterbi_<n>.{rasm,sasm}
std::filesystem::path workload_path(const std::filesystem::path& root, const WorkloadConfig& cfg);

}  // namespace texpand::workloads
