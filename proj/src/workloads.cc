#include "texpand/workloads.h"

#include <random>
#include <sstream>
#include <stdexcept>

#include "texpand/isa_register.h"
#include "texpand/isa_stack.h"
#include "texpand/layout.h"

namespace texpand::workloads {

namespace {

using isa::ProfileId;

constexpr const char* kWorkedExampleReceived = "10 11 11 00 11 00";

// Register allocation of the register-machine trellis function.
constexpr int kRegMetric = 12;    // R12..R15: branch metric per edge output
constexpr int kRegSchedule = 16;
constexpr int kRegInf = 17;
constexpr int kRegWeight = 18;    // R18..R21: new weights
constexpr int kRegHistory = 22;   // R22..R25: new histories
constexpr int kRegAlive = 26;     // R26..R29: new alive flags

// Locals of the stack-machine trellis function.
constexpr int kLocalReturn = 16;
constexpr int kLocalMetric = 18;  // 18..21
constexpr int kLocalTemp = 22;
constexpr int kLocalLowBit = 23;
constexpr int kLocalWeight = 24;  // 24..27
constexpr int kLocalHistory = 28; // 28..31
constexpr int kLocalAlive = 32;   // 32..35

std::string r(int n) { return "R" + std::to_string(n); }

void require_supported(const convcode::EncoderSpec& spec) {
  spec.validate();
  if (spec.constraint_length != 3) {
    throw std::invalid_argument("workloads are generated for K=3 encoders only");
  }
}

std::string register_function(const convcode::Trellis& t, const TrellisLayout& L) {
  std::ostringstream o;
  o << "; one trellis step on the layout at R1; clobbers R8-R29\n"
    << "trellis:\n"
    << "    LD R8, " << L.received() << "(R1)\n"
    << "    SRLI R9, R8, 1\n"
    << "    ANDI R10, R8, 1\n"
    << "    ADD R12, R9, R10\n"
    << "    ADDI R11, R0, 2\n"
    << "    SUB R15, R11, R12\n"
    << "    SUB R13, R9, R10\n"
    << "    ADDI R13, R13, 1\n"
    << "    SUB R14, R11, R13\n"
    << "    LD R16, " << L.schedule() << "(R1)\n"
    << "    ADDI R17, R0, -1\n"
    << "    SRLI R17, R17, 1\n";
  for (std::uint32_t d = 0; d < t.n_states; ++d) {
    const auto& p0 = t.preds[d][0];
    const auto& p1 = t.preds[d][1];
    const std::string w = r(kRegWeight + static_cast<int>(d));
    const std::string h = r(kRegHistory + static_cast<int>(d));
    const std::string a = r(kRegAlive + static_cast<int>(d));
    const std::string ds = std::to_string(d);
    o << "    ADD " << w << ", " << r(kRegInf) << ", R0\n"
      << "    ADD " << h << ", R0, R0\n"
      << "    ADD " << a << ", R0, R0\n"
      << "    ANDI R8, " << r(kRegSchedule) << ", " << (1u << d) << "\n"
      << "    BEQZ R8, tf_next" << ds << "\n"
      << "    LD R8, " << L.alive(p0.state) << "(R1)\n"
      << "    BEQZ R8, tf_second" << ds << "\n"
      << "    LD R8, " << L.weight(p0.state) << "(R1)\n"
      << "    ADD " << w << ", R8, " << r(kRegMetric + p0.output) << "\n"
      << "    LD " << h << ", " << L.history(p0.state) << "(R1)\n"
      << "tf_second" << ds << ":\n"
      << "    LD R8, " << L.alive(p1.state) << "(R1)\n"
      << "    BEQZ R8, tf_chosen" << ds << "\n"
      << "    LD R8, " << L.weight(p1.state) << "(R1)\n"
      << "    ADD R8, R8, " << r(kRegMetric + p1.output) << "\n"
      << "    SLT R9, R8, " << w << "\n"
      << "    BEQZ R9, tf_chosen" << ds << "\n"
      << "    ADD " << w << ", R8, R0\n"
      << "    LD " << h << ", " << L.history(p1.state) << "(R1)\n"
      << "tf_chosen" << ds << ":\n"
      << "    SLT " << a << ", " << w << ", " << r(kRegInf) << "\n"
      << "    BEQZ " << a << ", tf_next" << ds << "\n"
      << "    SLLI " << h << ", " << h << ", 1\n";
    if (p0.input) o << "    ORI " << h << ", " << h << ", 1\n";
    o << "tf_next" << ds << ":\n";
  }
  o << "    OR R8, " << r(kRegAlive) << ", " << r(kRegAlive + 1) << "\n";
  for (std::uint32_t d = 2; d < t.n_states; ++d) {
    o << "    OR R8, R8, " << r(kRegAlive + static_cast<int>(d)) << "\n";
  }
  o << "    BNEZ R8, tf_commit\n"
    << "    TRAP\n"
    << "tf_commit:\n";
  for (std::uint32_t d = 0; d < t.n_states; ++d) {
    const int i = static_cast<int>(d);
    o << "    SW " << r(kRegWeight + i) << ", " << L.weight(d) << "(R1)\n"
      << "    SW " << r(kRegAlive + i) << ", " << L.alive(d) << "(R1)\n"
      << "    SW " << r(kRegHistory + i) << ", " << L.history(d) << "(R1)\n";
  }
  o << "    LD R8, " << L.length() << "(R1)\n"
    << "    ADDI R8, R8, 1\n"
    << "    SW R8, " << L.length() << "(R1)\n"
    << "    JR R31\n";
  return o.str();
}

std::string stack_function(const convcode::Trellis& t, const TrellisLayout& L,
                           const MemoryMap& m) {
  const auto inf = m.local(m.inf_word);
  std::ostringstream o;
  o << "; one trellis step on the layout at LV; locals 16-35 are scratch\n"
    << "trellis:\n"
    << "    istore " << kLocalReturn << "\n"
    << "    iload " << L.received() << "\n"
    << "    bipush 1\n"
    << "    iushr\n"
    << "    istore " << kLocalTemp << "\n"
    << "    iload " << L.received() << "\n"
    << "    bipush 1\n"
    << "    iand\n"
    << "    istore " << kLocalLowBit << "\n"
    << "    iload " << kLocalTemp << "\n"
    << "    iload " << kLocalLowBit << "\n"
    << "    iadd\n"
    << "    istore " << kLocalMetric << "\n"
    << "    bipush 2\n"
    << "    iload " << kLocalMetric << "\n"
    << "    isub\n"
    << "    istore " << kLocalMetric + 3 << "\n"
    << "    iload " << kLocalTemp << "\n"
    << "    iload " << kLocalLowBit << "\n"
    << "    isub\n"
    << "    bipush 1\n"
    << "    iadd\n"
    << "    istore " << kLocalMetric + 1 << "\n"
    << "    bipush 2\n"
    << "    iload " << kLocalMetric + 1 << "\n"
    << "    isub\n"
    << "    istore " << kLocalMetric + 2 << "\n";
  for (std::uint32_t d = 0; d < t.n_states; ++d) {
    const auto& p0 = t.preds[d][0];
    const auto& p1 = t.preds[d][1];
    const std::string ds = std::to_string(d);
    const auto w = kLocalWeight + d, h = kLocalHistory + d, a = kLocalAlive + d;
    o << "    iload " << inf << "\n"
      << "    istore " << w << "\n"
      << "    bipush 0\n"
      << "    istore " << h << "\n"
      << "    bipush 0\n"
      << "    istore " << a << "\n"
      << "    iload " << L.schedule() << "\n"
      << "    bipush " << (1u << d) << "\n"
      << "    iand\n"
      << "    ifeq tf_next" << ds << "\n"
      << "    iload " << L.alive(p0.state) << "\n"
      << "    ifeq tf_second" << ds << "\n"
      << "    iload " << L.weight(p0.state) << "\n"
      << "    iload " << kLocalMetric + p0.output << "\n"
      << "    iadd\n"
      << "    istore " << w << "\n"
      << "    iload " << L.history(p0.state) << "\n"
      << "    istore " << h << "\n"
      << "tf_second" << ds << ":\n"
      << "    iload " << L.alive(p1.state) << "\n"
      << "    ifeq tf_chosen" << ds << "\n"
      << "    iload " << L.weight(p1.state) << "\n"
      << "    iload " << kLocalMetric + p1.output << "\n"
      << "    iadd\n"
      << "    istore " << kLocalTemp << "\n"
      << "    iload " << kLocalTemp << "\n"
      << "    iload " << w << "\n"
      << "    if_icmplt tf_take" << ds << "\n"
      << "    goto tf_chosen" << ds << "\n"
      << "tf_take" << ds << ":\n"
      << "    iload " << kLocalTemp << "\n"
      << "    istore " << w << "\n"
      << "    iload " << L.history(p1.state) << "\n"
      << "    istore " << h << "\n"
      << "tf_chosen" << ds << ":\n"
      << "    iload " << w << "\n"
      << "    iload " << inf << "\n"
      << "    if_icmplt tf_alive" << ds << "\n"
      << "    goto tf_next" << ds << "\n"
      << "tf_alive" << ds << ":\n"
      << "    iload " << h << "\n"
      << "    bipush 1\n"
      << "    ishl\n";
    if (p0.input) {
      o << "    bipush 1\n"
        << "    ior\n";
    }
    o << "    istore " << h << "\n"
      << "    bipush 1\n"
      << "    istore " << a << "\n"
      << "tf_next" << ds << ":\n";
  }
  o << "    iload " << kLocalAlive << "\n";
  for (std::uint32_t d = 1; d < t.n_states; ++d) {
    o << "    iload " << kLocalAlive + d << "\n"
      << "    ior\n";
  }
  o << "    ifeq tf_fail\n";
  for (std::uint32_t d = 0; d < t.n_states; ++d) {
    o << "    iload " << kLocalWeight + d << "\n"
      << "    istore " << L.weight(d) << "\n"
      << "    iload " << kLocalAlive + d << "\n"
      << "    istore " << L.alive(d) << "\n"
      << "    iload " << kLocalHistory + d << "\n"
      << "    istore " << L.history(d) << "\n";
  }
  o << "    iload " << L.length() << "\n"
    << "    bipush 1\n"
    << "    iadd\n"
    << "    istore " << L.length() << "\n"
    << "    ret " << kLocalReturn << "\n"
    << "tf_fail:\n"
    << "    trap\n";
  return o.str();
}

void emit_data(std::ostringstream& o, const WorkloadConfig& cfg, const TrellisLayout& L,
               const convcode::Trellis& trellis) {
  const std::size_t stages = cfg.n_received_bits / 2;
  const auto initial = convcode::PathState::initial(trellis.n_states);
  std::vector<std::uint32_t> area(L.size(), 0);
  store_paths(L, initial, area);
  o << ".data\n"
    << ".org LAYOUT\n"
    << "    .word";
  for (std::size_t i = 0; i < area.size(); ++i) o << (i ? ", " : " ") << area[i];
  o << "\n"
    << ".org " << cfg.memory.inf_word << "\n"
    << "    .word " << convcode::kDeadWeight << "\n"
    << ".org RX\n";
  for (std::size_t s = 0; s < stages; ++s) {
    o << "    .word " << ((cfg.received[2 * s] << 1) | cfg.received[2 * s + 1]) << "\n";
  }
  o << ".org SCHED\n";
  for (std::size_t s = 0; s < stages; ++s) {
    o << "    .word " << convcode::termination_schedule(trellis, s, stages).mask() << "\n";
  }
}

}  // namespace

const char* to_string(Variant v) {
  return v == Variant::kTexpand ? "texpand" : "asm";
}

Variant parse_variant(std::string_view name) {
  if (name == "texpand") return Variant::kTexpand;
  if (name == "asm" || name == "assembly_function") return Variant::kAssemblyFunction;
  throw std::invalid_argument("unknown variant '" + std::string(name) + "' (expected asm or texpand)");
}

void WorkloadConfig::validate() const {
  require_supported(spec);
  const std::size_t min_bits = 2 * static_cast<std::size_t>(spec.memory_cells());
  if (n_received_bits % 2 != 0) throw std::invalid_argument("received bit count must be even");
  if (n_received_bits < min_bits || n_received_bits > kMaxReceivedBits) {
    throw std::invalid_argument("received bit count must be between " + std::to_string(min_bits) +
                                " and " + std::to_string(kMaxReceivedBits));
  }
  if (received.size() != n_received_bits) {
    throw std::invalid_argument("received word has " + std::to_string(received.size()) +
                                " bits, expected " + std::to_string(n_received_bits));
  }
  const std::size_t stages = n_received_bits / 2;
  if (memory.output_base + stages > isa::kDefaultMemoryWords ||
      memory.received_base + stages > memory.schedule_base ||
      memory.schedule_base + stages > memory.output_base) {
    throw std::invalid_argument("memory map areas overlap or exceed memory");
  }
  if (profile == ProfileId::kStack && memory.layout_base != isa::stack::kFrameBase) {
    throw std::invalid_argument("stack workloads keep the layout at the frame base");
  }
}

convcode::BitVec received_word(const convcode::EncoderSpec& spec, std::size_t n_bits,
                               std::uint32_t seed) {
  spec.validate();
  const std::size_t flush = static_cast<std::size_t>(spec.memory_cells());
  if (n_bits % 2 != 0 || n_bits < 2 * flush) {
    throw std::invalid_argument("received bit count must be even and at least " +
                                std::to_string(2 * flush));
  }
  if (n_bits == 12 && seed == kDefaultSeed && spec == convcode::kWorkedExampleSpec) {
    return convcode::parse_bits(kWorkedExampleReceived);
  }
  std::mt19937 gen(seed);
  convcode::BitVec message;
  for (std::size_t i = 0; i < n_bits / 2 - flush; ++i) message.push_back(gen() & 1u);
  message.insert(message.end(), flush, 0);
  convcode::BitVec word = convcode::encode(spec, message);
  for (std::size_t block = 0; block + 12 <= word.size(); block += 12) word[block + gen() % 12] ^= 1u;
  return word;
}

WorkloadConfig make_config(ProfileId profile, Variant variant, std::size_t n_bits,
                           const convcode::EncoderSpec& spec, std::uint32_t seed) {
  WorkloadConfig cfg;
  cfg.profile = profile;
  cfg.variant = variant;
  cfg.n_received_bits = n_bits;
  cfg.spec = spec;
  cfg.received = received_word(spec, n_bits, seed);
  cfg.validate();
  return cfg;
}

std::string trellis_function_source(ProfileId profile, const convcode::EncoderSpec& spec,
                                    const MemoryMap& memory) {
  require_supported(spec);
  const auto trellis = convcode::build_trellis(spec);
  const TrellisLayout layout{trellis.n_states};
  return profile == ProfileId::kRegister ? register_function(trellis, layout)
                                         : stack_function(trellis, layout, memory);
}

std::size_t trellis_function_size(ProfileId profile, const convcode::EncoderSpec& spec) {
  const isa::Profile p =
      profile == ProfileId::kRegister ? isa::reg::make_base_profile() : isa::stack::make_base_profile();
  return assembler::assemble(trellis_function_source(profile, spec), p).code.size();
}

GeneratedProgram gen_program(const WorkloadConfig& cfg) {
  cfg.validate();
  const auto trellis = convcode::build_trellis(cfg.spec);
  const TrellisLayout L{trellis.n_states};
  const MemoryMap& m = cfg.memory;
  const std::size_t stages = cfg.n_received_bits / 2;
  const bool texpand = cfg.variant == Variant::kTexpand;
  const bool reg = cfg.profile == ProfileId::kRegister;

  std::ostringstream o;
  o << "; Viterbi decoder, " << isa::to_string(cfg.profile) << " machine, "
    << (texpand ? "TEXPAND" : "trellis subroutine") << ", " << cfg.n_received_bits
    << " received bits\n"
    << ".equ LAYOUT, " << m.layout_base << "\n"
    << ".equ RX, " << m.received_base << "\n"
    << ".equ SCHED, " << m.schedule_base << "\n"
    << ".equ OUT, " << m.output_base << "\n"
    << ".text\n"
    << "main:\n";
  if (reg) {
    o << "    ADDI R1, R0, LAYOUT\n";
    for (std::size_t s = 0; s < stages; ++s) {
      o << "    LD R5, RX+" << s << "(R0)\n"
        << "    SW R5, " << L.received() << "(R1)\n"
        << "    LD R5, SCHED+" << s << "(R0)\n"
        << "    SW R5, " << L.schedule() << "(R1)\n"
        << (texpand ? "    TEXPAND\n" : "    JAL trellis\n");
    }
    o << "    LD R6, " << L.history(0) << "(R1)\n";
    for (std::size_t j = 0; j < stages; ++j) {
      o << "    SRLI R8, R6, " << stages - 1 - j << "\n"
        << "    ANDI R8, R8, 1\n"
        << "    SW R8, OUT+" << j << "(R0)\n";
    }
    o << "    HALT\n";
  } else {
    for (std::size_t s = 0; s < stages; ++s) {
      o << "    iload RX-LAYOUT+" << s << "\n"
        << "    istore " << L.received() << "\n"
        << "    iload SCHED-LAYOUT+" << s << "\n"
        << "    istore " << L.schedule() << "\n";
      if (texpand) {
        o << "    bipush LAYOUT\n"
          << "    texpand\n";
      } else {
        o << "    jsr trellis\n";
      }
    }
    for (std::size_t j = 0; j < stages; ++j) {
      o << "    iload " << L.history(0) << "\n"
        << "    bipush " << stages - 1 - j << "\n"
        << "    iushr\n"
        << "    bipush 1\n"
        << "    iand\n"
        << "    istore OUT-LAYOUT+" << j << "\n";
    }
    o << "    halt\n";
  }
  if (!texpand) o << trellis_function_source(cfg.profile, cfg.spec, m);
  emit_data(o, cfg, L, trellis);

  GeneratedProgram out;
  out.source = o.str();
  const auto decoded = convcode::viterbi_decode_detailed(cfg.spec, cfg.received);
  out.expected_output = decoded.bits;
  out.expected_calls = decoded.acs_calls;
  return out;
}

isa::Profile profile_for(const WorkloadConfig& cfg) {
  const bool texpand = cfg.variant == Variant::kTexpand;
  if (cfg.profile == ProfileId::kRegister) {
    return texpand ? isa::reg::make_profile(cfg.spec) : isa::reg::make_base_profile();
  }
  return texpand ? isa::stack::make_profile(cfg.spec) : isa::stack::make_base_profile();
}

assembler::Image assemble_program(const WorkloadConfig& cfg, const GeneratedProgram& program,
                                  const isa::Profile& profile) {
  assembler::Image img = assembler::assemble(program.source, profile);
  if (cfg.variant == Variant::kAssemblyFunction) {
    for (std::size_t i = 0; i < img.code.size(); ++i) {
      if (micro::opcode_of(img.code[i]) == isa::kTexpandOpcode) {
        throw std::invalid_argument("assembly variant uses TEXPAND at address " +
                                    std::to_string(img.entry + i));
      }
    }
  }
  return img;
}

convcode::BitVec read_output(const micro::MachineState& state, const WorkloadConfig& cfg) {
  convcode::BitVec bits;
  const auto& mem = state.memory();
  for (std::size_t j = 0; j < cfg.n_received_bits / 2; ++j) {
    const std::uint32_t word = mem.at(cfg.memory.output_base + j);
    // Anything other than 0 or 1 is kept distinguishable from a valid bit.
    bits.push_back(static_cast<std::uint8_t>(word > 1 ? 0xFF : word));
  }
  return bits;
}

std::filesystem::path workload_path(const std::filesystem::path& root, const WorkloadConfig& cfg) {
  const bool reg = cfg.profile == ProfileId::kRegister;
  return root / isa::to_string(cfg.profile) / to_string(cfg.variant) /
         ("viterbi_" + std::to_string(cfg.n_received_bits) + (reg ? ".rasm" : ".sasm"));
}

}  // namespace texpand::workloads
