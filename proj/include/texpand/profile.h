#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "texpand/convcode.h"
#include "texpand/layout.h"
#include "texpand/machine.h"

namespace texpand::isa {

enum class ProfileId { kRegister, kStack };

const char* to_string(ProfileId id);
ProfileId parse_profile(std::string_view name);  // "register" | "stack"

inline constexpr std::uint32_t kTexpandOpcode = micro::kCustomOpcodeBase;
inline constexpr std::size_t kDefaultMemoryWords = 4096;

// A simulated processor: datapath registers, control store and reset state.
struct Profile {
  ProfileId id = ProfileId::kRegister;
  micro::RegisterFile regs;
  micro::ControlStore store;
  std::vector<std::pair<int, std::uint32_t>> reset_values;
  std::size_t memory_words = kDefaultMemoryWords;

  micro::MachineState make_state() const;
};

// Datapath scratch registers TEXPAND may clobber. Supports up to 16 states.
std::vector<std::string> texpand_scratch_registers();
inline constexpr std::uint32_t kTexpandMaxStates = 16;

// Control-store text for one trellis step over the layout whose base address
// is held in `base` (a register name or Rn). The encoder's edge outputs are
// baked in as literals; destination states are unrolled.
std::string texpand_body_source(const TrellisLayout& layout, const convcode::Trellis& trellis,
                                std::string_view base);

}  // namespace texpand::isa
