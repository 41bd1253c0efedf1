#pragma once

#include "texpand/profile.h"

// MIC-1 style stack machine. The top of the operand stack is cached in TOS and
// also kept in memory at SP; local variables are addressed from LV.
namespace texpand::isa::stack {

inline constexpr std::uint32_t kFrameBase = 0x800;  // reset value of LV
inline constexpr std::uint32_t kStackBase = 0xC00;  // first operand-stack word

micro::RegisterFile registers();

micro::ControlStore base_isa();

// TEXPAND for this machine pops the layout base address from the stack.
micro::MicroRoutine texpand_routine(const TrellisLayout& layout, const convcode::Trellis& trellis);

Profile make_profile(const convcode::EncoderSpec& spec = convcode::kWorkedExampleSpec);
Profile make_base_profile();

}  // namespace texpand::isa::stack
