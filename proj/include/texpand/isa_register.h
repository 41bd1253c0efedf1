#pragma once

#include "texpand/profile.h"

// DLX-style register machine: 32 general registers (R0 reads as zero, JAL
// links through R31), word-addressed memory, one instruction per word.
namespace texpand::isa::reg {

micro::RegisterFile registers();

// Base instruction set with its microcode; no custom instructions bound.
micro::ControlStore base_isa();

// TEXPAND for this machine: the layout base address is taken from R1.
micro::MicroRoutine texpand_routine(const TrellisLayout& layout, const convcode::Trellis& trellis);

// Base ISA plus TEXPAND for `spec` at kTexpandOpcode.
Profile make_profile(const convcode::EncoderSpec& spec = convcode::kWorkedExampleSpec);
Profile make_base_profile();

}  // namespace texpand::isa::reg
