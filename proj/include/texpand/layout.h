#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "texpand/convcode.h"

namespace texpand {

// Word offsets of the trellis working area used by TEXPAND and by the
// assembly trellis function. For a 4-state code:
//   +0..3 weights, +4..7 alive flags, +8..11 survivor histories,
//   +12 received pair, +13 admissible-state mask, +14 history length.
// Histories are packed newest-bit-lowest, so at most 32 stages fit.
struct TrellisLayout {
  std::uint32_t n_states = 4;

  std::uint32_t weight(std::uint32_t s) const { return s; }
  std::uint32_t alive(std::uint32_t s) const { return n_states + s; }
  std::uint32_t history(std::uint32_t s) const { return 2 * n_states + s; }
  std::uint32_t received() const { return 3 * n_states; }
  std::uint32_t schedule() const { return 3 * n_states + 1; }
  std::uint32_t length() const { return 3 * n_states + 2; }
  std::uint32_t size() const { return 3 * n_states + 3; }
};

inline constexpr std::size_t kMaxHistoryBits = 32;

// Memory image of one trellis stage input.
struct StageWords {
  convcode::PathState paths;
  std::uint8_t received_pair = 0;
  std::uint32_t schedule_mask = 0;
};

// Writes `size()` words starting at `area[0]`. All alive histories must have
// the same length (<= 32). Dead states are stored as weight kDeadWeight,
// alive 0, history 0.
void store_stage(const TrellisLayout& layout, const StageWords& stage,
                 std::span<std::uint32_t> area);

// Inverse of store_stage: alive histories are unpacked to the stored length,
// dead ones come back empty.
StageWords load_stage(const TrellisLayout& layout, std::span<const std::uint32_t> area);

// Stores just the path part (weights, flags, histories, length), leaving the
// received and schedule words untouched.
void store_paths(const TrellisLayout& layout, const convcode::PathState& paths,
                 std::span<std::uint32_t> area);

}  // namespace texpand
