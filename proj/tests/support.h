#pragma once

// Helpers shared by the ISA, workload and acceptance tests.

#include <optional>
#include <random>
#include <string>

#include "texpand/assembler.h"
#include "texpand/convcode.h"
#include "texpand/layout.h"
#include "texpand/profile.h"

namespace texpand::testing {

inline constexpr std::uint32_t kLayoutBase = 0x800;

// A random but well-formed trellis stage: alive histories share one length,
// weights stay far below the dead-weight sentinel.
inline StageWords random_stage(std::mt19937& gen, std::uint32_t n_states) {
  StageWords w;
  const std::size_t length = gen() % kMaxHistoryBits;  // room for one more bit
  w.paths.weight.assign(n_states, convcode::kDeadWeight);
  w.paths.alive.assign(n_states, 0);
  w.paths.history.assign(n_states, {});
  for (std::uint32_t s = 0; s < n_states; ++s) {
    if (gen() % 4 == 0) continue;
    w.paths.alive[s] = 1;
    w.paths.weight[s] = gen() % (1u << 20);
    for (std::size_t i = 0; i < length; ++i) w.paths.history[s].push_back(gen() & 1u);
  }
  w.received_pair = static_cast<std::uint8_t>(gen() & 3u);
  w.schedule_mask = gen() % (1u << n_states);
  return w;
}

// Words a base-ISA subroutine may use for itself: a sentinel word it reads
// and a scratch range it may overwrite freely.
struct SubroutineArea {
  std::uint32_t inf_word = 0x80F;
  std::uint32_t scratch_begin = 0x810;
  std::uint32_t scratch_end = 0x830;
};

struct DiffOutcome {
  bool matches = false;
  std::string explanation;
};

// Runs `source` (which must execute exactly one trellis step on the layout at
// kLayoutBase and halt) on `profile`, and compares all of memory with the
// reference acs_step applied to the same stage. When the reference rejects
// the stage the program must fault and leave the layout untouched.
inline DiffOutcome trellis_step_matches(const isa::Profile& profile, const std::string& source,
                                        const convcode::Trellis& trellis, const StageWords& stage,
                                        std::optional<micro::HaltReason> fault_reason = {},
                                        std::optional<SubroutineArea> own = {}) {
  const TrellisLayout layout{trellis.n_states};
  const assembler::Image image = assembler::assemble(source, profile);
  micro::MachineState state = profile.make_state();
  assembler::load(image, profile, state);
  auto area = std::span(state.memory()).subspan(kLayoutBase, layout.size());
  store_stage(layout, stage, area);
  if (own) state.memory()[own->inf_word] = convcode::kDeadWeight;
  std::vector<std::uint32_t> before = state.memory();

  std::optional<convcode::PathState> expected;
  try {
    expected = convcode::acs_step(trellis, stage.paths, stage.received_pair,
                                  convcode::StageSchedule::from_mask(trellis.n_states,
                                                                     stage.schedule_mask));
  } catch (const std::runtime_error&) {
  }
  const micro::ExecStats stats = micro::run(state, profile.store, 10'000'000);

  std::vector<std::uint32_t> want = before;
  if (expected) {
    store_paths(layout, *expected, std::span(want).subspan(kLayoutBase, layout.size()));
  }
  // The stack region holds the program's own pushes; only the data area and
  // code are compared.
  const std::size_t compared = std::min<std::size_t>(want.size(), 0xC00);
  if (own) {
    for (std::uint32_t a = own->scratch_begin; a < own->scratch_end; ++a) want[a] = state.memory()[a];
  }
  const bool memory_equal = std::equal(want.begin(), want.begin() + compared, state.memory().begin());
  DiffOutcome out;
  if (expected) {
    out.matches = stats.reason == micro::HaltReason::kHalted && memory_equal;
    if (!out.matches) {
      out.explanation = std::string("halt=") + micro::to_string(stats.reason) + " " + stats.detail +
                        (memory_equal ? "" : " memory differs");
    }
  } else {
    const bool right_fault = fault_reason ? stats.reason == *fault_reason : is_fault(stats.reason);
    out.matches = right_fault && memory_equal;
    if (!out.matches) {
      out.explanation = std::string("expected a fault, got ") + micro::to_string(stats.reason) +
                        (memory_equal ? "" : " and memory changed");
    }
  }
  return out;
}

}  // namespace texpand::testing
