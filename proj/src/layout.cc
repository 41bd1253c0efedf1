#include "texpand/layout.h"

#include <stdexcept>

namespace texpand {

void store_paths(const TrellisLayout& layout, const convcode::PathState& paths,
                 std::span<std::uint32_t> area) {
  if (area.size() < layout.size()) throw std::out_of_range("trellis area too small");
  if (paths.weight.size() != layout.n_states) {
    throw std::invalid_argument("path state size does not match layout");
  }
  std::size_t length = 0;
  bool seen = false;
  for (std::uint32_t s = 0; s < layout.n_states; ++s) {
    if (!paths.alive[s]) continue;
    if (seen && paths.history[s].size() != length) {
      throw std::invalid_argument("alive histories differ in length");
    }
    length = paths.history[s].size();
    seen = true;
  }
  if (length > kMaxHistoryBits) throw std::length_error("history longer than a word");
  for (std::uint32_t s = 0; s < layout.n_states; ++s) {
    std::uint32_t packed = 0;
    if (paths.alive[s]) {
      for (auto bit : paths.history[s]) packed = (packed << 1) | (bit & 1u);
    }
    area[layout.weight(s)] = paths.alive[s] ? paths.weight[s] : convcode::kDeadWeight;
    area[layout.alive(s)] = paths.alive[s] ? 1 : 0;
    area[layout.history(s)] = packed;
  }
  area[layout.length()] = static_cast<std::uint32_t>(length);
}

void store_stage(const TrellisLayout& layout, const StageWords& stage,
                 std::span<std::uint32_t> area) {
  store_paths(layout, stage.paths, area);
  area[layout.received()] = stage.received_pair;
  area[layout.schedule()] = stage.schedule_mask;
}

StageWords load_stage(const TrellisLayout& layout, std::span<const std::uint32_t> area) {
  if (area.size() < layout.size()) throw std::out_of_range("trellis area too small");
  StageWords out;
  const std::uint32_t n = layout.n_states;
  const std::uint32_t length = area[layout.length()];
  if (length > kMaxHistoryBits) throw std::length_error("stored history length exceeds a word");
  out.paths.weight.resize(n);
  out.paths.alive.resize(n);
  out.paths.history.resize(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    const bool alive = area[layout.alive(s)] != 0;
    out.paths.alive[s] = alive ? 1 : 0;
    out.paths.weight[s] = alive ? area[layout.weight(s)] : convcode::kDeadWeight;
    if (alive) {
      const std::uint32_t packed = area[layout.history(s)];
      for (std::uint32_t i = 0; i < length; ++i) {
        out.paths.history[s].push_back(static_cast<std::uint8_t>((packed >> (length - 1 - i)) & 1u));
      }
    }
  }
  out.received_pair = static_cast<std::uint8_t>(area[layout.received()] & 3u);
  out.schedule_mask = area[layout.schedule()];
  return out;
}

}  // namespace texpand
