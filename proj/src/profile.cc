#include "texpand/profile.h"

#include <sstream>
#include <stdexcept>

namespace texpand::isa {

const char* to_string(ProfileId id) {
  return id == ProfileId::kRegister ? "register" : "stack";
}

ProfileId parse_profile(std::string_view name) {
  if (name == "register") return ProfileId::kRegister;
  if (name == "stack") return ProfileId::kStack;
  throw std::invalid_argument("unknown profile '" + std::string(name) +
                              "' (expected register or stack)");
}

micro::MachineState Profile::make_state() const {
  micro::MachineState s(regs, memory_words);
  for (auto [reg, value] : reset_values) s.set_reg(reg, value);
  return s;
}

std::vector<std::string> texpand_scratch_registers() {
  std::vector<std::string> names = {"tbase", "tsched", "tt", "tc", "tm0", "tm1", "tm2", "tm3"};
  for (const char* prefix : {"tw", "th", "ta"}) {
    for (std::uint32_t i = 0; i < kTexpandMaxStates; ++i) {
      names.push_back(prefix + std::to_string(i));
    }
  }
  return names;
}

std::string texpand_body_source(const TrellisLayout& layout, const convcode::Trellis& trellis,
                                std::string_view base) {
  const std::uint32_t n = trellis.n_states;
  if (n != layout.n_states) throw std::invalid_argument("layout and trellis disagree on states");
  if (n > kTexpandMaxStates) {
    throw std::invalid_argument("TEXPAND supports at most " + std::to_string(kTexpandMaxStates) +
                                " states");
  }
  const std::string b(base);
  const std::string inf = "#0x7FFFFFFF";
  std::ostringstream o;
  auto at = [&](std::uint32_t offset) { return "mar <- " + b + " + #" + std::to_string(offset) + "; rd"; };

  // Branch metric for each of the four possible edge outputs.
  o << "  " << at(layout.received()) << "\n"
    << "  tt <- mdr >> #1\n"
    << "  tc <- mdr & #1\n"
    << "  tm0 <- tt + tc\n"
    << "  tm3 <- #2 - tm0\n"
    << "  tm1 <- tt - tc\n"
    << "  tm1 <- tm1 + #1\n"
    << "  tm2 <- #2 - tm1\n"
    << "  " << at(layout.schedule()) << "\n"
    << "  tsched <- mdr\n";

  for (std::uint32_t d = 0; d < n; ++d) {
    const auto& p0 = trellis.preds[d][0];
    const auto& p1 = trellis.preds[d][1];
    const std::string ds = std::to_string(d);
    const std::string w = "tw" + ds, h = "th" + ds, a = "ta" + ds;
    o << "  " << w << " <- " << inf << "; " << h << " <- #0; " << a << " <- #0\n"
      << "  tt <- tsched & #" << (1u << d) << "; if zero(tt) goto next" << ds << "\n"
      // first predecessor
      << "  " << at(layout.alive(p0.state)) << "\n"
      << "  if zero(mdr) goto second" << ds << "\n"
      << "  " << at(layout.weight(p0.state)) << "\n"
      << "  " << w << " <- mdr + tm" << int(p0.output) << "\n"
      << "  " << at(layout.history(p0.state)) << "\n"
      << "  " << h << " <- mdr\n"
      // second predecessor replaces only on a strictly smaller weight
      << "second" << ds << ":\n"
      << "  " << at(layout.alive(p1.state)) << "\n"
      << "  if zero(mdr) goto chosen" << ds << "\n"
      << "  " << at(layout.weight(p1.state)) << "\n"
      << "  tc <- mdr + tm" << int(p1.output) << "\n"
      << "  tt <- cmp(tc, " << w << "); if zero(tt) goto chosen" << ds << "\n"
      << "  " << w << " <- tc\n"
      << "  " << at(layout.history(p1.state)) << "\n"
      << "  " << h << " <- mdr\n"
      << "chosen" << ds << ":\n"
      << "  tt <- cmp(" << w << ", " << inf << "); if zero(tt) goto next" << ds << "\n"
      << "  " << h << " <- " << h << " << #1\n";
    // Both predecessors of d enter on the same input bit.
    if (p0.input) o << "  " << h << " <- " << h << " | #1\n";
    o << "  " << a << " <- #1\n"
      << "next" << ds << ":\n";
  }

  for (std::uint32_t d = 1; d < n; ++d) {
    o << "  tt <- " << (d == 1 ? std::string("ta0") : std::string("tt")) << " | ta" << d;
    if (d + 1 == n) o << "; if zero(tt) goto fail";
    o << "\n";
  }
  for (std::uint32_t d = 0; d < n; ++d) {
    const std::string ds = std::to_string(d);
    o << "  mar <- " << b << " + #" << layout.weight(d) << "; mdr <- tw" << ds << "; wr\n"
      << "  mar <- " << b << " + #" << layout.alive(d) << "; mdr <- ta" << ds << "; wr\n"
      << "  mar <- " << b << " + #" << layout.history(d) << "; mdr <- th" << ds << "; wr\n";
  }
  o << "  " << at(layout.length()) << "\n"
    << "  mdr <- mdr + #1; wr; end\n"
    << "fail:\n"
    << "  fault no surviving path\n";
  return o.str();
}

}  // namespace texpand::isa
