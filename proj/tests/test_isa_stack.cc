#include <stdexcept>

#include "doctest.h"
#include "support.h"
#include "texpand/isa_stack.h"

using namespace texpand;
namespace stk = texpand::isa::stack;

namespace {

micro::MachineState run_source(const isa::Profile& p, const std::string& source) {
  const auto image = assembler::assemble(source, p);
  auto state = p.make_state();
  assembler::load(image, p, state);
  micro::run(state, p.store, 1'000'000);
  return state;
}

std::uint32_t local(const micro::MachineState& s, std::uint32_t n) {
  return s.memory()[stk::kFrameBase + n];
}

std::int64_t depth(const micro::MachineState& s) {
  return static_cast<std::int64_t>(s.reg("sp")) - (static_cast<std::int64_t>(stk::kStackBase) - 1);
}

constexpr const char* kTexpandProgram = R"(
    bipush 2048
    texpand
    halt
)";

}  // namespace

TEST_CASE("stack machine routine lengths") {
  const auto p = stk::make_base_profile();
  auto lines = [&](const char* m) { return p.store.find(m)->routine.lines.size(); };
  CHECK(p.store.fetch().lines.size() == 1);
  for (const char* m : {"iadd", "isub", "iand", "ior", "ixor", "ishl", "iushr"}) CHECK(lines(m) == 3);
  CHECK(lines("iload") == 3);
  CHECK(lines("istore") == 5);
  CHECK(lines("bipush") == 2);
  CHECK(lines("dup") == 2);
  CHECK(lines("pop") == 2);
  CHECK(lines("swap") == 6);
  CHECK(lines("goto") == 1);
  CHECK(lines("ifeq") == 5);
  CHECK(lines("iflt") == 5);
  CHECK(lines("if_icmplt") == 5);
  CHECK(lines("jsr") == 3);
  CHECK(lines("ret") == 3);
}

TEST_CASE("reset state") {
  const auto s = stk::make_base_profile().make_state();
  CHECK(s.reg("lv") == stk::kFrameBase);
  CHECK(depth(s) == 0);
}

TEST_CASE("arithmetic and local variables") {
  const auto s = run_source(stk::make_base_profile(), R"(
    bipush 7
    bipush -3
    iadd
    istore 0        ; 4
    bipush 7
    bipush 10
    isub
    istore 1        ; -3
    bipush 12
    bipush 10
    iand
    istore 2        ; 8
    bipush 12
    bipush 3
    ior
    istore 3        ; 15
    bipush 12
    bipush 10
    ixor
    istore 4        ; 6
    bipush 3
    bipush 4
    ishl
    istore 5        ; 48
    bipush -1
    bipush 28
    iushr
    istore 6        ; 15
    bipush 1
    bipush 2
    swap
    isub
    istore 7        ; 2 - 1
    bipush 9
    dup
    iadd
    istore 8        ; 18
    bipush 5
    bipush 6
    pop
    istore 9        ; 5
    iload 8
    iload 9
    iadd
    istore 10       ; 23
    halt
)");
  CHECK(s.halt_reason() == micro::HaltReason::kHalted);
  CHECK(local(s, 0) == 4);
  CHECK(static_cast<std::int32_t>(local(s, 1)) == -3);
  CHECK(local(s, 2) == 8);
  CHECK(local(s, 3) == 15);
  CHECK(local(s, 4) == 6);
  CHECK(local(s, 5) == 48);
  CHECK(local(s, 6) == 15);
  CHECK(local(s, 7) == 1);
  CHECK(local(s, 8) == 18);
  CHECK(local(s, 9) == 5);
  CHECK(local(s, 10) == 23);
  CHECK(depth(s) == 0);
}

TEST_CASE("branches, calls and returns") {
  const auto s = run_source(stk::make_base_profile(), R"(
        bipush 0
        istore 0          ; sum
        bipush 4
        istore 1          ; counter
loop:   iload 0
        iload 1
        iadd
        istore 0
        iload 1
        bipush 1
        isub
        dup
        istore 1
        ifeq out
        goto loop
out:    bipush -5
        iflt neg
        bipush 111
        istore 2
neg:    bipush 2
        bipush 3
        if_icmplt less
        bipush 111
        istore 3
less:   bipush 3
        bipush 2
        if_icmplt wrong
        jsr sub
        halt
wrong:  bipush 99
        istore 3
        halt
sub:    istore 16
        bipush 42
        istore 4
        ret 16
)");
  CHECK(s.halt_reason() == micro::HaltReason::kHalted);
  CHECK(local(s, 0) == 10);
  CHECK(local(s, 2) == 0);
  CHECK(local(s, 3) == 0);
  CHECK(local(s, 4) == 42);
  CHECK(depth(s) == 0);
}

TEST_CASE("underflow is detected before any microinstruction runs") {
  const auto p = stk::make_base_profile();
  for (const char* src : {"pop\nhalt\n", "bipush 1\niadd\nhalt\n", "istore 0\nhalt\n",
                          "bipush 1\nswap\nhalt\n", "ifeq 0\nhalt\n"}) {
    const auto s = run_source(p, src);
    CHECK_MESSAGE(s.halt_reason() == micro::HaltReason::kStackUnderflow, src);
  }
  const auto s = run_source(stk::make_profile(), "texpand\nhalt\n");
  CHECK(s.halt_reason() == micro::HaltReason::kStackUnderflow);
}

TEST_CASE("stack depth follows each instruction's signature") {
  const auto p = stk::make_base_profile();
  std::mt19937 gen(99);
  const std::vector<std::string> ops = {"bipush 3", "iload 2", "istore 3", "pop", "dup", "swap",
                                        "iadd",     "isub",    "iand",     "ior", "ixor", "nop"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string src;
    std::int64_t model = 0;
    for (int i = 0; i < 40; ++i) {
      const std::string& op = ops[gen() % ops.size()];
      const auto* def = p.store.find(op.substr(0, op.find(' ')));
      if (model < def->stack->pops) continue;
      model += def->stack->pushes - def->stack->pops;
      src += op + "\n";
    }
    src += "halt\n";
    const auto s = run_source(p, src);
    REQUIRE(s.halt_reason() == micro::HaltReason::kHalted);
    CHECK(depth(s) == model);
  }
}

TEST_CASE("texpand differential against acs_step, both encoders") {
  std::mt19937 gen(0x57AC);
  for (const auto& spec : {convcode::kWorkedExampleSpec, convcode::kStandardSpec}) {
    const auto profile = stk::make_profile(spec);
    const auto trellis = convcode::build_trellis(spec);
    for (int i = 0; i < 300; ++i) {
      const auto stage = testing::random_stage(gen, trellis.n_states);
      const auto out = testing::trellis_step_matches(profile, kTexpandProgram, trellis, stage,
                                                     micro::HaltReason::kMicroFault);
      REQUIRE_MESSAGE(out.matches, "case " << i << ": " << out.explanation);
    }
  }
}

TEST_CASE("texpand consumes its operand") {
  const auto profile = stk::make_profile();
  auto state = profile.make_state();
  const auto image = assembler::assemble("bipush 7\nbipush 2048\ntexpand\nhalt\n", profile);
  assembler::load(image, profile, state);
  store_stage(TrellisLayout{4}, {convcode::PathState::initial(4), 0, 0b1111},
              std::span(state.memory()).subspan(0x800, 15));
  micro::run(state, profile.store);
  CHECK(state.halt_reason() == micro::HaltReason::kHalted);
  CHECK(depth(state) == 1);
  CHECK(state.reg("tos") == 7);
}
