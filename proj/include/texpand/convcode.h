#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace texpand::convcode {

// One bit per element, value 0 or 1. Index 0 is the first transmitted bit.
using BitVec = std::vector<std::uint8_t>;

// Accepts "10 01 11" and "100111"; any character other than '0', '1' or
// whitespace is rejected.
BitVec parse_bits(std::string_view text);

// Formats bits, inserting a space every `group` bits (0 = no grouping).
std::string format_bits(const BitVec& bits, std::size_t group = 2);

// Rate-1/2 feed-forward encoder. Tap masks index the shift register with
// bit 0 = current input u, bit i = memory cell m_i (i = 1..K-1).
struct EncoderSpec {
  int constraint_length = 3;
  std::uint32_t taps_v1 = 0;
  std::uint32_t taps_v2 = 0;

  int memory_cells() const { return constraint_length - 1; }
  std::uint32_t n_states() const { return 1u << memory_cells(); }
  void validate() const;

  friend bool operator==(const EncoderSpec&, const EncoderSpec&) = default;
};

// The worked-example encoder: V1 = u ^ m1, V2 = m1. Recovered by an exhaustive
// tap search over (u, m1, m2) for 110100 -> 10 01 11 10 11 00 (see
// find_matching_taps); it is the only pair that fits.
inline constexpr EncoderSpec kWorkedExampleSpec{3, 0b011, 0b010};

// Standard K=3 (7,5) octal code: V1 = u ^ m1 ^ m2, V2 = u ^ m2.
inline constexpr EncoderSpec kStandardSpec{3, 0b111, 0b101};

// Every nonzero tap pair of constraint length K that encodes `data` into
// `codeword`.
std::vector<EncoderSpec> find_matching_taps(int constraint_length,
                                            const BitVec& data,
                                            const BitVec& codeword);

// Starts from the all-zero state. Flush bits are the caller's business.
BitVec encode(const EncoderSpec& spec, const BitVec& data);

// Positions are 1-based. Throws std::out_of_range naming the bad index.
BitVec flip_bits(const BitVec& codeword, const std::set<std::size_t>& positions);

// States are numbered with m1 as the most significant bit, so the successor
// of state s on input u is (u << (K-2)) | (s >> 1).
struct Edge {
  std::uint32_t next = 0;
  std::uint8_t output = 0;  // (V1 << 1) | V2
};

struct Predecessor {
  std::uint32_t state = 0;
  std::uint8_t input = 0;
  std::uint8_t output = 0;
};

struct Trellis {
  int constraint_length = 0;
  std::uint32_t n_states = 0;
  std::vector<std::array<Edge, 2>> edges;          // [state][input]
  std::vector<std::array<Predecessor, 2>> preds;   // [state], ascending state
};

Trellis build_trellis(const EncoderSpec& spec);

// Hamming distance between two 2-bit pairs.
int branch_metric(std::uint8_t received_pair, std::uint8_t edge_output);

// Weight assigned to states with no surviving path.
inline constexpr std::uint32_t kDeadWeight = 0x7FFFFFFF;

struct PathState {
  std::vector<std::uint32_t> weight;
  std::vector<BitVec> history;  // empty for dead states
  std::vector<std::uint8_t> alive;

  static PathState initial(std::uint32_t n_states);
  std::size_t alive_count() const;

  friend bool operator==(const PathState&, const PathState&) = default;
};

// Destination states a stage may write. A default-constructed schedule of
// the right size admits everything.
struct StageSchedule {
  std::vector<std::uint8_t> admissible;

  static StageSchedule all(std::uint32_t n_states);
  static StageSchedule from_mask(std::uint32_t n_states, std::uint32_t mask);
  std::uint32_t mask() const;
};

// Admissible states for stage `stage` (0-based) of `n_stages` so that every
// surviving path can still be driven to state 0 by flush zeros.
StageSchedule termination_schedule(const Trellis& trellis, std::size_t stage,
                                   std::size_t n_stages);

// One add-compare-select step. Ties go to the lower-numbered predecessor.
// Throws std::runtime_error when no admissible state has a live predecessor.
PathState acs_step(const Trellis& trellis, const PathState& paths,
                   std::uint8_t received_pair, const StageSchedule& schedule);

struct DecodeResult {
  BitVec bits;
  std::uint32_t weight = 0;
  std::size_t acs_calls = 0;        // one per trellis stage
  std::size_t node_expansions = 0;  // surviving states written, all stages
};

DecodeResult viterbi_decode_detailed(const EncoderSpec& spec, const BitVec& received);

BitVec viterbi_decode(const EncoderSpec& spec, const BitVec& received);

}  // namespace texpand::convcode
