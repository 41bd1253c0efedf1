#include "texpand/convcode.h"

#include <bit>
#include <stdexcept>
#include <string>

namespace texpand::convcode {

namespace {

std::uint8_t parity(std::uint32_t x) { return std::popcount(x) & 1u; }

// Shift-register word for state s and input u: bit 0 = u, bit i = m_i.
std::uint32_t register_word(int memory_cells, std::uint32_t state, std::uint8_t u) {
  std::uint32_t word = u & 1u;
  for (int i = 1; i <= memory_cells; ++i) {
    const std::uint32_t m_i = (state >> (memory_cells - i)) & 1u;
    word |= m_i << i;
  }
  return word;
}

std::uint8_t pair_at(const BitVec& bits, std::size_t stage) {
  return static_cast<std::uint8_t>((bits[2 * stage] << 1) | bits[2 * stage + 1]);
}

}  // namespace

BitVec parse_bits(std::string_view text) {
  BitVec bits;
  bits.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (c != ' ' && c != '\t' && c != '\n' && c != '\r') {
      throw std::invalid_argument("bad bit character '" + std::string(1, c) +
                                  "' at offset " + std::to_string(i));
    }
  }
  return bits;
}

std::string format_bits(const BitVec& bits, std::size_t group) {
  std::string out;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (group != 0 && i != 0 && i % group == 0) out.push_back(' ');
    out.push_back(bits[i] ? '1' : '0');
  }
  return out;
}

void EncoderSpec::validate() const {
  if (constraint_length < 2 || constraint_length > 16) {
    throw std::invalid_argument("constraint length must be in 2..16, got " +
                                std::to_string(constraint_length));
  }
  const std::uint32_t limit = 1u << constraint_length;
  if (taps_v1 >= limit || taps_v2 >= limit) {
    throw std::invalid_argument("tap mask wider than constraint length");
  }
  if (taps_v1 == 0 && taps_v2 == 0) {
    throw std::invalid_argument("at least one tap mask must be nonzero");
  }
}

std::vector<EncoderSpec> find_matching_taps(int constraint_length, const BitVec& data,
                                            const BitVec& codeword) {
  std::vector<EncoderSpec> found;
  const std::uint32_t limit = 1u << constraint_length;
  for (std::uint32_t t1 = 0; t1 < limit; ++t1) {
    for (std::uint32_t t2 = 0; t2 < limit; ++t2) {
      if (t1 == 0 && t2 == 0) continue;
      const EncoderSpec spec{constraint_length, t1, t2};
      if (encode(spec, data) == codeword) found.push_back(spec);
    }
  }
  return found;
}

BitVec encode(const EncoderSpec& spec, const BitVec& data) {
  spec.validate();
  const Trellis trellis = build_trellis(spec);
  BitVec out;
  out.reserve(data.size() * 2);
  std::uint32_t state = 0;
  for (std::uint8_t u : data) {
    const Edge& e = trellis.edges[state][u & 1u];
    out.push_back(static_cast<std::uint8_t>(e.output >> 1));
    out.push_back(static_cast<std::uint8_t>(e.output & 1u));
    state = e.next;
  }
  return out;
}

BitVec flip_bits(const BitVec& codeword, const std::set<std::size_t>& positions) {
  BitVec out = codeword;
  for (std::size_t pos : positions) {
    if (pos < 1 || pos > out.size()) {
      throw std::out_of_range("bit position " + std::to_string(pos) +
                              " outside 1.." + std::to_string(out.size()));
    }
    out[pos - 1] ^= 1u;
  }
  return out;
}

Trellis build_trellis(const EncoderSpec& spec) {
  spec.validate();
  Trellis t;
  t.constraint_length = spec.constraint_length;
  t.n_states = spec.n_states();
  const int cells = spec.memory_cells();
  t.edges.resize(t.n_states);
  t.preds.resize(t.n_states);
  std::vector<int> filled(t.n_states, 0);
  for (std::uint32_t s = 0; s < t.n_states; ++s) {
    for (std::uint8_t u = 0; u < 2; ++u) {
      const std::uint32_t word = register_word(cells, s, u);
      Edge e;
      e.output = static_cast<std::uint8_t>((parity(word & spec.taps_v1) << 1) |
                                           parity(word & spec.taps_v2));
      e.next = (static_cast<std::uint32_t>(u) << (cells - 1)) | (s >> 1);
      t.edges[s][u] = e;
      t.preds[e.next][filled[e.next]++] = Predecessor{s, u, e.output};
    }
  }
  return t;
}

int branch_metric(std::uint8_t received_pair, std::uint8_t edge_output) {
  return std::popcount(static_cast<unsigned>((received_pair ^ edge_output) & 0b11u));
}

PathState PathState::initial(std::uint32_t n_states) {
  PathState p;
  p.weight.assign(n_states, kDeadWeight);
  p.history.assign(n_states, {});
  p.alive.assign(n_states, 0);
  p.weight[0] = 0;
  p.alive[0] = 1;
  return p;
}

std::size_t PathState::alive_count() const {
  std::size_t n = 0;
  for (auto a : alive) n += a ? 1 : 0;
  return n;
}

StageSchedule StageSchedule::all(std::uint32_t n_states) {
  return StageSchedule{std::vector<std::uint8_t>(n_states, 1)};
}

StageSchedule StageSchedule::from_mask(std::uint32_t n_states, std::uint32_t mask) {
  StageSchedule s;
  s.admissible.resize(n_states);
  for (std::uint32_t i = 0; i < n_states; ++i) s.admissible[i] = (mask >> i) & 1u;
  return s;
}

std::uint32_t StageSchedule::mask() const {
  if (admissible.size() > 32) throw std::length_error("schedule wider than a word");
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < admissible.size(); ++i) {
    if (admissible[i]) m |= 1u << i;
  }
  return m;
}

StageSchedule termination_schedule(const Trellis& trellis, std::size_t stage,
                                   std::size_t n_stages) {
  if (stage >= n_stages) throw std::out_of_range("stage beyond trellis length");
  const std::size_t remaining = n_stages - 1 - stage;
  const std::size_t cells = static_cast<std::size_t>(trellis.constraint_length - 1);
  StageSchedule s = StageSchedule::all(trellis.n_states);
  if (remaining < cells) {
    // Zero inputs shift the state right one cell per stage.
    for (std::uint32_t st = 0; st < trellis.n_states; ++st) {
      s.admissible[st] = (st >> remaining) == 0 ? 1 : 0;
    }
  }
  return s;
}

PathState acs_step(const Trellis& trellis, const PathState& paths,
                   std::uint8_t received_pair, const StageSchedule& schedule) {
  const std::uint32_t n = trellis.n_states;
  if (paths.weight.size() != n || paths.alive.size() != n || paths.history.size() != n ||
      schedule.admissible.size() != n) {
    throw std::invalid_argument("path state / schedule size does not match trellis");
  }
  PathState next;
  next.weight.assign(n, kDeadWeight);
  next.history.assign(n, {});
  next.alive.assign(n, 0);
  for (std::uint32_t d = 0; d < n; ++d) {
    if (!schedule.admissible[d]) continue;
    const Predecessor* best = nullptr;
    std::uint32_t best_weight = kDeadWeight;
    for (const Predecessor& p : trellis.preds[d]) {
      if (!paths.alive[p.state]) continue;
      const std::uint32_t w =
          paths.weight[p.state] + static_cast<std::uint32_t>(branch_metric(received_pair, p.output));
      if (best == nullptr || w < best_weight) {
        best = &p;
        best_weight = w;
      }
    }
    if (best == nullptr) continue;
    next.weight[d] = best_weight;
    next.alive[d] = 1;
    next.history[d] = paths.history[best->state];
    next.history[d].push_back(best->input);
  }
  if (next.alive_count() == 0) {
    throw std::runtime_error("acs step: no admissible state has a live predecessor");
  }
  return next;
}

DecodeResult viterbi_decode_detailed(const EncoderSpec& spec, const BitVec& received) {
  spec.validate();
  if (received.size() % 2 != 0) {
    throw std::invalid_argument("received word has odd length " +
                                std::to_string(received.size()));
  }
  const std::size_t min_len = 2 * static_cast<std::size_t>(spec.memory_cells());
  if (received.size() < min_len) {
    throw std::invalid_argument("received word shorter than termination requires (" +
                                std::to_string(received.size()) + " < " +
                                std::to_string(min_len) + ")");
  }
  const Trellis trellis = build_trellis(spec);
  const std::size_t stages = received.size() / 2;
  PathState paths = PathState::initial(trellis.n_states);
  DecodeResult result;
  for (std::size_t t = 0; t < stages; ++t) {
    paths = acs_step(trellis, paths, pair_at(received, t),
                     termination_schedule(trellis, t, stages));
    ++result.acs_calls;
    result.node_expansions += paths.alive_count();
  }
  // Termination leaves state 0 as the only admissible end state.
  result.bits = paths.history[0];
  result.weight = paths.weight[0];
  return result;
}

BitVec viterbi_decode(const EncoderSpec& spec, const BitVec& received) {
  return viterbi_decode_detailed(spec, received).bits;
}

}  // namespace texpand::convcode
