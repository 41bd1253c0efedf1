#include "texpand/bench.h"

#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <stdexcept>

namespace texpand::bench {

namespace {

using nlohmann::json;
using workloads::Variant;

constexpr std::uint64_t kReferenceCalls = 19;
constexpr std::size_t kReferenceRegisterFunctionSize = 63;
constexpr std::size_t kReferenceStackFunctionSize = 41;

std::uint64_t calls_made(const micro::Counters& c, const isa::Profile& profile,
                         const workloads::WorkloadConfig& cfg) {
  std::uint32_t opcode = isa::kTexpandOpcode;
  if (cfg.variant == Variant::kAssemblyFunction) {
    const char* call = cfg.profile == isa::ProfileId::kRegister ? "JAL" : "jsr";
    opcode = profile.store.find(call)->opcode;
  }
  auto it = c.per_opcode.find(opcode);
  return it == c.per_opcode.end() ? 0 : it->second.executed;
}

std::vector<std::string> standard_notes(const BenchReport& report) {
  std::vector<std::string> notes;
  const auto d = convcode::viterbi_decode_detailed(
      report.spec, workloads::received_word(report.spec, 12, report.seed));
  std::ostringstream calls;
  calls << "12-bit decode: " << d.acs_calls << " trellis-step calls (one per stage), "
        << d.node_expansions << " surviving-state expansions; the cost-model presets use "
        << kReferenceCalls << " calls";
  notes.push_back(calls.str());
  std::ostringstream sizes;
  sizes << "static size of the assembly trellis subroutine: register "
        << workloads::trellis_function_size(isa::ProfileId::kRegister, report.spec)
        << " instructions (reference " << kReferenceRegisterFunctionSize << "), stack "
        << workloads::trellis_function_size(isa::ProfileId::kStack, report.spec)
        << " instructions (reference " << kReferenceStackFunctionSize << ")";
  notes.push_back(sizes.str());
  notes.push_back(
      "improvement percentages are truncated to one decimal: (baseline - custom) / custom * 100");
  notes.push_back(
      "cost model: the nios2-s baseline repeats the nios2-f figure (59 cycles per call, 1121 "
      "total) as tabulated; it is reproduced unchanged");
  return notes;
}

json run_to_json(const RunResult& r) {
  return {{"profile", r.profile},
          {"variant", r.variant},
          {"n_bits", r.n_bits},
          {"assembly_instructions", r.assembly_instructions},
          {"microinstructions", r.microinstructions},
          {"fetch_steps", r.fetch_steps},
          {"total_micro", r.total_micro},
          {"cycles", r.cycles},
          {"calls", r.calls},
          {"expected_calls", r.expected_calls},
          {"decoded_ok", r.decoded_ok},
          {"halt", r.halt},
          {"detail", r.detail}};
}

RunResult run_from_json(const json& j) {
  RunResult r;
  r.profile = j.at("profile").get<std::string>();
  r.variant = j.at("variant").get<std::string>();
  r.n_bits = j.at("n_bits").get<std::size_t>();
  r.assembly_instructions = j.at("assembly_instructions").get<std::uint64_t>();
  r.microinstructions = j.at("microinstructions").get<std::uint64_t>();
  r.fetch_steps = j.at("fetch_steps").get<std::uint64_t>();
  r.total_micro = j.at("total_micro").get<std::uint64_t>();
  r.cycles = j.at("cycles").get<std::uint64_t>();
  r.calls = j.at("calls").get<std::uint64_t>();
  r.expected_calls = j.at("expected_calls").get<std::uint64_t>();
  r.decoded_ok = j.at("decoded_ok").get<bool>();
  r.halt = j.at("halt").get<std::string>();
  r.detail = j.at("detail").get<std::string>();
  return r;
}

json pair_to_json(const PairResult& p) {
  return {{"profile", p.profile},
          {"n_bits", p.n_bits},
          {"cycles_baseline", p.cycles_baseline},
          {"cycles_custom", p.cycles_custom},
          {"improvement_tenths", p.improvement_tenths},
          {"improvement_pct", p.improvement_pct},
          {"speedup", p.speedup},
          {"valid", p.valid}};
}

PairResult pair_from_json(const json& j) {
  PairResult p;
  p.profile = j.at("profile").get<std::string>();
  p.n_bits = j.at("n_bits").get<std::size_t>();
  p.cycles_baseline = j.at("cycles_baseline").get<std::uint64_t>();
  p.cycles_custom = j.at("cycles_custom").get<std::uint64_t>();
  p.improvement_tenths = j.at("improvement_tenths").get<std::int64_t>();
  p.improvement_pct = j.at("improvement_pct").get<std::string>();
  p.speedup = j.at("speedup").get<double>();
  p.valid = j.at("valid").get<bool>();
  return p;
}

std::string render_csv(const BenchReport& report) {
  std::ostringstream o;
  o << "profile,variant,n_bits,assembly_instructions,microinstructions,fetch_steps,total_micro,"
       "cycles,calls,expected_calls,decoded_ok,halt\n";
  for (const RunResult& r : report.runs) {
    o << r.profile << ',' << r.variant << ',' << r.n_bits << ',' << r.assembly_instructions << ','
      << r.microinstructions << ',' << r.fetch_steps << ',' << r.total_micro << ',' << r.cycles
      << ',' << r.calls << ',' << r.expected_calls << ',' << (r.decoded_ok ? "true" : "false")
      << ',' << r.halt << '\n';
  }
  return o.str();
}

std::string render_plotdat(const BenchReport& report) {
  std::ostringstream o;
  std::vector<std::string> order;
  std::map<std::string, std::vector<const PairResult*>> by_profile;
  for (const PairResult& p : report.pairs) {
    if (!by_profile.count(p.profile)) order.push_back(p.profile);
    by_profile[p.profile].push_back(&p);
  }
  bool first = true;
  for (const std::string& profile : order) {
    if (!first) o << "\n\n";  // gnuplot data-block separator
    first = false;
    o << "# " << profile << "\n"
      << "# n_bits cycles_baseline cycles_custom\n";
    for (const PairResult* p : by_profile[profile]) {
      o << p->n_bits << ' ' << p->cycles_baseline << ' ' << p->cycles_custom << '\n';
    }
  }
  return o.str();
}

CostModelParams microcoded(std::uint64_t base_ai, std::uint64_t base_mi, std::uint64_t custom_ai,
                           std::uint64_t custom_mi) {
  CostModelParams p;
  p.mode = CostModelParams::Mode::kMicrocoded;
  p.calls = kReferenceCalls;
  p.baseline = {base_ai, base_mi, 1};
  p.custom = {custom_ai, custom_mi, 1};
  p.cycles_per_micro = 4;
  return p;
}

CostModelParams per_call(std::uint64_t baseline, std::uint64_t custom) {
  CostModelParams p;
  p.mode = CostModelParams::Mode::kPerCallCycles;
  p.calls = kReferenceCalls;
  p.baseline_cycles_per_call = baseline;
  p.custom_cycles_per_call = custom;
  return p;
}

}  // namespace

std::int64_t improvement_tenths(std::uint64_t baseline, std::uint64_t custom) {
  if (custom == 0) throw std::invalid_argument("custom cycle count is zero");
  const auto b = static_cast<std::int64_t>(baseline);
  const auto c = static_cast<std::int64_t>(custom);
  return (b - c) * 1000 / c;
}

std::string format_tenths(std::int64_t tenths) {
  const bool negative = tenths < 0;
  const std::int64_t mag = negative ? -tenths : tenths;
  return (negative ? "-" : "") + std::to_string(mag / 10) + "." + std::to_string(mag % 10);
}

std::string format_whole(std::int64_t tenths) { return std::to_string(tenths / 10); }

bool BenchReport::all_decoded() const {
  for (const RunResult& r : runs) {
    if (!r.decoded_ok) return false;
  }
  return true;
}

bool BenchReport::any_fault() const {
  for (const RunResult& r : runs) {
    if (r.faulted()) return true;
  }
  return false;
}

RunResult run_workload(const workloads::WorkloadConfig& cfg, std::uint64_t max_cycles) {
  const auto program = workloads::gen_program(cfg);
  const isa::Profile profile = workloads::profile_for(cfg);
  const auto image = workloads::assemble_program(cfg, program, profile);
  micro::MachineState state = profile.make_state();
  assembler::load(image, profile, state);
  const micro::ExecStats stats = micro::run(state, profile.store, max_cycles);

  RunResult r;
  r.profile = isa::to_string(cfg.profile);
  r.variant = workloads::to_string(cfg.variant);
  r.n_bits = cfg.n_received_bits;
  r.assembly_instructions = stats.counters.assembly_instructions;
  r.microinstructions = stats.counters.microinstructions;
  r.fetch_steps = stats.counters.fetch_microsteps;
  r.total_micro = stats.counters.total_micro();
  r.cycles = stats.counters.cycles;
  r.calls = calls_made(stats.counters, profile, cfg);
  r.expected_calls = program.expected_calls;
  r.halt = micro::to_string(stats.reason);
  r.detail = stats.detail;
  r.decoded_ok = stats.reason == micro::HaltReason::kHalted &&
                 workloads::read_output(state, cfg) == program.expected_output;
  return r;
}

std::vector<workloads::WorkloadConfig> default_configs(const std::vector<std::size_t>& sizes,
                                                       const convcode::EncoderSpec& spec,
                                                       std::uint32_t seed) {
  std::vector<workloads::WorkloadConfig> configs;
  for (auto profile : {isa::ProfileId::kRegister, isa::ProfileId::kStack}) {
    for (std::size_t n : sizes) {
      for (auto variant : {Variant::kAssemblyFunction, Variant::kTexpand}) {
        configs.push_back(workloads::make_config(profile, variant, n, spec, seed));
      }
    }
  }
  return configs;
}

BenchReport run_benchmark(const std::vector<workloads::WorkloadConfig>& configs,
                          const BenchOptions& options) {
  if (configs.empty()) throw std::invalid_argument("no benchmark configurations");
  for (const auto& cfg : configs) cfg.validate();

  BenchReport report;
  report.seed = options.seed;
  report.spec = configs.front().spec;
  report.runs.resize(configs.size());
  if (options.parallel) {
    std::vector<std::future<RunResult>> futures;
    for (const auto& cfg : configs) {
      futures.push_back(std::async(std::launch::async, [&cfg, &options] {
        return run_workload(cfg, options.max_cycles);
      }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) report.runs[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < configs.size(); ++i) {
      report.runs[i] = run_workload(configs[i], options.max_cycles);
    }
  }

  for (const RunResult& base : report.runs) {
    if (base.variant != workloads::to_string(Variant::kAssemblyFunction)) continue;
    for (const RunResult& custom : report.runs) {
      if (custom.variant != workloads::to_string(Variant::kTexpand) ||
          custom.profile != base.profile || custom.n_bits != base.n_bits) {
        continue;
      }
      PairResult p;
      p.profile = base.profile;
      p.n_bits = base.n_bits;
      p.cycles_baseline = base.cycles;
      p.cycles_custom = custom.cycles;
      p.valid = base.decoded_ok && custom.decoded_ok;
      if (custom.cycles > 0) {
        p.improvement_tenths = improvement_tenths(base.cycles, custom.cycles);
        p.improvement_pct = format_tenths(p.improvement_tenths);
        p.speedup = static_cast<double>(base.cycles) / static_cast<double>(custom.cycles);
      }
      report.pairs.push_back(p);
      break;
    }
  }
  report.notes = standard_notes(report);
  return report;
}

Format parse_format(std::string_view name) {
  if (name == "json") return Format::kJson;
  if (name == "csv") return Format::kCsv;
  if (name == "plotdat") return Format::kPlotdat;
  throw std::invalid_argument("unknown format '" + std::string(name) +
                              "' (expected json, csv or plotdat)");
}

json to_json(const BenchReport& report) {
  json j;
  j["schema"] = report.schema;
  j["seed"] = report.seed;
  j["encoder"] = {{"constraint_length", report.spec.constraint_length},
                  {"taps_v1", report.spec.taps_v1},
                  {"taps_v2", report.spec.taps_v2}};
  j["runs"] = json::array();
  for (const RunResult& r : report.runs) j["runs"].push_back(run_to_json(r));
  j["pairs"] = json::array();
  for (const PairResult& p : report.pairs) j["pairs"].push_back(pair_to_json(p));
  j["notes"] = report.notes;
  return j;
}

BenchReport report_from_json(const json& j) {
  BenchReport report;
  report.schema = j.at("schema").get<int>();
  if (report.schema != kReportSchema) {
    throw std::invalid_argument("unsupported report schema " + std::to_string(report.schema));
  }
  report.seed = j.at("seed").get<std::uint32_t>();
  const json& e = j.at("encoder");
  report.spec = {e.at("constraint_length").get<int>(), e.at("taps_v1").get<std::uint32_t>(),
                 e.at("taps_v2").get<std::uint32_t>()};
  for (const json& r : j.at("runs")) report.runs.push_back(run_from_json(r));
  for (const json& p : j.at("pairs")) report.pairs.push_back(pair_from_json(p));
  report.notes = j.at("notes").get<std::vector<std::string>>();
  return report;
}

std::string render(const BenchReport& report, Format format) {
  switch (format) {
    case Format::kJson: return to_json(report).dump(2) + "\n";
    case Format::kCsv: return render_csv(report);
    case Format::kPlotdat: return render_plotdat(report);
  }
  return {};
}

void write_report(const BenchReport& report, Format format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << render(report, format);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

void CostModelParams::validate() const {
  if (calls == 0) throw std::invalid_argument("calls must be positive");
  if (mode == Mode::kMicrocoded) {
    for (const MicrocodedSide* s : {&baseline, &custom}) {
      if (s->assembly_instructions == 0 || s->microinstructions_per_call == 0 ||
          s->fetch_per_instruction == 0) {
        throw std::invalid_argument("microcoded counts must be positive");
      }
    }
    if (cycles_per_micro == 0) throw std::invalid_argument("cycles per microinstruction must be positive");
  } else if (baseline_cycles_per_call == 0 || custom_cycles_per_call == 0) {
    throw std::invalid_argument("per-call cycle counts must be positive");
  }
}

CostModelResult cost_model(const CostModelParams& params) {
  params.validate();
  CostModelResult r;
  if (params.mode == CostModelParams::Mode::kMicrocoded) {
    auto side = [&](const MicrocodedSide& s) {
      CostSide out;
      out.total_micro =
          (s.microinstructions_per_call + s.assembly_instructions * s.fetch_per_instruction) *
          params.calls;
      out.total_cycles = *out.total_micro * params.cycles_per_micro;
      return out;
    };
    r.baseline = side(params.baseline);
    r.custom = side(params.custom);
  } else {
    r.baseline.total_cycles = params.baseline_cycles_per_call * params.calls;
    r.custom.total_cycles = params.custom_cycles_per_call * params.calls;
  }
  r.improvement_tenths = improvement_tenths(r.baseline.total_cycles, r.custom.total_cycles);
  return r;
}

const std::vector<CostPreset>& cost_presets() {
  static const std::vector<CostPreset> presets = {
      {"dlx", "DLX, microcoded: trellis function 63 A.I / 277 M.I vs Texpand 1 / 100",
       microcoded(63, 277, 1, 100)},
      {"picojava", "PicoJava II, microcoded: trellis function 41 A.I / 255 M.I vs Texpand 1 / 102",
       microcoded(41, 255, 1, 102)},
      {"nios2-f", "Nios II/f, cycles per call: 59 vs 28", per_call(59, 28)},
      {"nios2-s", "Nios II/s, cycles per call: 59 (tabulated, same as /f) vs 35",
       per_call(59, 35)},
      {"nios2-e", "Nios II/e, cycles per call: 264 vs 151", per_call(264, 151)},
  };
  return presets;
}

const CostPreset& find_preset(std::string_view name) {
  for (const CostPreset& p : cost_presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const CostPreset& p : cost_presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw std::invalid_argument("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

json to_json(const CostModelParams& params, const CostModelResult& result) {
  json j;
  auto side = [](const CostSide& s) {
    json o;
    if (s.total_micro) o["total_micro"] = *s.total_micro;
    o["total_cycles"] = s.total_cycles;
    return o;
  };
  if (params.mode == CostModelParams::Mode::kMicrocoded) {
    j["mode"] = "microcoded";
    j["cycles_per_micro"] = params.cycles_per_micro;
    auto in = [](const MicrocodedSide& s) {
      return json{{"assembly_instructions", s.assembly_instructions},
                  {"microinstructions_per_call", s.microinstructions_per_call},
                  {"fetch_per_instruction", s.fetch_per_instruction}};
    };
    j["baseline_params"] = in(params.baseline);
    j["custom_params"] = in(params.custom);
  } else {
    j["mode"] = "per_call_cycles";
    j["baseline_cycles_per_call"] = params.baseline_cycles_per_call;
    j["custom_cycles_per_call"] = params.custom_cycles_per_call;
  }
  j["calls"] = params.calls;
  j["baseline"] = side(result.baseline);
  j["custom"] = side(result.custom);
  j["improvement_tenths"] = result.improvement_tenths;
  j["improvement_pct"] = format_tenths(result.improvement_tenths);
  j["improvement_whole_pct"] = format_whole(result.improvement_tenths);
  return j;
}

}  // namespace texpand::bench
