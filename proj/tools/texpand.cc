#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "texpand/assembler.h"
#include "texpand/bench.h"
#include "texpand/convcode.h"
#include "texpand/workloads.h"

namespace {

using namespace texpand;

enum ExitCode { kOk = 0, kValidation = 1, kOracleMismatch = 2, kSimulationFault = 3 };

struct CommonOptions {
  std::string profile = "register";
  std::string variant = "texpand";
  std::size_t bits = 12;
  std::uint32_t seed = workloads::kDefaultSeed;
  std::string encoder = "example";
  std::string format = "json";
  std::string out;
};

convcode::EncoderSpec encoder_by_name(const std::string& name) {
  if (name == "example") return convcode::kWorkedExampleSpec;
  if (name == "standard") return convcode::kStandardSpec;
  throw std::invalid_argument("unknown encoder '" + name + "' (expected example or standard)");
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f || !(f << text)) throw std::runtime_error("cannot write " + out);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

isa::Profile profile_with_texpand(isa::ProfileId id, const convcode::EncoderSpec& spec) {
  workloads::WorkloadConfig cfg;
  cfg.profile = id;
  cfg.variant = workloads::Variant::kTexpand;
  cfg.spec = spec;
  return workloads::profile_for(cfg);
}

std::set<std::size_t> parse_positions(const std::string& text) {
  std::set<std::size_t> positions;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const unsigned long v = std::stoul(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad bit position '" + item + "'");
    positions.insert(v);
  }
  return positions;
}

void write_workloads(const std::string& root, std::uint32_t seed) {
  for (const auto& cfg : bench::default_configs({12, 24, 36, 48, 60}, convcode::kWorkedExampleSpec, seed)) {
    const auto path = workloads::workload_path(root, cfg);
    std::filesystem::create_directories(path.parent_path());
    emit(workloads::gen_program(cfg).source, path.string());
    std::cout << path.string() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microcoded processor simulator with a trellis-expansion custom instruction"};
  app.require_subcommand(1);
  CommonOptions o;

  auto add_workload_flags = [&o](CLI::App* sub) {
    sub->add_option("--profile", o.profile, "register or stack")
        ->check(CLI::IsMember({"register", "stack"}));
    sub->add_option("--variant", o.variant, "asm or texpand")->check(CLI::IsMember({"asm", "texpand"}));
    sub->add_option("--bits", o.bits, "number of received bits");
    sub->add_option("--seed", o.seed, "seed for generated received words (accepts 0x...)");
  };

  std::string bits_text;
  std::string flips;
  auto* encode = app.add_subcommand("encode", "encode data bits (flush bits are not added)");
  encode->add_option("bits", bits_text, "data bits, e.g. 110100")->required();
  encode->add_option("--encoder", o.encoder, "example or standard");

  auto* corrupt = app.add_subcommand("corrupt", "flip codeword bits at 1-based positions");
  corrupt->add_option("bits", bits_text, "codeword")->required();
  corrupt->add_option("--flip", flips, "comma-separated positions, e.g. 3,7")->required();

  auto* decode = app.add_subcommand("decode", "Viterbi-decode a received word (terminated code)");
  decode->add_option("bits", bits_text, "received word")->required();
  decode->add_option("--encoder", o.encoder, "example or standard");

  std::string asm_input;
  bool print_source = false;
  bool disasm = false;
  std::string workloads_dir;
  auto* asm_cmd = app.add_subcommand("asm", "assemble a source file or a generated workload");
  asm_cmd->add_option("file", asm_input, "assembly source; omit to generate a workload");
  add_workload_flags(asm_cmd);
  asm_cmd->add_flag("--source", print_source, "print the generated source instead of an image");
  asm_cmd->add_flag("--disasm", disasm, "print the disassembly of the assembled image");
  asm_cmd->add_option("--write-workloads", workloads_dir,
                      "regenerate every committed workload file under this directory");
  asm_cmd->add_option("--out", o.out, "output path (default stdout)");

  std::string image_path;
  auto* run = app.add_subcommand("run", "run one workload (or a JSON image) on the simulator");
  add_workload_flags(run);
  run->add_option("--image", image_path, "JSON image produced by 'asm'");
  run->add_option("--out", o.out, "output path (default stdout)");

  std::vector<std::size_t> sizes = {12, 24, 36, 48, 60};
  bool serial = false;
  auto* bench_cmd = app.add_subcommand("bench", "run both variants on both profiles");
  bench_cmd->add_option("--bits", sizes, "received-bit sizes")->delimiter(',');
  bench_cmd->add_option("--seed", o.seed, "seed for generated received words");
  bench_cmd->add_option("--format", o.format)->check(CLI::IsMember({"json", "csv", "plotdat"}));
  bench_cmd->add_option("--out", o.out, "output path (default stdout)");
  bench_cmd->add_flag("--serial", serial, "run simulations one at a time");

  std::string preset;
  bench::CostModelParams params;
  std::string mode = "microcoded";
  auto* cost = app.add_subcommand("costmodel", "closed-form cycle cost calculator");
  cost->add_option("--preset", preset, "dlx, picojava, nios2-f, nios2-s, nios2-e or all");
  cost->add_option("--mode", mode)->check(CLI::IsMember({"microcoded", "per_call_cycles"}));
  cost->add_option("--calls", params.calls);
  cost->add_option("--cpm", params.cycles_per_micro, "cycles per microinstruction");
  cost->add_option("--base-ai", params.baseline.assembly_instructions);
  cost->add_option("--base-mi", params.baseline.microinstructions_per_call);
  cost->add_option("--custom-ai", params.custom.assembly_instructions);
  cost->add_option("--custom-mi", params.custom.microinstructions_per_call);
  cost->add_option("--fetch", params.baseline.fetch_per_instruction, "fetch steps per instruction");
  cost->add_option("--base-cycles", params.baseline_cycles_per_call);
  cost->add_option("--custom-cycles", params.custom_cycles_per_call);
  cost->add_option("--out", o.out);

  std::string report_in;
  auto* report = app.add_subcommand("report", "convert a JSON bench report");
  report->add_option("input", report_in, "JSON report")->required();
  report->add_option("--format", o.format)->check(CLI::IsMember({"json", "csv", "plotdat"}));
  report->add_option("--out", o.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*encode) {
      const auto spec = encoder_by_name(o.encoder);
      std::cout << convcode::format_bits(convcode::encode(spec, convcode::parse_bits(bits_text)))
                << "\n";
    } else if (*corrupt) {
      std::cout << convcode::format_bits(
                       convcode::flip_bits(convcode::parse_bits(bits_text), parse_positions(flips)))
                << "\n";
    } else if (*decode) {
      const auto spec = encoder_by_name(o.encoder);
      const auto r = convcode::viterbi_decode_detailed(spec, convcode::parse_bits(bits_text));
      std::cout << convcode::format_bits(r.bits, 0) << "\n"
                << "weight " << r.weight << ", " << r.acs_calls << " stages, "
                << r.node_expansions << " state expansions\n";
    } else if (*asm_cmd) {
      if (!workloads_dir.empty()) {
        write_workloads(workloads_dir, o.seed);
        return kOk;
      }
      const auto id = isa::parse_profile(o.profile);
      std::string source;
      isa::Profile profile;
      if (asm_input.empty()) {
        const auto cfg =
            workloads::make_config(id, workloads::parse_variant(o.variant), o.bits,
                                   convcode::kWorkedExampleSpec, o.seed);
        const auto program = workloads::gen_program(cfg);
        if (print_source) {
          emit(program.source, o.out);
          return kOk;
        }
        profile = workloads::profile_for(cfg);
        const auto image = workloads::assemble_program(cfg, program, profile);
        emit(disasm ? assembler::disassemble(image, profile)
                    : assembler::to_json(image).dump(2) + "\n",
             o.out);
        return kOk;
      }
      source = read_file(asm_input);
      profile = profile_with_texpand(id, convcode::kWorkedExampleSpec);
      const auto image = assembler::assemble(source, profile);
      emit(disasm ? assembler::disassemble(image, profile) : assembler::to_json(image).dump(2) + "\n",
           o.out);
    } else if (*run) {
      if (!image_path.empty()) {
        const auto image = assembler::image_from_json(nlohmann::json::parse(read_file(image_path)));
        const auto profile = profile_with_texpand(image.profile, convcode::kWorkedExampleSpec);
        auto state = profile.make_state();
        assembler::load(image, profile, state);
        const auto stats = micro::run(state, profile.store);
        const nlohmann::json j = {{"halt", micro::to_string(stats.reason)},
                                  {"detail", stats.detail},
                                  {"assembly_instructions", stats.counters.assembly_instructions},
                                  {"microinstructions", stats.counters.microinstructions},
                                  {"fetch_steps", stats.counters.fetch_microsteps},
                                  {"total_micro", stats.counters.total_micro()},
                                  {"cycles", stats.counters.cycles}};
        emit(j.dump(2) + "\n", o.out);
        return micro::is_fault(stats.reason) ? kSimulationFault : kOk;
      }
      const auto cfg = workloads::make_config(isa::parse_profile(o.profile),
                                              workloads::parse_variant(o.variant), o.bits,
                                              convcode::kWorkedExampleSpec, o.seed);
      bench::BenchReport single;
      single.seed = o.seed;
      single.runs.push_back(bench::run_workload(cfg));
      emit(bench::to_json(single).at("runs").at(0).dump(2) + "\n", o.out);
      if (single.any_fault()) return kSimulationFault;
      if (!single.all_decoded()) return kOracleMismatch;
    } else if (*bench_cmd) {
      bench::BenchOptions options;
      options.seed = o.seed;
      options.parallel = !serial;
      const auto configs = bench::default_configs(sizes, convcode::kWorkedExampleSpec, o.seed);
      const auto r = bench::run_benchmark(configs, options);
      emit(bench::render(r, bench::parse_format(o.format)), o.out);
      if (r.any_fault()) return kSimulationFault;
      if (!r.all_decoded()) return kOracleMismatch;
    } else if (*cost) {
      std::vector<std::pair<std::string, bench::CostModelParams>> jobs;
      if (preset == "all") {
        for (const auto& p : bench::cost_presets()) jobs.emplace_back(p.name, p.params);
      } else if (!preset.empty()) {
        jobs.emplace_back(preset, bench::find_preset(preset).params);
      } else {
        params.mode = mode == "microcoded" ? bench::CostModelParams::Mode::kMicrocoded
                                           : bench::CostModelParams::Mode::kPerCallCycles;
        params.custom.fetch_per_instruction = params.baseline.fetch_per_instruction;
        jobs.emplace_back("custom", params);
      }
      nlohmann::json out = nlohmann::json::array();
      for (const auto& [name, p] : jobs) {
        auto j = bench::to_json(p, bench::cost_model(p));
        j["name"] = name;
        out.push_back(j);
      }
      emit((jobs.size() == 1 ? out.at(0) : out).dump(2) + "\n", o.out);
    } else if (*report) {
      const auto r = bench::report_from_json(nlohmann::json::parse(read_file(report_in)));
      emit(bench::render(r, bench::parse_format(o.format)), o.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
