#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "texpand/bench.h"

using namespace texpand;
using bench::CostModelParams;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult cli(const std::string& args) {
  CliResult r;
  const std::string cmd = std::string("\"") + TEXPAND_CLI + "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("improvement is truncated to tenths") {
  CHECK(bench::improvement_tenths(25840, 7676) == 2366);
  CHECK(bench::improvement_tenths(1121, 532) == 1107);
  CHECK(bench::improvement_tenths(665 * 4, 665 * 4) == 0);
  CHECK(bench::improvement_tenths(10, 20) == -500);
  CHECK(bench::format_tenths(1107) == "110.7");
  CHECK(bench::format_tenths(5) == "0.5");
  CHECK(bench::format_tenths(-15) == "-1.5");
  CHECK(bench::format_whole(2366) == "236");
  CHECK_THROWS_AS(bench::improvement_tenths(5, 0), std::invalid_argument);
}

TEST_CASE("microcoded presets reproduce the reference tables") {
  const auto dlx = bench::cost_model(bench::find_preset("dlx").params);
  CHECK(dlx.baseline.total_micro == 6460u);
  CHECK(dlx.baseline.total_cycles == 25840);
  CHECK(dlx.custom.total_micro == 1919u);
  CHECK(dlx.custom.total_cycles == 7676);
  CHECK(bench::format_whole(dlx.improvement_tenths) == "236");

  const auto pj = bench::cost_model(bench::find_preset("picojava").params);
  CHECK(pj.baseline.total_micro == 5624u);
  CHECK(pj.baseline.total_cycles == 22496);
  CHECK(pj.custom.total_micro == 1957u);
  CHECK(pj.custom.total_cycles == 7828);
  CHECK(bench::format_whole(pj.improvement_tenths) == "187");
}

TEST_CASE("per-call presets reproduce the reference table") {
  const auto f = bench::cost_model(bench::find_preset("nios2-f").params);
  CHECK(f.baseline.total_cycles == 1121);
  CHECK(f.custom.total_cycles == 532);
  CHECK(bench::format_tenths(f.improvement_tenths) == "110.7");
  CHECK_FALSE(f.baseline.total_micro.has_value());
  const auto s = bench::cost_model(bench::find_preset("nios2-s").params);
  CHECK(s.custom.total_cycles == 665);
  CHECK(bench::format_tenths(s.improvement_tenths) == "68.5");
  const auto e = bench::cost_model(bench::find_preset("nios2-e").params);
  CHECK(e.baseline.total_cycles == 5016);
  CHECK(e.custom.total_cycles == 2869);
  CHECK(bench::format_tenths(e.improvement_tenths) == "74.8");
  CHECK_THROWS_AS(bench::find_preset("z80"), std::invalid_argument);
}

TEST_CASE("cost model rejects zero counts") {
  CostModelParams p = bench::find_preset("dlx").params;
  p.calls = 0;
  CHECK_THROWS_AS(bench::cost_model(p), std::invalid_argument);
  p = bench::find_preset("dlx").params;
  p.cycles_per_micro = 0;
  CHECK_THROWS_AS(bench::cost_model(p), std::invalid_argument);
  p = bench::find_preset("nios2-e").params;
  p.custom_cycles_per_call = 0;
  CHECK_THROWS_AS(bench::cost_model(p), std::invalid_argument);
}

TEST_CASE("benchmark report: pairing, validity, formats and round trip") {
  const auto report = bench::run_benchmark(bench::default_configs({12, 24}));
  REQUIRE(report.runs.size() == 8);
  REQUIRE(report.pairs.size() == 4);
  CHECK(report.all_decoded());
  CHECK_FALSE(report.any_fault());
  CHECK(report.runs[0].profile == "register");
  CHECK(report.runs[0].variant == "asm");
  CHECK(report.runs[1].variant == "texpand");
  for (const auto& run : report.runs) {
    CHECK(run.cycles == 4 * run.total_micro);
    CHECK(run.total_micro == run.microinstructions + run.fetch_steps);
    CHECK(run.calls == run.expected_calls);
  }
  for (const auto& pair : report.pairs) {
    CHECK(pair.valid);
    CHECK(pair.cycles_custom < pair.cycles_baseline);
    CHECK(pair.improvement_tenths ==
          bench::improvement_tenths(pair.cycles_baseline, pair.cycles_custom));
  }

  const auto json = bench::to_json(report);
  CHECK(json.at("schema") == 1);
  CHECK(bench::report_from_json(nlohmann::json::parse(json.dump())) == report);
  nlohmann::json bad = json;
  bad["schema"] = 99;
  CHECK_THROWS(bench::report_from_json(bad));

  const auto csv = bench::render(report, bench::Format::kCsv);
  CHECK(count_lines(csv) == report.runs.size() + 1);
  CHECK(csv.rfind("profile,variant,n_bits", 0) == 0);

  const auto plot = bench::render(report, bench::Format::kPlotdat);
  CHECK(plot.find("# register\n") != std::string::npos);
  CHECK(plot.find("# stack\n") != std::string::npos);
  CHECK(plot.find("\n\n") != std::string::npos);
  std::istringstream lines(plot);
  std::string line;
  std::size_t data_rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::size_t n = 0;
    std::uint64_t base = 0, custom = 0;
    REQUIRE(static_cast<bool>(fields >> n >> base >> custom));
    CHECK(custom < base);
    ++data_rows;
  }
  CHECK(data_rows == report.pairs.size());
  CHECK_THROWS_AS(bench::parse_format("xml"), std::invalid_argument);
}

TEST_CASE("benchmark is deterministic and independent of scheduling") {
  const auto configs = bench::default_configs({12, 36});
  bench::BenchOptions serial;
  serial.parallel = false;
  const auto a = bench::to_json(bench::run_benchmark(configs)).dump();
  const auto b = bench::to_json(bench::run_benchmark(configs, serial)).dump();
  CHECK(a == b);
}

TEST_CASE("benchmark input validation") {
  CHECK_THROWS_AS(bench::run_benchmark({}), std::invalid_argument);
  auto configs = bench::default_configs({12});
  configs[0].n_received_bits = 11;
  CHECK_THROWS_AS(bench::run_benchmark(configs), std::invalid_argument);
}

TEST_CASE("a run that exceeds its cycle budget reports a fault") {
  const auto cfg = workloads::make_config(isa::ProfileId::kRegister, workloads::Variant::kTexpand, 12);
  const auto run = bench::run_workload(cfg, 100);
  CHECK(run.faulted());
  CHECK_FALSE(run.decoded_ok);
}

TEST_CASE("command-line tool") {
  SUBCASE("encode, corrupt and decode") {
    auto r = cli("encode 110100 --encoder standard");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "11 01 01 00 10 11\n");
    r = cli("corrupt 110101001011 --flip 3");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "11 11 01 00 10 11\n");
    r = cli("decode 101111001100");
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("110100\nweight 2", 0) == 0);
  }
  SUBCASE("validation errors exit with 1") {
    CHECK(cli("decode 10110").exit_code == 1);
    CHECK(cli("decode 1012").exit_code == 1);
    CHECK(cli("run --bits 13").exit_code == 1);
    CHECK(cli("bench --bits 7").exit_code == 1);
    CHECK(cli("costmodel --preset z80").exit_code == 1);
    CHECK(cli("frobnicate").exit_code == 1);
    CHECK(cli("asm /nonexistent/file.rasm").exit_code == 1);
  }
  SUBCASE("run reports a decoded workload") {
    const auto r = cli("run --profile stack --variant asm --bits 24");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("decoded_ok") == true);
    CHECK(j.at("calls") == 12);
  }
  SUBCASE("a faulting image exits with 3") {
    const auto dir = std::filesystem::temp_directory_path() / "texpand_cli_test";
    std::filesystem::create_directories(dir);
    const auto src = dir / "trap.rasm";
    std::ofstream(src) << "TRAP\n";
    auto r = cli("asm " + src.string() + " --out " + (dir / "trap.json").string());
    REQUIRE(r.exit_code == 0);
    r = cli("run --image " + (dir / "trap.json").string());
    CHECK(r.exit_code == 3);
    std::filesystem::remove_all(dir);
  }
  SUBCASE("costmodel presets") {
    const auto r = cli("costmodel --preset nios2-s");
    CHECK(r.exit_code == 0);
    CHECK(nlohmann::json::parse(r.out).at("improvement_pct") == "68.5");
    const auto all = nlohmann::json::parse(cli("costmodel --preset all").out);
    CHECK(all.size() == 5);
    const auto custom = cli("costmodel --mode microcoded --calls 19 --base-ai 63 --base-mi 277 "
                            "--custom-ai 1 --custom-mi 100");
    CHECK(nlohmann::json::parse(custom.out).at("improvement_whole_pct") == "236");
  }
  SUBCASE("bench output is byte-identical across runs") {
    const auto a = cli("bench --bits 12,24 --format csv");
    const auto b = cli("bench --bits 12,24 --format csv --serial");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(count_lines(a.out) == 9);
  }
}
