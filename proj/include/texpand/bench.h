#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "texpand/workloads.h"

namespace texpand::bench {

inline constexpr int kReportSchema = 1;

// Improvement of `custom` over `baseline` in tenths of a percent,
// (baseline - custom) / custom * 1000, truncated toward zero. Integer
// arithmetic throughout.
std::int64_t improvement_tenths(std::uint64_t baseline, std::uint64_t custom);
std::string format_tenths(std::int64_t tenths);  // "110.7"
std::string format_whole(std::int64_t tenths);   // "236"

struct RunResult {
  std::string profile;
  std::string variant;
  std::size_t n_bits = 0;
  std::uint64_t assembly_instructions = 0;
  std::uint64_t microinstructions = 0;
  std::uint64_t fetch_steps = 0;
  std::uint64_t total_micro = 0;
  std::uint64_t cycles = 0;
  std::uint64_t calls = 0;           // TEXPAND executions or subroutine calls
  std::uint64_t expected_calls = 0;
  bool decoded_ok = false;
  std::string halt;                  // halt reason
  std::string detail;                // fault text, if any

  bool faulted() const { return halt != "halted"; }
  friend bool operator==(const RunResult&, const RunResult&) = default;
};

struct PairResult {
  std::string profile;
  std::size_t n_bits = 0;
  std::uint64_t cycles_baseline = 0;  // assembly subroutine
  std::uint64_t cycles_custom = 0;    // TEXPAND
  std::int64_t improvement_tenths = 0;
  std::string improvement_pct;        // one decimal, truncated
  double speedup = 0;                 // baseline / custom
  bool valid = false;                 // both runs decoded correctly

  friend bool operator==(const PairResult&, const PairResult&) = default;
};

struct BenchReport {
  int schema = kReportSchema;
  std::uint32_t seed = workloads::kDefaultSeed;
  convcode::EncoderSpec spec;
  std::vector<RunResult> runs;
  std::vector<PairResult> pairs;
  std::vector<std::string> notes;

  bool all_decoded() const;
  bool any_fault() const;
  friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

struct BenchOptions {
  std::uint32_t seed = workloads::kDefaultSeed;
  std::uint64_t max_cycles = micro::kDefaultCycleLimit;
  bool parallel = true;
};

RunResult run_workload(const workloads::WorkloadConfig& cfg,
                       std::uint64_t max_cycles = micro::kDefaultCycleLimit);

// Runs every config (concurrently unless disabled), then pairs runs by
// (profile, n_bits). Results keep config order. Throws std::invalid_argument
// on an empty or invalid config list.
BenchReport run_benchmark(const std::vector<workloads::WorkloadConfig>& configs,
                          const BenchOptions& options = {});

// Both profiles x both variants x the given sizes.
std::vector<workloads::WorkloadConfig> default_configs(
    const std::vector<std::size_t>& sizes = {12, 24, 36, 48, 60},
    const convcode::EncoderSpec& spec = convcode::kWorkedExampleSpec,
    std::uint32_t seed = workloads::kDefaultSeed);

enum class Format { kJson, kCsv, kPlotdat };
Format parse_format(std::string_view name);

nlohmann::json to_json(const BenchReport& report);
BenchReport report_from_json(const nlohmann::json& j);
std::string render(const BenchReport& report, Format format);
// Throws std::runtime_error when the file cannot be written.
void write_report(const BenchReport& report, Format format, const std::filesystem::path& path);

// Closed-form cost model.
struct MicrocodedSide {
  std::uint64_t assembly_instructions = 0;
  std::uint64_t microinstructions_per_call = 0;
  std::uint64_t fetch_per_instruction = 1;
};

struct CostModelParams {
  enum class Mode { kMicrocoded, kPerCallCycles };
  Mode mode = Mode::kMicrocoded;
  std::uint64_t calls = 0;
  // kMicrocoded
  MicrocodedSide baseline;
  MicrocodedSide custom;
  std::uint64_t cycles_per_micro = 4;
  // kPerCallCycles
  std::uint64_t baseline_cycles_per_call = 0;
  std::uint64_t custom_cycles_per_call = 0;

  void validate() const;  // std::invalid_argument on a zero count
};

struct CostSide {
  std::optional<std::uint64_t> total_micro;  // microcoded mode only
  std::uint64_t total_cycles = 0;
};

struct CostModelResult {
  CostSide baseline;
  CostSide custom;
  std::int64_t improvement_tenths = 0;
};

CostModelResult cost_model(const CostModelParams& params);

struct CostPreset {
  std::string name;
  std::string description;
  CostModelParams params;
};

// Reference operating points: "dlx", "picojava", "nios2-f", "nios2-s", "nios2-e".
const std::vector<CostPreset>& cost_presets();
const CostPreset& find_preset(std::string_view name);

nlohmann::json to_json(const CostModelParams& params, const CostModelResult& result);

}  // namespace texpand::bench
