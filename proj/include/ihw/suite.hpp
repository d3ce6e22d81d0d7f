#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ihw::cli {

enum class Suite { Invariance, Kernels, Mex, Ramps, Hbf, Hvq, All };
enum class Format { Json, Csv };

std::string_view to_string(Suite suite) noexcept;
Suite suite_from_string(std::string_view name);  // InvalidConfig on unknown names

struct SuiteConfig {
  Suite suite = Suite::All;
  std::uint64_t seed = 12345;
  std::size_t samples = 1'000'000;  // Monte-Carlo sample count
  std::string output_path = "-";    // "-" writes to stdout
  Format format = Format::Json;
  unsigned workers = 1;

  bool uses_monte_carlo() const noexcept;
  void validate() const;
};

/// Flags override config-file values, which override defaults.
///   --suite NAME --seed U64 --samples N --out PATH --format json|csv
///   --workers N --config FILE
/// `args` are the arguments following the `run` subcommand.
SuiteConfig parse_config(const std::vector<std::string>& args);

enum class Status { Pass, Fail, Skip };
std::string_view to_string(Status status) noexcept;

/// One verified claim. `relation` says how value compares with tolerance:
/// "le", "lt", "ge", "gt", or "eq" (exact equality with the expected value
/// stored in the tolerance column).
struct CheckRow {
  std::string check_id;
  Status status = Status::Fail;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation;
  std::string provenance;  // PAPER, TRIVIAL or DERIVED
  std::string note;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double wall_time = 0.0;
  std::vector<CheckRow> checks;  // sorted by check_id

  bool all_passed() const noexcept;  // every non-skipped check passed
};

inline constexpr int kReportSchemaVersion = 1;

SuiteReport run_suite(const SuiteConfig& config);
std::string report_to_json(const SuiteReport& report);
std::string report_to_csv(const SuiteReport& report);
/// Writes in config.format to config.output_path; OutputUnwritable on failure.
void write_report(const SuiteReport& report, const SuiteConfig& config);

}  // namespace ihw::cli
