// ihw: run verification suites and write a JSON or CSV report.
//
//   ihw run --suite <name> --seed <u64> --samples <int> --out <path>
//           --format json|csv [--workers <n>] [--config <file>]
//
// Exit status: 0 all non-skipped checks passed, 1 a check failed,
// 2 configuration error, 3 output not writable.

#include <iostream>
#include <string>
#include <vector>

#include "ihw/error.hpp"
#include "ihw/suite.hpp"

namespace {

constexpr const char* kUsage =
    "usage: ihw run [--suite invariance|kernels|mex|ramps|hbf|hvq|all] [--seed U64]\n"
    "               [--samples N] [--out PATH|-] [--format json|csv] [--workers N]\n"
    "               [--config FILE]\n";

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    std::cout << kUsage;
    return args.empty() ? 2 : 0;
  }
  if (args[0] != "run") {
    std::cerr << "ihw: unknown command '" << args[0] << "'\n" << kUsage;
    return 2;
  }
  args.erase(args.begin());
  for (const auto& a : args)
    if (a == "--help" || a == "-h") {
      std::cout << kUsage;
      return 0;
    }

  ihw::cli::SuiteConfig config;
  try {
    config = ihw::cli::parse_config(args);
  } catch (const ihw::Error& e) {
    std::cerr << "ihw: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto report = ihw::cli::run_suite(config);
    ihw::cli::write_report(report, config);
    for (const auto& row : report.checks)
      if (row.status != ihw::cli::Status::Pass)
        std::cerr << "ihw: " << to_string(row.status) << ' ' << row.check_id << " value=" << row.value << ' '
                  << row.note << '\n';
    return report.all_passed() ? 0 : 1;
  } catch (const ihw::Error& e) {
    std::cerr << "ihw: " << e.what() << '\n';
    return e.code() == ihw::ErrorCode::OutputUnwritable ? 3 : 2;
  }
}
