#pragma once
// Command-line orchestration: resolve a scenario (file path or builtin
// name), run one study, and persist its artifacts under an output
// directory.  Every command writes a machine-readable summary.json whose
// assertions decide the process exit status; numeric CSV content is
// formatted with enough digits to round-trip, so a rerun with the same
// scenario and seed reproduces the files byte for byte.

#include <string>
#include <vector>

#include "sbp/scenario.hpp"

namespace sbp {

struct RunOptions {
  std::string scenario;           // JSON file path, or a builtin name
  std::string out_dir = ".";
  std::vector<double> eps_sweep;  // overrides the scenario sweep if nonempty
  int grid_n = 0;                 // overrides the scenario grid if > 0
  double grid_L = 0;              // likewise
  long long seed = 0;             // overrides the scenario seed if nonzero
  double p = 3.0;                 // ground-state exponent (ground-state only)
  Vec3 start{0, 0, 0};            // concentrate: hypothesized point override
  bool has_start = false;
  int scan_radial = 32;           // multiplicity-scan resolution
  int scan_angular = 32;
};

// One checked quantity: pass == (value op threshold).
struct Assertion {
  std::string name;
  double value = 0;
  double threshold = 0;
  std::string op;  // "<", "<=", ">=", ">", "=="
  bool pass = false;
};

struct RunSummary {
  std::string command;
  std::string scenario_name;
  long long seed = 0;
  std::vector<Assertion> assertions;
  std::vector<std::string> artifacts;  // files written, relative to out_dir
  bool ok = true;                      // no error and every assertion passed
  std::string error;
};

// Load (file or builtin), apply the option overrides, validate.
Scenario resolve_scenario(const RunOptions& opt);

RunSummary run_ground_state(const RunOptions& opt);
RunSummary run_kernel_check(const RunOptions& opt);
RunSummary run_expansion_study(const RunOptions& opt);
RunSummary run_concentrate(const RunOptions& opt);
RunSummary run_multiplicity_scan(const RunOptions& opt);
RunSummary run_validate(const RunOptions& opt);
// Aggregate every summary.json found under out_dir into report.json.
RunSummary run_report(const RunOptions& opt);

// Dispatch on the subcommand name; unknown names throw InvalidModel.
RunSummary run_command(const std::string& command, const RunOptions& opt);

// Serialize the summary (stable key order) to <out_dir>/summary.json;
// run_report writes report.json instead.
void write_summary(const RunSummary& s, const std::string& out_dir);

}  // namespace sbp
