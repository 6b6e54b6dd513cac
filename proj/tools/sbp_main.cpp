// sbp: command-line front end for the standing-wave study toolkit.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sbp/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical studies of semiclassical standing waves coupled to a "
               "fourth-order field"};
  app.require_subcommand(1);

  sbp::RunOptions opt;
  std::vector<double> start;

  auto add_common = [&opt](CLI::App* cmd, bool need_scenario) {
    auto* so = cmd->add_option("--scenario", opt.scenario,
                               "scenario JSON file or builtin name");
    if (need_scenario) so->required();
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--eps-sweep", opt.eps_sweep,
                    "comma-separated eps values overriding the scenario sweep")
        ->delimiter(',');
    cmd->add_option("--grid-n", opt.grid_n, "override grid resolution");
    cmd->add_option("--grid-L", opt.grid_L, "override grid half-width");
    cmd->add_option("--seed", opt.seed, "override the recorded RNG seed");
  };

  auto* gs = app.add_subcommand(
      "ground-state", "solve the radial profile, write constants and checks");
  gs->add_option("--p", opt.p, "nonlinearity exponent in (1,5)");
  gs->add_option("--out", opt.out_dir, "output directory");

  auto* kc = app.add_subcommand("kernel-check",
                                "convolution kernel consistency checks");
  add_common(kc, false);

  auto* ex = app.add_subcommand("expansion-study",
                                "panel and fixed-point expansion sweeps");
  add_common(ex, true);

  auto* co = app.add_subcommand(
      "concentrate", "locate and certify concentration points over the sweep");
  add_common(co, true);
  co->add_option("--start", start,
                 "hypothesized concentration point x,y,z (measurement run)")
      ->delimiter(',')
      ->expected(3);

  auto* mu = app.add_subcommand(
      "multiplicity-scan", "scan an annulus for distinct critical points");
  add_common(mu, true);
  mu->add_option("--scan-radial", opt.scan_radial, "radial scan resolution");
  mu->add_option("--scan-angular", opt.scan_angular, "angular scan resolution");

  auto* va = app.add_subcommand(
      "validate", "check scenario hypotheses, write the canonical form");
  add_common(va, true);

  auto* re = app.add_subcommand("report",
                                "aggregate run summaries found under --out");
  re->add_option("--out", opt.out_dir, "directory holding run outputs");

  CLI11_PARSE(app, argc, argv);

  const std::string cmd = app.get_subcommands().front()->get_name();
  if (start.size() == 3) {
    opt.start = {start[0], start[1], start[2]};
    opt.has_start = true;
  }

  sbp::RunSummary summary;
  try {
    summary = sbp::run_command(cmd, opt);
  } catch (const std::exception& e) {
    summary.command = cmd;
    summary.scenario_name = opt.scenario;
    summary.error = e.what();
    summary.ok = false;
    try {
      sbp::write_summary(summary, opt.out_dir);
    } catch (...) {
    }
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  sbp::write_summary(summary, opt.out_dir);

  for (const auto& a : summary.assertions)
    std::printf("%-5s %s  (value %.10g, want %s %.10g)\n",
                a.pass ? "PASS" : "FAIL", a.name.c_str(), a.value, a.op.c_str(),
                a.threshold);
  std::printf("%s %s\n", summary.ok ? "OK" : "FAILED", cmd.c_str());
  return summary.ok ? 0 : 1;
}
