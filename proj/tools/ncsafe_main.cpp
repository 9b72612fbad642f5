// Command-line front end: single runs, Monte Carlo batches, and the
// closed-form tolerance tables.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ncsafe/bounds.hpp"
#include "ncsafe/montecarlo.hpp"
#include "ncsafe/results_io.hpp"
#include "ncsafe/scenario_io.hpp"
#include "ncsafe/version.hpp"

namespace fs = std::filesystem;
using namespace ncsafe;

namespace {

bool needs_calibration(Architecture a) {
  return a == Architecture::RobustLocalCBF || a == Architecture::Combined;
}

bool needs_calibration(const std::vector<Architecture>& archs) {
  for (auto a : archs)
    if (needs_calibration(a)) return true;
  return false;
}

int cmd_run(const std::string& scenario_path, const std::string& arch_name,
            std::uint64_t seed, const std::string& out_prefix) {
  ExperimentConfig cfg = parse_scenario_file(scenario_path);
  cfg.disturbance.seed = seed;
  const Architecture arch = architecture_from_string(arch_name);

  std::optional<Calibration> calib;
  if (needs_calibration(arch)) {
    std::cerr << "calibrating tolerances (disturbance-free probes)...\n";
    calib = calibrate_tolerances(cfg);
  }

  const RunRecord rec = run_single(cfg, arch, calib ? &*calib : nullptr, 0);

  const fs::path trace_path = out_prefix + "_trace.csv";
  const fs::path summary_path = out_prefix + "_summary.json";
  {
    std::ofstream trace(trace_path);
    if (!trace) throw std::runtime_error("cannot write " + trace_path.string());
    write_trace_csv(trace, cfg, rec);
  }
  {
    std::ofstream summary(summary_path);
    summary << run_summary_json(cfg, arch, rec, seed, calib ? &*calib : nullptr);
  }

  std::cout << "architecture: " << to_string(arch) << "\n"
            << "steps: " << rec.steps.size() << "\n"
            << "min_h: " << format_g6(rec.min_h) << "\n"
            << "safe: " << (rec.safety_violated ? "no" : "yes") << "\n"
            << "reached_all: " << (rec.reached_all ? "yes" : "no") << "\n"
            << "peak_jerk: " << format_g6(rec.peak_jerk) << "\n"
            << "trace: " << trace_path.string() << "\n"
            << "summary: " << summary_path.string() << "\n";
  // Unsafe runs are data, not errors; only hard failures exit nonzero.
  return rec.aborted ? 1 : 0;
}

int cmd_batch(const std::string& scenario_path, const std::string& out_dir,
              bool write_traces) {
  ExperimentConfig cfg = parse_scenario_file(scenario_path);
  fs::create_directories(out_dir);

  std::optional<Calibration> calib;
  if (needs_calibration(cfg.run.architectures)) {
    std::cerr << "calibrating tolerances (disturbance-free probes)...\n";
    calib = calibrate_tolerances(cfg);
    std::cerr << "  w_bar_l = " << format_g6(calib->w_bar_l)
              << "  w_bar_r = " << format_g6(calib->w_bar_r) << "\n";
  }

  std::function<void(Architecture, int, const RunRecord&)> sink;
  if (write_traces) {
    sink = [&cfg, &out_dir](Architecture arch, int run_idx, const RunRecord& rec) {
      const fs::path p = fs::path(out_dir) /
                         ("trace_" + std::string(to_string(arch)) + "_run" +
                          std::to_string(run_idx) + ".csv");
      std::ofstream f(p);
      write_trace_csv(f, cfg, rec);
    };
  }

  const BatchReport report =
      run_batch(cfg, cfg.run.architectures, cfg.disturbance, cfg.run.n_runs,
                calib ? &*calib : nullptr, sink);

  {
    std::ofstream f(fs::path(out_dir) / "summary.csv");
    write_summary_csv(f, report);
  }
  {
    std::ofstream f(fs::path(out_dir) / "summary.json");
    f << batch_summary_json(cfg, report, calib ? &*calib : nullptr);
  }
  for (std::size_t a = 0; a < report.stats.size(); ++a) {
    const fs::path p = fs::path(out_dir) /
                       ("envelope_" + std::string(to_string(report.stats[a].first)) + ".csv");
    std::ofstream f(p);
    write_envelope_csv(f, cfg, report.envelopes[a]);
  }

  std::ostringstream table;
  write_summary_csv(table, report);
  std::cout << table.str() << "results written to " << out_dir << "\n";
  return 0;
}

int cmd_bounds(double h, double gamma, double lh, double lf, double lg, double umax,
               int tau, int N) {
  if (!(lh > 0.0)) {
    std::cerr << "error: --Lh must be positive\n";
    return 1;
  }
  ToleranceInputs t;
  t.h_value = h;
  t.gamma = gamma;
  t.lipschitz_h = lh;
  t.lipschitz_f = lf;
  t.lipschitz_g = lg;
  t.input_norm_max = umax;
  t.tau = tau;
  t.horizon = N;

  const double wl = local_tolerance(t);
  std::cout << "L_d = " << format_g6(t.dynamics_gain()) << "\n";
  std::cout << "w_bar_l = " << format_g6(wl) << "\n";
  for (int l = 1; l <= N; ++l) {
    std::cout << "w_bar_r(l=" << l << ") = " << format_g6(remote_tolerance(t, l))
              << "   G(tau,l) = " << format_g6(gain_G(tau, l, t.dynamics_gain())) << "\n";
  }
  std::cout << "w_bar_r (binding, min over l) = "
            << format_g6(remote_tolerance_horizon(t)) << "\n";

  const PropositionReport rep = check_proposition(t);
  std::cout << "clause1 (tau=0, l=1 equality): " << (rep.clause1 ? "PASS" : "FAIL") << "\n";
  std::cout << "clause2 (no delay, horizon dominated): "
            << (rep.clause2 ? "PASS" : "FAIL") << "\n";
  std::cout << "clause3 (delay strictly tighter): " << (rep.clause3 ? "PASS" : "FAIL")
            << "\n";
  return rep.all() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked control CBF-placement simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "One closed-loop run");
  std::string scenario_path, arch_name = "combined", out_prefix = "run";
  std::uint64_t seed = 0;
  run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  run_cmd->add_option("--arch", arch_name,
                      "nominal_mpc|local_cbf|mpc_cbf|robust_local_cbf|combined");
  run_cmd->add_option("--seed", seed, "Disturbance seed");
  run_cmd->add_option("--out", out_prefix, "Output prefix");

  // batch
  auto* batch_cmd = app.add_subcommand("batch", "Monte Carlo batch");
  std::string batch_scenario, out_dir = "batch_out";
  bool no_traces = false;
  batch_cmd->add_option("scenario", batch_scenario, "Scenario file")->required();
  batch_cmd->add_option("--out-dir", out_dir, "Output directory");
  batch_cmd->add_flag("--no-traces", no_traces, "Skip per-run trace CSVs");

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "Closed-form tolerance table");
  double h = 1.0, gamma = 0.5, lh = 1.0, lf = 1.0, lg = 0.0, umax = 1.0;
  int tau = 0, N = 1;
  bounds_cmd->add_option("--h", h, "Barrier margin eta");
  bounds_cmd->add_option("--gamma", gamma, "CBF decay rate");
  bounds_cmd->add_option("--Lh", lh, "Barrier Lipschitz constant");
  bounds_cmd->add_option("--Lf", lf, "Drift Lipschitz constant");
  bounds_cmd->add_option("--Lg", lg, "Input-map Lipschitz constant");
  bounds_cmd->add_option("--umax", umax, "Input norm bound");
  bounds_cmd->add_option("--tau", tau, "Round-trip delay (steps)");
  bounds_cmd->add_option("--N", N, "MPC horizon");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(scenario_path, arch_name, seed, out_prefix);
    if (batch_cmd->parsed()) return cmd_batch(batch_scenario, out_dir, !no_traces);
    if (bounds_cmd->parsed())
      return cmd_bounds(h, gamma, lh, lf, lg, umax, tau, N);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
