#include "ncsafe/results_io.hpp"

#include <cstdio>

#include <json.hpp>

#include "ncsafe/version.hpp"

namespace ncsafe {

std::string format_g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const ExperimentConfig& cfg, const RunRecord& rec) {
  const int n_obs = static_cast<int>(cfg.scenario.obstacles.size());
  out << "step,t_s,h_min";
  for (int o = 0; o < n_obs; ++o) out << ",dist_obs" << (o + 1);
  out << ",ee_x,ee_y,u1,u2,u3,intervened\n";
  const double ts = cfg.scenario.arm.ts;
  for (std::size_t k = 0; k < rec.steps.size(); ++k) {
    const StepLog& st = rec.steps[k];
    out << k << "," << format_g6(k * ts) << "," << format_g6(st.h);
    for (int o = 0; o < n_obs; ++o)
      out << "," << format_g6(robot::obstacle_clearance(cfg.scenario, st.x, o));
    const auto ee = robot::end_effector(cfg.scenario.arm, st.x);
    out << "," << format_g6(ee.x()) << "," << format_g6(ee.y());
    for (int i = 0; i < 3; ++i)
      out << "," << format_g6(st.u_applied.size() == 3 ? st.u_applied[i] : 0.0);
    out << "," << (st.intervened ? 1 : 0) << "\n";
  }
}

void write_summary_csv(std::ostream& out, const BatchReport& report) {
  out << "architecture,safe_rate,reach_rate,success_rate,avg_reach_time_s,"
         "peak_jerk_mean,peak_jerk_max,n_runs,seed\n";
  for (const auto& [arch, st] : report.stats) {
    out << to_string(arch) << "," << format_g6(st.safe_rate) << ","
        << format_g6(st.reach_rate) << "," << format_g6(st.success_rate) << ","
        << format_g6(st.avg_reach_time_s) << "," << format_g6(st.peak_jerk_mean) << ","
        << format_g6(st.peak_jerk_max) << "," << st.n_runs << "," << report.seed << "\n";
  }
}

void write_envelope_csv(std::ostream& out, const ExperimentConfig& cfg,
                        const std::vector<ClearanceEnvelope>& envelopes) {
  const int n_obs = static_cast<int>(envelopes.size());
  out << "step,t_s";
  for (int o = 0; o < n_obs; ++o)
    out << ",obs" << (o + 1) << "_mean,obs" << (o + 1) << "_min,obs" << (o + 1) << "_max";
  out << "\n";
  std::size_t len = 0;
  for (const auto& e : envelopes) len = std::max(len, e.mean.size());
  const double ts = cfg.scenario.arm.ts;
  for (std::size_t k = 0; k < len; ++k) {
    out << k << "," << format_g6(k * ts);
    for (const auto& e : envelopes) {
      if (k < e.mean.size()) {
        out << "," << format_g6(e.mean[k]) << "," << format_g6(e.min[k]) << ","
            << format_g6(e.max[k]);
      } else {
        out << ",,,";
      }
    }
    out << "\n";
  }
}

namespace {

nlohmann::json calibration_json(const Calibration& c) {
  return {{"w_bar_l", c.w_bar_l},
          {"w_bar_r", c.w_bar_r},
          {"eta_l", c.eta_l},
          {"eta_r", c.eta_r},
          {"lipschitz_h", c.lipschitz_h},
          {"lipschitz_f", c.lipschitz_f},
          {"lipschitz_g", c.lipschitz_g},
          {"input_gain", c.input_gain},
          {"velocity_scale", c.velocity_scale},
          {"rho_u", c.rho_u}};
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
  return {{"tau", cfg.tau},
          {"horizon", cfg.mpc.horizon},
          {"gamma", cfg.mpc.gamma},
          {"rho", cfg.mpc.rho},
          {"ts", cfg.scenario.arm.ts},
          {"sim_steps", cfg.scenario.sim_horizon_steps},
          {"disturbance_mode", to_string(cfg.disturbance.mode)},
          {"disturbance_sigma", cfg.disturbance.sigma},
          {"disturbance_clip", cfg.disturbance.clip},
          {"disturbance_channel", "input_torque"}};
}

}  // namespace

std::string run_summary_json(const ExperimentConfig& cfg, Architecture arch,
                             const RunRecord& rec, std::uint64_t seed,
                             const Calibration* calib) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["architecture"] = to_string(arch);
  j["seed"] = seed;
  j["config"] = config_json(cfg);
  j["steps"] = rec.steps.size();
  j["min_h"] = rec.min_h;
  j["safety_violated"] = rec.safety_violated;
  j["reached_all"] = rec.reached_all;
  j["peak_jerk"] = rec.peak_jerk;
  j["aborted"] = rec.aborted;
  if (rec.aborted) j["abort_reason"] = rec.abort_reason;
  j["waypoint_steps"] = rec.waypoint_steps;
  if (calib) j["calibration"] = calibration_json(*calib);
  return j.dump(2) + "\n";
}

std::string batch_summary_json(const ExperimentConfig& cfg, const BatchReport& report,
                               const Calibration* calib) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["seed"] = report.seed;
  j["n_runs"] = report.n_runs;
  j["config"] = config_json(cfg);
  nlohmann::json archs = nlohmann::json::array();
  for (const auto& [arch, st] : report.stats) {
    archs.push_back({{"architecture", to_string(arch)},
                     {"safe_rate", st.safe_rate},
                     {"reach_rate", st.reach_rate},
                     {"success_rate", st.success_rate},
                     {"avg_reach_time_s", st.avg_reach_time_s},
                     {"peak_jerk_mean", st.peak_jerk_mean},
                     {"peak_jerk_max", st.peak_jerk_max}});
  }
  j["architectures"] = archs;
  if (calib) j["calibration"] = calibration_json(*calib);
  return j.dump(2) + "\n";
}

}  // namespace ncsafe
