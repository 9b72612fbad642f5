#pragma once

#include <ostream>
#include <string>

#include "ncsafe/montecarlo.hpp"

namespace ncsafe {

// Stable CSV schemas (pinned by golden tests); floats carry six
// significant digits.
//
// Per-run trace:
//   step,t_s,h_min,dist_obs1,dist_obs2,ee_x,ee_y,u1,u2,u3,intervened
void write_trace_csv(std::ostream& out, const ExperimentConfig& cfg, const RunRecord& rec);

// Batch summary:
//   architecture,safe_rate,reach_rate,success_rate,avg_reach_time_s,
//   peak_jerk_mean,peak_jerk_max,n_runs,seed
void write_summary_csv(std::ostream& out, const BatchReport& report);

// Clearance envelope for one architecture:
//   step,t_s,obs1_mean,obs1_min,obs1_max,obs2_mean,...
void write_envelope_csv(std::ostream& out, const ExperimentConfig& cfg,
                        const std::vector<ClearanceEnvelope>& envelopes);

// JSON mirrors of the CSV content plus provenance metadata.
std::string run_summary_json(const ExperimentConfig& cfg, Architecture arch,
                             const RunRecord& rec, std::uint64_t seed,
                             const Calibration* calib);
std::string batch_summary_json(const ExperimentConfig& cfg, const BatchReport& report,
                               const Calibration* calib);

std::string format_g6(double v);

}  // namespace ncsafe
