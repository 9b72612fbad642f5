#pragma once

#include <cstdint>
#include <string>

#include "ncsafe/dynamics.hpp"
#include "ncsafe/rng.hpp"

namespace ncsafe {

// Clipped-Gaussian disturbance model: zero-mean per-component normals with
// std sigma, then the whole vector is norm-clipped to `clip`.
struct DisturbanceSpec {
  enum class Mode { Low, High, Custom };
  Mode mode = Mode::Custom;
  double sigma = 0.0;  // w_bar_m / 2 for the paper's regimes
  double clip = 0.0;   // w_bar_m
  std::uint64_t seed = 0;

  static DisturbanceSpec low(std::uint64_t seed);    // clip 0.002
  static DisturbanceSpec high(std::uint64_t seed);   // clip 0.004
  static DisturbanceSpec custom(double sigma, double clip, std::uint64_t seed);
};

const char* to_string(DisturbanceSpec::Mode m);
DisturbanceSpec::Mode disturbance_mode_from_string(const std::string& name);

// One draw, deterministic in (spec.seed, draw_index).
Vec sample_disturbance(const DisturbanceSpec& spec, int dim, std::uint64_t draw_index = 0);

// Sequential draws for one run; run_index selects an independent
// substream so paired batches reuse identical realizations per run.
class DisturbanceStream {
 public:
  DisturbanceStream(const DisturbanceSpec& spec, int dim, std::uint64_t run_index);
  Vec next();

 private:
  DisturbanceSpec spec_;
  int dim_;
  SplitMix64 rng_;
};

}  // namespace ncsafe
