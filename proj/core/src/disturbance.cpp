#include "ncsafe/disturbance.hpp"

#include <stdexcept>

namespace ncsafe {

DisturbanceSpec DisturbanceSpec::low(std::uint64_t seed) {
  DisturbanceSpec s;
  s.mode = Mode::Low;
  s.clip = 0.002;
  s.sigma = s.clip / 2.0;
  s.seed = seed;
  return s;
}

DisturbanceSpec DisturbanceSpec::high(std::uint64_t seed) {
  DisturbanceSpec s;
  s.mode = Mode::High;
  s.clip = 0.004;
  s.sigma = s.clip / 2.0;
  s.seed = seed;
  return s;
}

DisturbanceSpec DisturbanceSpec::custom(double sigma, double clip, std::uint64_t seed) {
  if (sigma < 0.0 || clip < 0.0)
    throw std::invalid_argument("DisturbanceSpec: sigma and clip must be nonnegative");
  DisturbanceSpec s;
  s.mode = Mode::Custom;
  s.sigma = sigma;
  s.clip = clip;
  s.seed = seed;
  return s;
}

const char* to_string(DisturbanceSpec::Mode m) {
  switch (m) {
    case DisturbanceSpec::Mode::Low: return "low";
    case DisturbanceSpec::Mode::High: return "high";
    case DisturbanceSpec::Mode::Custom: return "custom";
  }
  return "?";
}

DisturbanceSpec::Mode disturbance_mode_from_string(const std::string& name) {
  if (name == "low") return DisturbanceSpec::Mode::Low;
  if (name == "high") return DisturbanceSpec::Mode::High;
  if (name == "custom") return DisturbanceSpec::Mode::Custom;
  throw std::invalid_argument("unknown disturbance mode: " + name);
}

namespace {

Vec draw_clipped(const DisturbanceSpec& spec, int dim, SplitMix64& rng) {
  Vec w(dim);
  for (int i = 0; i < dim; ++i) w[i] = spec.sigma * rng.next_normal();
  const double n = w.norm();
  if (n > spec.clip && n > 0.0) w *= spec.clip / n;
  return w;
}

}  // namespace

Vec sample_disturbance(const DisturbanceSpec& spec, int dim, std::uint64_t draw_index) {
  if (dim < 1) throw std::invalid_argument("sample_disturbance: dim must be >= 1");
  SplitMix64 rng(derive_seed(spec.seed, draw_index));
  return draw_clipped(spec, dim, rng);
}

DisturbanceStream::DisturbanceStream(const DisturbanceSpec& spec, int dim,
                                     std::uint64_t run_index)
    : spec_(spec), dim_(dim), rng_(derive_seed(spec.seed, run_index)) {
  if (dim < 1) throw std::invalid_argument("DisturbanceStream: dim must be >= 1");
}

Vec DisturbanceStream::next() { return draw_clipped(spec_, dim_, rng_); }

}  // namespace ncsafe
