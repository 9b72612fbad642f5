#include "ncsafe/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ncsafe {

namespace {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& value, const std::string& where,
                                  int line) {
  std::istringstream ss(value);
  std::vector<double> out;
  double v;
  while (ss >> v) out.push_back(v);
  std::string rest;
  if (ss.fail() && !ss.eof()) {
    throw ParseError(where + ":" + std::to_string(line) + ": malformed number in '" +
                     value + "'");
  }
  return out;
}

double parse_one(const std::string& value, const std::string& where, int line) {
  const auto nums = parse_numbers(value, where, line);
  if (nums.size() != 1)
    throw ParseError(where + ":" + std::to_string(line) + ": expected one number, got '" +
                     value + "'");
  return nums[0];
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_scenario_string(const std::string& text, const std::string& origin) {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"arm",
       {"link_lengths", "link_masses", "damping", "ts", "q0", "joint_vel_limit",
        "input_limit", "epsilon", "reach_threshold", "sim_steps"}},
      {"obstacles", {"obstacle"}},
      {"waypoints", {"waypoint"}},
      {"network", {"tau"}},
      {"mpc",
       {"horizon", "gamma", "rho", "weight_position", "weight_velocity", "weight_input",
        "weight_state_penalty", "screen_margin"}},
      {"disturbance", {"mode", "sigma", "clip", "seed"}},
      {"run", {"n_runs", "architectures"}},
  };

  ExperimentConfig cfg;
  cfg.scenario.obstacles.clear();
  cfg.scenario.waypoints.clear();
  cfg.run.architectures.clear();

  std::set<std::string> seen_sections;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  double sigma = -1.0, clip = -1.0;
  auto mode = DisturbanceSpec::Mode::Custom;
  std::uint64_t dseed = 0;
  bool mode_set = false;

  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']')
        throw ParseError(origin + ":" + std::to_string(line) + ": unterminated section");
      section = trim(s.substr(1, s.size() - 2));
      if (schema.find(section) == schema.end())
        throw ParseError(origin + ":" + std::to_string(line) + ": unknown section [" +
                         section + "]");
      seen_sections.insert(section);
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(line) + ": expected key = value");
    if (section.empty())
      throw ParseError(origin + ":" + std::to_string(line) + ": key outside any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (schema.at(section).count(key) == 0)
      throw ParseError(origin + ":" + std::to_string(line) + ": unknown key '" + key +
                       "' in [" + section + "]");

    auto& sc = cfg.scenario;
    if (section == "arm") {
      if (key == "link_lengths" || key == "link_masses" || key == "q0") {
        const auto nums = parse_numbers(value, origin, line);
        if (nums.size() != 3)
          throw ParseError(origin + ":" + std::to_string(line) + ": '" + key +
                           "' needs three numbers");
        robot::Vector3d v(nums[0], nums[1], nums[2]);
        if (key == "link_lengths") sc.arm.link_lengths = v;
        else if (key == "link_masses") sc.arm.link_masses = v;
        else sc.q0 = v;
      } else if (key == "damping") sc.arm.damping = parse_one(value, origin, line);
      else if (key == "ts") sc.arm.ts = parse_one(value, origin, line);
      else if (key == "joint_vel_limit") sc.joint_vel_limit = parse_one(value, origin, line);
      else if (key == "input_limit") sc.input_limit = parse_one(value, origin, line);
      else if (key == "epsilon") sc.epsilon = parse_one(value, origin, line);
      else if (key == "reach_threshold") sc.reach_threshold = parse_one(value, origin, line);
      else if (key == "sim_steps") sc.sim_horizon_steps = static_cast<int>(parse_one(value, origin, line));
    } else if (section == "obstacles") {
      const auto nums = parse_numbers(value, origin, line);
      if (nums.size() != 3)
        throw ParseError(origin + ":" + std::to_string(line) +
                         ": obstacle needs 'cx cy radius'");
      sc.obstacles.push_back({robot::Vector2d(nums[0], nums[1]), nums[2]});
    } else if (section == "waypoints") {
      const auto nums = parse_numbers(value, origin, line);
      if (nums.size() != 2)
        throw ParseError(origin + ":" + std::to_string(line) + ": waypoint needs 'x y'");
      sc.waypoints.push_back(robot::Vector2d(nums[0], nums[1]));
    } else if (section == "network") {
      cfg.tau = static_cast<int>(parse_one(value, origin, line));
      if (cfg.tau < 0)
        throw ParseError(origin + ":" + std::to_string(line) + ": tau must be >= 0");
    } else if (section == "mpc") {
      if (key == "horizon") cfg.mpc.horizon = static_cast<int>(parse_one(value, origin, line));
      else if (key == "gamma") cfg.mpc.gamma = parse_one(value, origin, line);
      else if (key == "rho") cfg.mpc.rho = parse_one(value, origin, line);
      else if (key == "weight_position") cfg.mpc.weight_position = parse_one(value, origin, line);
      else if (key == "weight_velocity") cfg.mpc.weight_velocity = parse_one(value, origin, line);
      else if (key == "weight_input") cfg.mpc.weight_input = parse_one(value, origin, line);
      else if (key == "weight_state_penalty")
        cfg.mpc.weight_state_penalty = parse_one(value, origin, line);
      else if (key == "screen_margin")
        cfg.mpc.barrier_screen_margin = parse_one(value, origin, line);
    } else if (section == "disturbance") {
      if (key == "mode") {
        try {
          mode = disturbance_mode_from_string(value);
        } catch (const std::exception&) {
          throw ParseError(origin + ":" + std::to_string(line) +
                           ": unknown disturbance mode '" + value + "'");
        }
        mode_set = true;
      } else if (key == "sigma") sigma = parse_one(value, origin, line);
      else if (key == "clip") clip = parse_one(value, origin, line);
      else if (key == "seed") dseed = static_cast<std::uint64_t>(parse_one(value, origin, line));
    } else if (section == "run") {
      if (key == "n_runs") cfg.run.n_runs = static_cast<int>(parse_one(value, origin, line));
      else if (key == "architectures") {
        std::istringstream as(value);
        std::string name;
        while (as >> name) {
          try {
            cfg.run.architectures.push_back(architecture_from_string(name));
          } catch (const std::exception&) {
            throw ParseError(origin + ":" + std::to_string(line) +
                             ": unknown architecture '" + name + "'");
          }
        }
      }
    }
  }

  for (const char* required : {"arm", "obstacles", "waypoints", "network", "mpc",
                               "disturbance", "run"}) {
    if (seen_sections.count(required) == 0)
      throw ParseError(origin + ": missing [" + std::string(required) + "] section");
  }
  if (cfg.scenario.obstacles.empty())
    throw ParseError(origin + ": [obstacles] section lists no obstacle");
  if (cfg.scenario.waypoints.empty())
    throw ParseError(origin + ": [waypoints] section lists no waypoint");
  if (cfg.run.architectures.empty())
    throw ParseError(origin + ": [run] lists no architectures");

  if (mode_set && mode == DisturbanceSpec::Mode::Low) {
    cfg.disturbance = DisturbanceSpec::low(dseed);
    if (sigma >= 0.0) cfg.disturbance.sigma = sigma;
    if (clip >= 0.0) cfg.disturbance.clip = clip;
  } else if (mode_set && mode == DisturbanceSpec::Mode::High) {
    cfg.disturbance = DisturbanceSpec::high(dseed);
    if (sigma >= 0.0) cfg.disturbance.sigma = sigma;
    if (clip >= 0.0) cfg.disturbance.clip = clip;
  } else {
    cfg.disturbance = DisturbanceSpec::custom(std::max(sigma, 0.0), std::max(clip, 0.0), dseed);
  }
  return cfg;
}

ExperimentConfig parse_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenario_string(buf.str(), path);
}

std::string serialize_scenario(const ExperimentConfig& cfg) {
  std::ostringstream out;
  const auto& sc = cfg.scenario;
  out << "[arm]\n";
  out << "link_lengths = " << fmt(sc.arm.link_lengths[0]) << " "
      << fmt(sc.arm.link_lengths[1]) << " " << fmt(sc.arm.link_lengths[2]) << "\n";
  out << "link_masses = " << fmt(sc.arm.link_masses[0]) << " "
      << fmt(sc.arm.link_masses[1]) << " " << fmt(sc.arm.link_masses[2]) << "\n";
  out << "damping = " << fmt(sc.arm.damping) << "\n";
  out << "ts = " << fmt(sc.arm.ts) << "\n";
  out << "q0 = " << fmt(sc.q0[0]) << " " << fmt(sc.q0[1]) << " " << fmt(sc.q0[2]) << "\n";
  out << "joint_vel_limit = " << fmt(sc.joint_vel_limit) << "\n";
  out << "input_limit = " << fmt(sc.input_limit) << "\n";
  out << "epsilon = " << fmt(sc.epsilon) << "\n";
  out << "reach_threshold = " << fmt(sc.reach_threshold) << "\n";
  out << "sim_steps = " << sc.sim_horizon_steps << "\n";
  out << "\n[obstacles]\n";
  for (const auto& o : sc.obstacles)
    out << "obstacle = " << fmt(o.center.x()) << " " << fmt(o.center.y()) << " "
        << fmt(o.radius) << "\n";
  out << "\n[waypoints]\n";
  for (const auto& w : sc.waypoints)
    out << "waypoint = " << fmt(w.x()) << " " << fmt(w.y()) << "\n";
  out << "\n[network]\n";
  out << "tau = " << cfg.tau << "\n";
  out << "\n[mpc]\n";
  out << "horizon = " << cfg.mpc.horizon << "\n";
  out << "gamma = " << fmt(cfg.mpc.gamma) << "\n";
  out << "rho = " << fmt(cfg.mpc.rho) << "\n";
  out << "weight_position = " << fmt(cfg.mpc.weight_position) << "\n";
  out << "weight_velocity = " << fmt(cfg.mpc.weight_velocity) << "\n";
  out << "weight_input = " << fmt(cfg.mpc.weight_input) << "\n";
  out << "weight_state_penalty = " << fmt(cfg.mpc.weight_state_penalty) << "\n";
  out << "screen_margin = " << fmt(cfg.mpc.barrier_screen_margin) << "\n";
  out << "\n[disturbance]\n";
  out << "mode = " << to_string(cfg.disturbance.mode) << "\n";
  out << "sigma = " << fmt(cfg.disturbance.sigma) << "\n";
  out << "clip = " << fmt(cfg.disturbance.clip) << "\n";
  out << "seed = " << cfg.disturbance.seed << "\n";
  out << "\n[run]\n";
  out << "n_runs = " << cfg.run.n_runs << "\n";
  out << "architectures =";
  for (const auto a : cfg.run.architectures) out << " " << to_string(a);
  out << "\n";
  return out.str();
}

}  // namespace ncsafe
