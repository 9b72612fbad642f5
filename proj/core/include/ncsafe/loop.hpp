#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ncsafe/barrier.hpp"
#include "ncsafe/dynamics.hpp"
#include "ncsafe/mpc.hpp"
#include "ncsafe/safety.hpp"

namespace ncsafe {

// The five controller placements compared by the simulator.
enum class Architecture { NominalMPC, LocalCBF, RemoteMPCCBF, RobustLocalCBF, Combined };

const char* to_string(Architecture a);
Architecture architecture_from_string(const std::string& name);

// Delayed measurement line plus the record of previously sent remote
// inputs; a state enqueued at step k is dequeued at step k + tau exactly.
class ChannelState {
 public:
  explicit ChannelState(int tau) : tau_(tau) {}

  void enqueue_measurement(int step, const Vec& x);
  // Returns the measurement taken tau steps ago, or nullptr during warm-up.
  const Vec* delayed_measurement(int step) const;

  struct SentInput {
    Vec u;
    bool warmup = false;
  };
  void record_sent_input(const Vec& u, bool warmup);
  const std::deque<SentInput>& input_line() const { return input_line_; }

  int tau() const { return tau_; }

 private:
  int tau_;
  std::deque<std::pair<int, Vec>> measurement_line_;
  std::deque<SentInput> input_line_;  // last tau sent inputs
};

struct StepLog {
  Vec x;        // plant state at step k
  Vec x_hat;    // remote-side estimate used at step k (empty during warm-up)
  Vec u_remote;
  Vec u_applied;
  Vec w_raw;    // disturbance before channel injection
  double h = 0.0;  // composite barrier at x
  bool intervened = false;
  bool warmup = false;
  SolveStatus mpc_status = SolveStatus::Optimal;
  SolveStatus filter_status = SolveStatus::Optimal;
  bool filter_fallback = false;
  double slack_sum = 0.0;
};

struct RunRecord {
  std::vector<StepLog> steps;
  std::vector<Vec> states;  // x_0 .. x_final (steps.size() + 1 entries)
  double min_h = 0.0;
  bool safety_violated = false;
  double peak_jerk = 0.0;  // max over k >= tau+1 of ||(u_k - u_{k-1})/ts||_inf
  std::vector<int> waypoint_steps;  // -1 when unreached
  bool reached_all = false;
  int completion_step = 0;  // executed steps
  bool aborted = false;
  std::string abort_reason;
};

// Task progression observer shared between the plant-side record and the
// remote cost (closures capture it); one instance per run.
class TaskTracker {
 public:
  virtual ~TaskTracker() = default;
  virtual void observe(const Vec& x, int step) = 0;
  virtual bool complete() const = 0;
  virtual std::vector<int> waypoint_steps() const { return {}; }
};

// Everything one closed-loop run needs. Holds per-run mutable pieces
// (warm-started MPC, task tracker), so build one LoopSpec per run.
struct LoopSpec {
  SystemModel model;
  std::shared_ptr<const BarrierSet> barriers;
  Vec x0;
  int tau = 0;
  int horizon_steps = 0;
  double ts = 1.0;
  MPCConfig mpc;  // base config; the architecture picks the variant
  FilterConfig plain_filter;
  FilterConfig robust_filter;
  Vec standby_input;  // applied while the channel warms up
  // Maps the raw disturbance sample to a state-space disturbance (e.g.
  // torque through g(x)); identity when null.
  std::function<Vec(const Vec& x, const Vec& w_raw)> inject;
  int disturbance_dim = 0;  // raw dimension; defaults to state_dim
  std::shared_ptr<TaskTracker> tracker;  // optional
};

// Local plant-side stage for one architecture: pass-through, plain filter,
// or robust filter.
FilterResult architecture_stage(Architecture arch, const LoopSpec& spec, const Vec& x,
                                const Vec& u_remote);

// Executes the full step protocol: measure, predict through the channel
// (replaying the architecture's local stage on buffered inputs), solve the
// remote variant, filter locally, step the plant, log.
RunRecord run(Architecture arch, LoopSpec& spec, const std::vector<Vec>& disturbances);

}  // namespace ncsafe
