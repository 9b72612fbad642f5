#pragma once

#include <Eigen/Core>
#include <deque>
#include <functional>
#include <vector>

namespace ncsafe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Discrete-time control-affine system
//   x_{k+1} = f(x_k) + g(x_k) u_k + w_k
// together with the Lipschitz metadata consumed by the tolerance bounds.
struct SystemModel {
  int state_dim = 0;
  int input_dim = 0;
  std::function<Vec(const Vec&)> f;  // drift, state -> state
  std::function<Mat(const Vec&)> g;  // input map, state -> (n x m)
  double lipschitz_f = 0.0;          // L_f, Euclidean
  double lipschitz_g = 0.0;          // L_g, induced 2-norm
  double input_norm_max = 0.0;       // u_bar > 0

  // L_d = L_f + L_g * u_bar, the per-step error propagation gain.
  double dynamics_gain() const { return lipschitz_f + lipschitz_g * input_norm_max; }
};

// Admissible input set: Euclidean ball or per-component box.
struct InputBound {
  enum class Kind { Ball, Box };
  Kind kind = Kind::Ball;
  double radius = 0.0;  // Ball
  Vec lower, upper;     // Box

  static InputBound ball(double r) {
    InputBound b;
    b.kind = Kind::Ball;
    b.radius = r;
    return b;
  }
  static InputBound box(const Vec& lo, const Vec& hi) {
    InputBound b;
    b.kind = Kind::Box;
    b.lower = lo;
    b.upper = hi;
    return b;
  }

  bool contains(const Vec& u, double tol = 1e-9) const;
  Vec project(const Vec& u) const;
  // max ||u||_2 over the set (u_bar for the bounds).
  double max_norm() const;
  // Pontryagin difference with a ball of radius delta (component-wise for
  // boxes). Throws if the result would be empty.
  InputBound tightened(double delta) const;
};

// FIFO of the inputs sent during the last tau steps, u_{k-tau}..u_{k-1}.
class InputBuffer {
 public:
  explicit InputBuffer(int delay);

  void push(const Vec& u);
  int delay() const { return delay_; }
  bool full() const { return static_cast<int>(entries_.size()) == delay_; }
  const std::deque<Vec>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

 private:
  int delay_;
  std::deque<Vec> entries_;
};

// One step of the disturbed dynamics. Dimension mismatches throw.
Vec step(const SystemModel& model, const Vec& x, const Vec& u, const Vec& w);

// Nominal rollout x_1..x_L from x0 under the given input sequence.
std::vector<Vec> rollout(const SystemModel& model, const Vec& x0,
                         const std::vector<Vec>& inputs);

// Delay-compensating predictor: rolls the nominal dynamics from the delayed
// measurement through all buffered inputs. With tau = 0 returns the input.
Vec predict(const SystemModel& model, const Vec& x_delayed, const InputBuffer& buffer);

}  // namespace ncsafe
