#include "ncsafe/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace ncsafe {

bool InputBound::contains(const Vec& u, double tol) const {
  if (kind == Kind::Ball) return u.norm() <= radius + tol;
  return (u.array() >= lower.array() - tol).all() &&
         (u.array() <= upper.array() + tol).all();
}

Vec InputBound::project(const Vec& u) const {
  if (kind == Kind::Ball) {
    const double n = u.norm();
    if (n <= radius || n == 0.0) return u;
    return u * (radius / n);
  }
  return u.cwiseMax(lower).cwiseMin(upper);
}

double InputBound::max_norm() const {
  if (kind == Kind::Ball) return radius;
  return lower.cwiseAbs().cwiseMax(upper.cwiseAbs()).norm();
}

InputBound InputBound::tightened(double delta) const {
  if (delta < 0.0) throw std::invalid_argument("InputBound::tightened: negative margin");
  InputBound out = *this;
  if (kind == Kind::Ball) {
    out.radius = radius - delta;
    if (out.radius <= 0.0) throw std::invalid_argument("InputBound::tightened: empty set");
    return out;
  }
  out.lower = lower.array() + delta;
  out.upper = upper.array() - delta;
  if ((out.lower.array() > out.upper.array()).any())
    throw std::invalid_argument("InputBound::tightened: empty set");
  return out;
}

InputBuffer::InputBuffer(int delay) : delay_(delay) {
  if (delay < 0) throw std::invalid_argument("InputBuffer: negative delay");
}

void InputBuffer::push(const Vec& u) {
  if (delay_ == 0) return;  // nothing is buffered without delay
  entries_.push_back(u);
  if (static_cast<int>(entries_.size()) > delay_) entries_.pop_front();
}

Vec step(const SystemModel& model, const Vec& x, const Vec& u, const Vec& w) {
  if (x.size() != model.state_dim) throw std::invalid_argument("step: state dimension mismatch");
  if (u.size() != model.input_dim) throw std::invalid_argument("step: input dimension mismatch");
  if (w.size() != model.state_dim) throw std::invalid_argument("step: disturbance dimension mismatch");
  return model.f(x) + model.g(x) * u + w;
}

std::vector<Vec> rollout(const SystemModel& model, const Vec& x0,
                         const std::vector<Vec>& inputs) {
  if (x0.size() != model.state_dim) throw std::invalid_argument("rollout: state dimension mismatch");
  std::vector<Vec> states;
  states.reserve(inputs.size());
  Vec x = x0;
  for (const Vec& u : inputs) {
    if (u.size() != model.input_dim)
      throw std::invalid_argument("rollout: input dimension mismatch");
    x = model.f(x) + model.g(x) * u;
    states.push_back(x);
  }
  return states;
}

Vec predict(const SystemModel& model, const Vec& x_delayed, const InputBuffer& buffer) {
  if (buffer.delay() == 0) return x_delayed;
  if (static_cast<int>(buffer.entries().size()) != buffer.delay())
    throw std::invalid_argument("predict: buffer not warmed up to the configured delay");
  Vec x = x_delayed;
  for (const Vec& u : buffer.entries()) {
    x = model.f(x) + model.g(x) * u;
  }
  return x;
}

}  // namespace ncsafe
