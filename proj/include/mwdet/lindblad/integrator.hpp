#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "mwdet/core/operator.hpp"
#include "mwdet/errors.hpp"

namespace mwdet {

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
};

// Adaptive embedded Runge-Kutta 5(4), Dormand-Prince coefficients, on a
// complex state vector. Time-dependent right-hand sides are evaluated exactly
// at the stage times (no interpolation).
template <class Rhs>
class AdaptiveIntegrator {
 public:
  AdaptiveIntegrator(Rhs rhs, IntegratorOptions opt) : rhs_(std::forward<Rhs>(rhs)), opt_(opt) {}

  void start(double t, Vector y) {
    t_ = t;
    y_ = std::move(y);
    const Eigen::Index n = y_.size();
    for (Vector* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &yerr_})
      k->resize(n);
    rhs_(t_, y_, k1_);
    have_k1_ = true;
    h_ = 0.0;
    steps_ = 0;
  }

  double t() const { return t_; }
  const Vector& y() const { return y_; }

  // Replace the current state (e.g. after a quantum jump); k1 is recomputed
  // lazily on the next step.
  void set_state(Vector y) {
    y_ = std::move(y);
    have_k1_ = false;
  }

  // When enabled, the pre-step state of the latest accepted step is kept so a
  // caller can rewind and search inside that step (quantum-jump location).
  void enable_prev_capture(bool on) { capture_prev_ = on; }
  double t_prev() const { return tprev_; }
  const Vector& y_prev() const { return yprev_; }

  // Rewind/reposition to an arbitrary (t, y); the adaptive step size carries over.
  void restore(double t, Vector y) {
    t_ = t;
    y_ = std::move(y);
    have_k1_ = false;
  }

  // Integrate to exactly t_target (> t()).
  void advance_to(double t_target) {
    while (t_ < t_target) step(t_target);
  }

  // One accepted adaptive step, clamped so it does not pass t_max.
  // Returns the step size actually taken.
  double step(double t_max) {
    if (!have_k1_) {
      rhs_(t_, y_, k1_);
      have_k1_ = true;
    }
    if (h_ == 0.0) h_ = initial_step(t_max);

    for (;;) {
      if (++steps_ > opt_.max_steps)
        throw IntegrationError("integrator exceeded the step budget", t_);
      double h = std::min({h_, opt_.max_step, t_max - t_});
      if (!(h > 0.0)) throw IntegrationError("nonpositive step size", t_);
      if (h <= std::abs(t_) * 2.0 * std::numeric_limits<double>::epsilon() || h < 1e-290)
        throw IntegrationError("step size underflow", t_);

      stages(h);
      double err = error_norm();
      if (err <= 1.0) {
        if (capture_prev_) {
          tprev_ = t_;
          yprev_ = y_;
        }
        t_ += h;
        y_.swap(ynew_);
        k1_.swap(k7_);  // FSAL
        double grow = (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h_ = h * grow;
        return h;
      }
      double shrink = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      double h_next = h * shrink;
      if (h_next <= std::abs(t_) * 2.0 * std::numeric_limits<double>::epsilon() || h_next < 1e-290)
        throw IntegrationError("step size underflow", t_);
      h_ = h_next;
    }
  }

  // Single non-adaptive 5th-order step of size h from the current committed
  // state, written to `out`. Does not advance the integrator. Used for
  // locating jump times inside an accepted step.
  void probe(double h, Vector& out) {
    if (!have_k1_) {
      rhs_(t_, y_, k1_);
      have_k1_ = true;
    }
    stages(h);
    out = ynew_;
  }

 private:
  // Dormand-Prince 5(4) tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  void stages(double h) {
    ytmp_ = y_ + h * (a21 * k1_);
    rhs_(t_ + c2 * h, ytmp_, k2_);
    ytmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
    rhs_(t_ + c3 * h, ytmp_, k3_);
    ytmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    rhs_(t_ + c4 * h, ytmp_, k4_);
    ytmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs_(t_ + c5 * h, ytmp_, k5_);
    ytmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs_(t_ + h, ytmp_, k6_);
    ynew_ = y_ + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    rhs_(t_ + h, ynew_, k7_);
    yerr_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
  }

  double error_norm() const {
    const Eigen::Index n = y_.size();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double scale = opt_.atol + opt_.rtol * std::max(std::abs(y_(i)), std::abs(ynew_(i)));
      double e = std::abs(yerr_(i)) / scale;
      acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(n));
  }

  double initial_step(double t_max) const {
    double span = t_max - t_;
    double dy = 0.0, df = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      double scale = opt_.atol + opt_.rtol * std::abs(y_(i));
      dy = std::max(dy, std::abs(y_(i)) / scale);
      df = std::max(df, std::abs(k1_(i)) / scale);
    }
    double h0 = (df > 0.0) ? 0.01 * dy / df : span * 1e-6;
    if (!(h0 > 0.0)) h0 = span * 1e-6;
    return std::min(h0, span);
  }

  Rhs rhs_;
  IntegratorOptions opt_;
  double t_ = 0.0;
  double h_ = 0.0;
  double tprev_ = 0.0;
  long steps_ = 0;
  bool have_k1_ = false;
  bool capture_prev_ = false;
  Vector y_, yprev_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, yerr_;
};

}  // namespace mwdet
