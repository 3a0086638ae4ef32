#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mwdet/lindblad/evolution.hpp"
#include "mwdet/parallel.hpp"
#include "mwdet/rng.hpp"

namespace mwdet {

struct TrajectoryRecord {
  std::vector<double> jump_times;
  std::vector<int> jump_channels;                 // index into spec.channels
  Vector terminal;                                // normalized ket at the final grid point
  std::vector<std::vector<double>> series;        // series[k][i]: observable k at grid point i
};

struct TrajectoryEnsemble {
  std::vector<double> t_grid;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> mean_series;   // index-ordered reduction, scheduling-independent
  std::vector<TrajectoryRecord> trajectories;
};

namespace detail {

struct JumpOps {
  std::vector<Matrix> c;
  std::vector<double> rate;
  std::vector<int> channel_index;
  Matrix half_damping;  // (1/2) sum_i rate_i c_i^dag c_i
};

inline JumpOps build_jump_ops(const EvolutionSpec& spec) {
  const int d = spec.h.dim();
  JumpOps ops;
  ops.half_damping = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < spec.channels.size(); ++i) {
    const auto& ch = spec.channels[i];
    if (ch.rate == 0.0) continue;
    ops.c.push_back(ch.jump.mat());
    ops.rate.push_back(ch.rate);
    ops.channel_index.push_back(static_cast<int>(i));
    ops.half_damping.noalias() += (0.5 * ch.rate) * (ch.jump.mat().adjoint() * ch.jump.mat());
  }
  return ops;
}

struct CrossingResult {
  bool crossed = false;
  double t = 0.0;
};

// Non-Hermitian effective generator for the no-jump evolution.
class EffectiveRhs {
 public:
  EffectiveRhs(const TimeDependentHamiltonian& h, const Matrix& half_damping)
      : h_(&h), damping_(half_damping), d_(h.dim()) {
    ham_.resize(d_, d_);
    gen_.resize(d_, d_);
  }

  void operator()(double t, const Vector& y, Vector& dy) const {
    h_->materialize(t, ham_);
    gen_ = Complex(0.0, -1.0) * ham_;
    gen_ -= damping_;
    dy.noalias() = gen_ * y;
  }

 private:
  const TimeDependentHamiltonian* h_;
  Matrix damping_;
  int d_;
  mutable Matrix ham_, gen_;
};

// Backend for time-dependent Hamiltonians: adaptive RK with a bisection on
// the accepted step that brackets the norm crossing. ||psi||^2 is
// non-increasing, so bisection is safe.
class RkBackend {
 public:
  RkBackend(const EvolutionSpec& spec, const JumpOps& ops)
      : rhs_(spec.h, ops.half_damping), stepper_(rhs_, spec.integrator) {
    stepper_.enable_prev_capture(true);
  }

  void start(double t, Vector psi) { stepper_.start(t, std::move(psi)); }
  void set(double t, Vector psi) { stepper_.restore(t, std::move(psi)); }
  double t() const { return stepper_.t(); }
  const Vector& psi() const { return stepper_.y(); }

  CrossingResult advance_until(double target, double threshold) {
    while (stepper_.t() < target) {
      double h = stepper_.step(target);
      if (stepper_.y().squaredNorm() < threshold) {
        double t0 = stepper_.t_prev();
        Vector y0 = stepper_.y_prev();
        stepper_.restore(t0, std::move(y0));
        double lo = 0.0, hi = h;
        Vector trial;
        for (int it = 0; it < 80 && (hi - lo) > 1e-13 * h; ++it) {
          double mid = 0.5 * (lo + hi);
          stepper_.probe(mid, trial);
          if (trial.squaredNorm() < threshold)
            hi = mid;
          else
            lo = mid;
        }
        stepper_.probe(hi, trial);
        double t_cross = t0 + hi;
        stepper_.restore(t_cross, std::move(trial));
        return {true, t_cross};
      }
    }
    return {false, target};
  }

 private:
  EffectiveRhs rhs_;
  AdaptiveIntegrator<EffectiveRhs&> stepper_;
};

// Backend for time-independent Hamiltonians: one dense eigendecomposition of
// the effective generator shared by all trajectories, then exact propagation
// psi(t) = V exp(Lambda (t - t0)) V^-1 psi(t0) with big jump-to-jump steps.
struct ExpmCore {
  Matrix v, v_inv;
  Vector lambda;

  explicit ExpmCore(const EvolutionSpec& spec, const JumpOps& ops) {
    const int d = spec.h.dim();
    Matrix ham(d, d);
    spec.h.materialize(spec.t_grid.front(), ham);
    Matrix gen = Complex(0.0, -1.0) * ham - ops.half_damping;
    Eigen::ComplexEigenSolver<Matrix> es(gen);
    if (es.info() != Eigen::Success)
      throw IntegrationError("eigendecomposition of the effective generator failed",
                             spec.t_grid.front());
    v = es.eigenvectors();
    lambda = es.eigenvalues();
    v_inv = v.inverse();
  }
};

class ExpmBackend {
 public:
  explicit ExpmBackend(const ExpmCore& core) : core_(&core) {}

  void start(double t, Vector psi) { rebase(t, std::move(psi)); }
  void set(double t, Vector psi) { rebase(t, std::move(psi)); }
  double t() const { return t_cur_; }
  const Vector& psi() const { return psi_cur_; }

  CrossingResult advance_until(double target, double threshold) {
    Vector at_target = at(target);
    if (at_target.squaredNorm() >= threshold) {
      t_cur_ = target;
      psi_cur_ = std::move(at_target);
      return {false, target};
    }
    double lo = t_cur_, hi = target;
    for (int it = 0; it < 128; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (at(mid).squaredNorm() < threshold)
        hi = mid;
      else
        lo = mid;
    }
    t_cur_ = hi;
    psi_cur_ = at(hi);
    return {true, hi};
  }

 private:
  Vector at(double t) const {
    return core_->v * ((core_->lambda.array() * (t - t_base_)).exp() * phi_.array()).matrix();
  }

  void rebase(double t, Vector psi) {
    t_base_ = t;
    t_cur_ = t;
    phi_ = core_->v_inv * psi;
    psi_cur_ = std::move(psi);
  }

  const ExpmCore* core_;
  double t_base_ = 0.0, t_cur_ = 0.0;
  Vector phi_, psi_cur_;
};

template <class Backend>
TrajectoryRecord run_trajectory(const EvolutionSpec& spec, const JumpOps& ops, Backend& backend,
                                std::mt19937_64& rng) {
  const auto& grid = spec.t_grid;
  const std::size_t n_obs = spec.observables.size();

  TrajectoryRecord rec;
  rec.series.assign(n_obs, std::vector<double>(grid.size(), 0.0));

  backend.start(grid.front(), spec.initial.ket_data());
  auto record = [&](std::size_t gi) {
    const Vector& y = backend.psi();
    double n2 = y.squaredNorm();
    for (std::size_t k = 0; k < n_obs; ++k)
      rec.series[k][gi] = y.dot(spec.observables[k].second.mat() * y).real() / n2;
  };
  record(0);

  double r = uniform01(rng);
  for (std::size_t gi = 1; gi < grid.size(); ++gi) {
    for (;;) {
      CrossingResult res = backend.advance_until(grid[gi], r);
      if (!res.crossed) break;

      const Vector& at = backend.psi();
      double wsum = 0.0;
      std::vector<double> w(ops.c.size());
      for (std::size_t i = 0; i < ops.c.size(); ++i) {
        w[i] = ops.rate[i] * (ops.c[i] * at).squaredNorm();
        wsum += w[i];
      }
      if (!(wsum > 0.0))
        throw IntegrationError("quantum jump with vanishing channel weights", res.t);
      double u = uniform01(rng) * wsum;
      std::size_t pick = w.size() - 1;
      double acc = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
      Vector jumped = ops.c[pick] * at;
      jumped /= jumped.norm();
      rec.jump_times.push_back(res.t);
      rec.jump_channels.push_back(ops.channel_index[pick]);
      backend.set(res.t, std::move(jumped));
      r = uniform01(rng);
    }
    record(gi);
  }

  rec.terminal = backend.psi() / backend.psi().norm();
  return rec;
}

}  // namespace detail

// Monte Carlo wavefunction unraveling of the master equation: no-jump
// evolution under the effective non-Hermitian Hamiltonian, a jump when the
// squared norm crosses a pre-drawn uniform variate, channel chosen
// proportionally to rate * ||c psi||^2. Trajectory k draws from the stream
// derived from (seed, k), so results do not depend on thread scheduling.
inline TrajectoryEnsemble evolve_trajectories(const EvolutionSpec& spec, int n_traj,
                                              std::uint64_t seed) {
  detail::validate_spec(spec);
  if (n_traj < 1) throw PreconditionError("n_traj must be >= 1");
  if (spec.initial.kind() != StateKind::ket)
    throw PreconditionError("trajectory unraveling needs a pure initial state");

  detail::JumpOps ops = detail::build_jump_ops(spec);

  TrajectoryEnsemble ens;
  ens.t_grid = spec.t_grid;
  for (const auto& [name, op] : spec.observables) ens.observable_names.push_back(name);
  ens.trajectories.resize(static_cast<std::size_t>(n_traj));

  if (spec.h.time_dependent()) {
    parallel_for(static_cast<std::size_t>(n_traj), [&](std::size_t i) {
      std::mt19937_64 rng = make_rng(seed, i);
      detail::RkBackend backend(spec, ops);
      ens.trajectories[i] = detail::run_trajectory(spec, ops, backend, rng);
    });
  } else {
    detail::ExpmCore core(spec, ops);
    parallel_for(static_cast<std::size_t>(n_traj), [&](std::size_t i) {
      std::mt19937_64 rng = make_rng(seed, i);
      detail::ExpmBackend backend(core);
      ens.trajectories[i] = detail::run_trajectory(spec, ops, backend, rng);
    });
  }

  const std::size_t n_obs = spec.observables.size();
  ens.mean_series.assign(n_obs, std::vector<double>(spec.t_grid.size(), 0.0));
  for (const auto& rec : ens.trajectories)
    for (std::size_t k = 0; k < n_obs; ++k)
      for (std::size_t i = 0; i < spec.t_grid.size(); ++i)
        ens.mean_series[k][i] += rec.series[k][i];
  for (auto& series : ens.mean_series)
    for (double& v : series) v /= static_cast<double>(n_traj);
  return ens;
}

}  // namespace mwdet
