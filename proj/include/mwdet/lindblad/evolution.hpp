#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mwdet/core/state.hpp"
#include "mwdet/errors.hpp"
#include "mwdet/lindblad/hamiltonian.hpp"
#include "mwdet/lindblad/integrator.hpp"

namespace mwdet {

// Jump operator plus rate feeding the dissipator
//   (rate/2) * (2 c rho c^dag - {c^dag c, rho}).
// Dephasing channels are expressed as ordinary jump operators (projectors or
// projector differences); there is no special casing.
struct CollapseChannel {
  Operator jump;
  double rate = 0.0;  // rad/s, >= 0
};

struct EvolutionSpec {
  TimeDependentHamiltonian h;
  std::vector<CollapseChannel> channels;
  std::vector<double> t_grid;  // seconds, strictly increasing
  std::vector<std::pair<std::string, Operator>> observables;
  State initial;
  IntegratorOptions integrator;
};

// Time grid, recorded expectation values, terminal state and named scalars of
// one protocol run.
struct ProtocolResult {
  std::vector<double> t_grid;
  std::vector<std::string> record_names;
  std::vector<std::vector<double>> records;  // records[k][i]: observable k at grid point i
  std::optional<State> final_state;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::pair<std::string, std::string>> notes;

  const std::vector<double>& record(const std::string& name) const {
    for (std::size_t k = 0; k < record_names.size(); ++k)
      if (record_names[k] == name) return records[k];
    throw std::out_of_range("no record named " + name);
  }
  double scalar(const std::string& name) const {
    for (const auto& [k, v] : scalars)
      if (k == name) return v;
    throw std::out_of_range("no scalar named " + name);
  }
  void set_scalar(const std::string& name, double v) { scalars.emplace_back(name, v); }
  void set_note(const std::string& name, const std::string& v) { notes.emplace_back(name, v); }
};

namespace detail {

inline void validate_spec(const EvolutionSpec& spec) {
  if (spec.t_grid.size() < 2) throw std::invalid_argument("time grid needs at least two points");
  for (std::size_t i = 1; i < spec.t_grid.size(); ++i)
    if (!(spec.t_grid[i] > spec.t_grid[i - 1]))
      throw std::invalid_argument("time grid must be strictly increasing");
  if (!(spec.initial.layout() == spec.h.layout()))
    throw std::invalid_argument("initial state layout does not match Hamiltonian");
  for (const auto& ch : spec.channels) {
    if (ch.rate < 0.0) throw std::invalid_argument("collapse rate must be >= 0");
    if (!(ch.jump.layout() == spec.h.layout()))
      throw std::invalid_argument("collapse channel layout mismatch");
  }
  for (const auto& [name, op] : spec.observables)
    if (!(op.layout() == spec.h.layout()))
      throw std::invalid_argument("observable layout mismatch: " + name);
}

// d rho/dt = -i[H, rho] + sum_i (rate_i/2)(2 c rho c^dag - {c^dag c, rho}),
// on the column-stacked density matrix.
class LindbladRhs {
 public:
  LindbladRhs(const TimeDependentHamiltonian& h, const std::vector<CollapseChannel>& channels)
      : h_(&h), d_(h.dim()) {
    for (const auto& ch : channels) {
      if (ch.rate == 0.0) continue;
      c_.push_back(ch.jump.mat());
      cdag_.push_back(ch.jump.mat().adjoint());
      half_cdc_.push_back(0.5 * ch.rate * (cdag_.back() * c_.back()));
      rate_.push_back(ch.rate);
    }
    ham_.resize(d_, d_);
    t1_.resize(d_, d_);
    t2_.resize(d_, d_);
  }

  void operator()(double t, const Vector& y, Vector& dy) const {
    Eigen::Map<const Matrix> rho(y.data(), d_, d_);
    dy.resize(y.size());
    Eigen::Map<Matrix> out(dy.data(), d_, d_);

    h_->materialize(t, ham_);
    t1_.noalias() = ham_ * rho;
    t1_.noalias() -= rho * ham_;
    out = Complex(0.0, -1.0) * t1_;

    for (std::size_t i = 0; i < c_.size(); ++i) {
      t1_.noalias() = c_[i] * rho;
      t2_.noalias() = t1_ * cdag_[i];
      out.noalias() += rate_[i] * t2_;
      out.noalias() -= half_cdc_[i] * rho;
      out.noalias() -= rho * half_cdc_[i];
    }
  }

 private:
  const TimeDependentHamiltonian* h_;
  int d_;
  std::vector<Matrix> c_, cdag_, half_cdc_;
  std::vector<double> rate_;
  mutable Matrix ham_, t1_, t2_;
};

}  // namespace detail

// Integrates the Lindblad master equation over the grid, recording the named
// observables at every grid point. Throws IntegrationError if the trace
// drifts beyond 1e-8 or the step size underflows.
inline ProtocolResult evolve_master(const EvolutionSpec& spec) {
  detail::validate_spec(spec);
  const int d = spec.h.dim();

  Matrix rho0 = spec.initial.density_matrix();
  Vector y(static_cast<Eigen::Index>(d) * d);
  Eigen::Map<Matrix>(y.data(), d, d) = rho0;

  detail::LindbladRhs rhs(spec.h, spec.channels);
  AdaptiveIntegrator<detail::LindbladRhs&> stepper(rhs, spec.integrator);
  stepper.start(spec.t_grid.front(), std::move(y));

  ProtocolResult result;
  result.t_grid = spec.t_grid;
  for (const auto& [name, op] : spec.observables) {
    result.record_names.push_back(name);
    result.records.emplace_back();
    result.records.back().reserve(spec.t_grid.size());
  }

  Matrix ham(d, d);
  for (std::size_t gi = 0; gi < spec.t_grid.size(); ++gi) {
    double t = spec.t_grid[gi];
    if (gi > 0) stepper.advance_to(t);

    // Hermiticity of the assembled Hamiltonian, spot-checked on the grid.
    spec.h.materialize(t, ham);
    double hnorm = ham.norm();
    if (hnorm > 0.0 && (ham - ham.adjoint()).norm() > 1e-10 * hnorm)
      throw std::invalid_argument("assembled Hamiltonian is not Hermitian on the grid");

    Eigen::Map<const Matrix> rho(stepper.y().data(), d, d);
    Complex tr = rho.trace();
    if (std::abs(tr - 1.0) > 1e-8)
      throw IntegrationError("density-matrix trace drifted beyond 1e-8", t);
    for (std::size_t k = 0; k < spec.observables.size(); ++k)
      result.records[k].push_back((spec.observables[k].second.mat() * rho).trace().real());
  }

  Eigen::Map<const Matrix> rho_final(stepper.y().data(), d, d);
  StateTolerances tol;
  tol.trace_tol = 1e-8;
  tol.herm_rel_tol = 1e-8;
  tol.eig_floor = 1e-7;
  result.final_state = State::density(spec.h.layout(), rho_final, tol);
  return result;
}

}  // namespace mwdet
