#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mwdet/core/operator.hpp"

namespace mwdet {

enum class StateKind { ket, density };

// Validation tolerances for density-matrix construction. The defaults are the
// strict construction bounds; integrator outputs use relaxed floors since
// adaptive integration leaves O(tolerance) noise on the spectrum.
struct StateTolerances {
  double trace_tol = 1e-10;
  double herm_rel_tol = 1e-10;
  double eig_floor = 1e-10;  // eigenvalues must be >= -eig_floor
};

// Pure or mixed state on a tensor-product Hilbert space. Immutable.
class State {
 public:
  static State ket(SubsystemLayout l, Vector v, double norm_tol = 1e-10) {
    if (v.size() != l.total_dim()) throw std::invalid_argument("ket dimension does not match layout");
    if (std::abs(v.norm() - 1.0) > norm_tol) throw std::invalid_argument("ket is not normalized");
    return State(std::move(l), std::move(v));
  }

  static State density(SubsystemLayout l, Matrix rho, const StateTolerances& tol = {}) {
    if (rho.rows() != rho.cols() || rho.rows() != l.total_dim())
      throw std::invalid_argument("density matrix dimension does not match layout");
    double n = rho.norm();
    if (n == 0.0) throw std::invalid_argument("density matrix is zero");
    if ((rho - rho.adjoint()).norm() > tol.herm_rel_tol * n)
      throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > tol.trace_tol || std::abs(rho.trace().imag()) > tol.trace_tol)
      throw std::invalid_argument("density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol.eig_floor)
      throw std::invalid_argument("density matrix has a negative eigenvalue beyond tolerance");
    return State(std::move(l), std::move(rho));
  }

  // |n> in a single Fock subsystem of `cutoff` levels.
  static State fock_state(int cutoff, int n) {
    if (n < 0 || n >= cutoff) throw std::invalid_argument("fock level outside cutoff");
    Vector v = Vector::Zero(cutoff);
    v(n) = 1.0;
    return State(SubsystemLayout::fock(cutoff), std::move(v));
  }

  // |i> in a bare d-level subsystem.
  static State level_state(int dim, int i) {
    if (i < 0 || i >= dim) throw std::invalid_argument("level index out of range");
    Vector v = Vector::Zero(dim);
    v(i) = 1.0;
    return State(SubsystemLayout::level(dim), std::move(v));
  }

  // Thermal state of mean occupation nbar, truncated and renormalized.
  static State thermal(int cutoff, double nbar) {
    if (nbar < 0.0) throw std::invalid_argument("thermal occupation must be >= 0");
    Matrix rho = Matrix::Zero(cutoff, cutoff);
    double z = 0.0;
    for (int n = 0; n < cutoff; ++n) {
      double p = std::pow(nbar / (1.0 + nbar), n) / (1.0 + nbar);
      rho(n, n) = p;
      z += p;
    }
    rho /= z;
    return State(SubsystemLayout::fock(cutoff), std::move(rho));
  }

  // Coherent state |alpha>, truncated and renormalized.
  static State coherent(int cutoff, Complex alpha) {
    Vector v(cutoff);
    Complex amp = 1.0;
    for (int n = 0; n < cutoff; ++n) {
      if (n > 0) amp *= alpha / std::sqrt(static_cast<double>(n));
      v(n) = amp;
    }
    v *= std::exp(-0.5 * std::norm(alpha));
    v /= v.norm();
    return State(SubsystemLayout::fock(cutoff), std::move(v));
  }

  StateKind kind() const { return kind_; }
  const SubsystemLayout& layout() const { return layout_; }
  int dim() const { return layout_.total_dim(); }

  const Vector& ket_data() const {
    if (kind_ != StateKind::ket) throw std::logic_error("state is not a ket");
    return v_;
  }
  // Density matrix view; promotes kets.
  Matrix density_matrix() const {
    if (kind_ == StateKind::ket) return v_ * v_.adjoint();
    return m_;
  }

 private:
  State(SubsystemLayout l, Vector v) : kind_(StateKind::ket), layout_(std::move(l)), v_(std::move(v)) {}
  State(SubsystemLayout l, Matrix m) : kind_(StateKind::density), layout_(std::move(l)), m_(std::move(m)) {}

  StateKind kind_;
  SubsystemLayout layout_;
  Vector v_;
  Matrix m_;
};

// Product state in list order (ket if all factors are kets).
inline State tensor(const std::vector<State>& states) {
  if (states.empty()) throw std::invalid_argument("tensor of empty state list");
  bool all_kets = true;
  for (const auto& s : states)
    if (s.kind() != StateKind::ket) all_kets = false;

  SubsystemLayout l = states.front().layout();
  for (std::size_t i = 1; i < states.size(); ++i) l = l.concat(states[i].layout());

  if (all_kets) {
    Vector acc = states.front().ket_data();
    for (std::size_t i = 1; i < states.size(); ++i) {
      const Vector& b = states[i].ket_data();
      Vector next(acc.size() * b.size());
      for (Eigen::Index r = 0; r < acc.size(); ++r) next.segment(r * b.size(), b.size()) = acc(r) * b;
      acc = std::move(next);
    }
    return State::ket(std::move(l), std::move(acc));
  }
  Matrix acc = states.front().density_matrix();
  for (std::size_t i = 1; i < states.size(); ++i) acc = kron(acc, states[i].density_matrix());
  return State::density(std::move(l), std::move(acc));
}

// Reduced density matrix over the kept subsystems (indices strictly
// increasing). Trace is preserved exactly up to floating-point addition.
inline State partial_trace(const State& s, const std::vector<int>& keep) {
  const auto& layout = s.layout();
  const int m = layout.subsystems();
  if (keep.empty()) throw std::invalid_argument("partial_trace must keep at least one subsystem");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] < 0 || keep[i] >= m) throw std::invalid_argument("partial_trace keep index out of range");
    if (i > 0 && keep[i] <= keep[i - 1])
      throw std::invalid_argument("partial_trace keep indices must be strictly increasing");
  }

  std::vector<int> dims(m), strides(m);
  for (int i = 0; i < m; ++i) dims[i] = layout.at(i).dim;
  strides[m - 1] = 1;
  for (int i = m - 2; i >= 0; --i) strides[i] = strides[i + 1] * dims[i + 1];

  std::vector<int> traced;
  std::vector<bool> kept(m, false);
  for (int k : keep) kept[k] = true;
  for (int i = 0; i < m; ++i)
    if (!kept[i]) traced.push_back(i);

  std::vector<Subsystem> out_parts;
  for (int k : keep) out_parts.push_back(layout.at(k));
  SubsystemLayout out_layout(out_parts);
  const int dk = out_layout.total_dim();

  // Flat offsets of every kept multi-index and every traced multi-index.
  auto enumerate = [&](const std::vector<int>& subs) {
    std::vector<int> offsets{0};
    for (int sidx : subs) {
      std::vector<int> next;
      next.reserve(offsets.size() * dims[sidx]);
      for (int base : offsets)
        for (int v = 0; v < dims[sidx]; ++v) next.push_back(base + v * strides[sidx]);
      offsets = std::move(next);
    }
    return offsets;
  };
  std::vector<int> keep_off = enumerate(keep);
  std::vector<int> traced_off = enumerate(traced);

  Matrix rho = s.density_matrix();
  Matrix out = Matrix::Zero(dk, dk);
  for (int i = 0; i < dk; ++i)
    for (int j = 0; j < dk; ++j) {
      Complex acc = 0.0;
      for (int t : traced_off) acc += rho(keep_off[i] + t, keep_off[j] + t);
      out(i, j) = acc;
    }
  StateTolerances tol;
  tol.trace_tol = 1e-9;
  tol.herm_rel_tol = 1e-9;
  tol.eig_floor = 1e-7;
  return State::density(std::move(out_layout), std::move(out), tol);
}

struct FidelityValue {
  double value = 0.0;
};

namespace detail {

// Hermitian square root with eigenvalue clamping: values at or below the
// relative noise floor are treated as exact zeros (integrated states carry
// O(1e-9) negatives; sqrt of clamped noise would pollute the result).
inline Matrix psd_sqrt(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  double floor = ev.cwiseAbs().maxCoeff() * 1e-14;
  Eigen::VectorXd s = ev.unaryExpr([floor](double x) { return x > floor ? std::sqrt(x) : 0.0; });
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// Uhlmann fidelity |Tr sqrt(sqrt(ri) rf sqrt(ri))|; kets are promoted.
// Evaluated as the trace norm ||sqrt(ri) sqrt(rf)||_tr, which is the same
// quantity with better conditioning near rank deficiency.
inline FidelityValue fidelity(const State& a, const State& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("fidelity: state dimension mismatch");

  if (a.kind() == StateKind::ket && b.kind() == StateKind::ket) {
    double f = std::abs(a.ket_data().dot(b.ket_data()));
    return FidelityValue{std::min(f, 1.0)};
  }
  if (a.kind() == StateKind::ket || b.kind() == StateKind::ket) {
    const State& pure = (a.kind() == StateKind::ket) ? a : b;
    const State& mixed = (a.kind() == StateKind::ket) ? b : a;
    const Vector& v = pure.ket_data();
    double f = std::sqrt(std::max(0.0, v.dot(mixed.density_matrix() * v).real()));
    return FidelityValue{std::min(f, 1.0)};
  }

  Matrix prod = detail::psd_sqrt(a.density_matrix()) * detail::psd_sqrt(b.density_matrix());
  Eigen::JacobiSVD<Matrix> svd(prod);
  double f = svd.singularValues().sum();
  return FidelityValue{std::min(f, 1.0)};
}

// Tr(op rho) or <psi|op|psi>.
inline Complex expectation(const Operator& op, const State& s) {
  if (op.dim() != s.dim()) throw std::invalid_argument("expectation: dimension mismatch");
  if (s.kind() == StateKind::ket) {
    const Vector& v = s.ket_data();
    return v.dot(op.mat() * v);
  }
  return (op.mat() * s.density_matrix()).trace();
}

}  // namespace mwdet
