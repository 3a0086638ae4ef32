#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mwdet/core/layout.hpp"

namespace mwdet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

// Dense operator on a tensor-product Hilbert space, tagged with its layout.
// Immutable after construction.
class Operator {
 public:
  Operator(SubsystemLayout layout, Matrix m) : layout_(std::move(layout)), m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("operator matrix must be square");
    if (m_.rows() != layout_.total_dim())
      throw std::invalid_argument("operator dimension does not match layout");
  }

  static Operator identity(const SubsystemLayout& l) {
    return Operator(l, Matrix::Identity(l.total_dim(), l.total_dim()));
  }
  static Operator zero(const SubsystemLayout& l) {
    return Operator(l, Matrix::Zero(l.total_dim(), l.total_dim()));
  }

  // Truncated bosonic annihilation operator on `cutoff` Fock levels.
  static Operator annihilation(int cutoff) {
    Matrix a = Matrix::Zero(cutoff, cutoff);
    for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return Operator(SubsystemLayout::fock(cutoff), a);
  }

  static Operator number(int cutoff) {
    Matrix n = Matrix::Zero(cutoff, cutoff);
    for (int k = 0; k < cutoff; ++k) n(k, k) = static_cast<double>(k);
    return Operator(SubsystemLayout::fock(cutoff), n);
  }

  // |i><j| on a bare d-level subsystem.
  static Operator ket_bra(int dim, int i, int j, bool fock = false) {
    if (i < 0 || j < 0 || i >= dim || j >= dim) throw std::invalid_argument("ket_bra index out of range");
    Matrix m = Matrix::Zero(dim, dim);
    m(i, j) = 1.0;
    return Operator(SubsystemLayout({Subsystem{dim, fock}}), m);
  }

  static Operator projector(int dim, int i, bool fock = false) { return ket_bra(dim, i, i, fock); }

  const SubsystemLayout& layout() const { return layout_; }
  const Matrix& mat() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  Operator adjoint() const { return Operator(layout_, m_.adjoint()); }
  Complex trace() const { return m_.trace(); }

  bool is_hermitian(double rel_tol = 1e-12) const {
    double n = m_.norm();
    if (n == 0.0) return true;
    return (m_ - m_.adjoint()).norm() <= rel_tol * n;
  }

  // Hamiltonian-tagged operators must pass this before use.
  const Operator& require_hermitian(double rel_tol = 1e-12) const {
    if (!is_hermitian(rel_tol)) throw std::invalid_argument("operator is not Hermitian");
    return *this;
  }

  Operator operator+(const Operator& o) const {
    require_same_layout(o);
    return Operator(layout_, m_ + o.m_);
  }
  Operator operator-(const Operator& o) const {
    require_same_layout(o);
    return Operator(layout_, m_ - o.m_);
  }
  Operator operator*(const Operator& o) const {
    require_same_layout(o);
    return Operator(layout_, m_ * o.m_);
  }
  Operator operator-() const { return Operator(layout_, -m_); }

  friend Operator operator*(Complex s, const Operator& o) { return Operator(o.layout_, s * o.m_); }
  friend Operator operator*(double s, const Operator& o) { return Operator(o.layout_, s * o.m_); }

 private:
  void require_same_layout(const Operator& o) const {
    if (!(layout_ == o.layout_)) throw std::invalid_argument("operator layout mismatch");
  }

  SubsystemLayout layout_;
  Matrix m_;
};

// Kronecker product in list order; the result layout is the concatenation of
// the input layouts.
inline Operator tensor(const std::vector<Operator>& ops) {
  if (ops.empty()) throw std::invalid_argument("tensor of empty operator list");
  Matrix acc = ops.front().mat();
  SubsystemLayout l = ops.front().layout();
  for (std::size_t i = 1; i < ops.size(); ++i) {
    acc = kron(acc, ops[i].mat());
    l = l.concat(ops[i].layout());
  }
  return Operator(std::move(l), std::move(acc));
}

// Places `op` on the subsystems of `layout` starting at index `pos`,
// identity elsewhere. The layout slice at [pos, pos + op.subsystems) must
// match op's own layout.
inline Operator embed(const Operator& op, const SubsystemLayout& layout, int pos) {
  const int k = op.layout().subsystems();
  if (pos < 0 || pos + k > layout.subsystems()) throw std::invalid_argument("embed position out of range");
  for (int i = 0; i < k; ++i)
    if (!(layout.at(pos + i) == op.layout().at(i)))
      throw std::invalid_argument("embedded operator does not match layout slice");

  std::vector<Operator> factors;
  int i = 0;
  while (i < layout.subsystems()) {
    if (i == pos) {
      factors.push_back(op);
      i += k;
    } else {
      factors.push_back(Operator::identity(SubsystemLayout({layout.at(i)})));
      ++i;
    }
  }
  return tensor(factors);
}

}  // namespace mwdet
