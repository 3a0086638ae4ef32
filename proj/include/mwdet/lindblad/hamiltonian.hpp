#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "mwdet/core/operator.hpp"

namespace mwdet {

// H(t) = H_static + sum_i f_i(t) * O_i, all terms in rad/s. The static part
// must be Hermitian at construction; the assembled H(t) is spot-checked for
// Hermiticity on the output grid by the evolver.
class TimeDependentHamiltonian {
 public:
  explicit TimeDependentHamiltonian(Operator static_part)
      : static_(static_part.require_hermitian(1e-12)) {}

  // H += f(t) * op. The caller is responsible for overall Hermiticity
  // (use add_hermitian_pair for complex envelopes).
  void add_term(Operator op, std::function<Complex(double)> coeff) {
    if (!(op.layout() == static_.layout()))
      throw std::invalid_argument("time-dependent term layout mismatch");
    terms_.push_back({op.mat(), std::move(coeff)});
  }

  // H += f(t) * op + conj(f(t)) * op^dagger.
  void add_hermitian_pair(const Operator& op, std::function<Complex(double)> coeff) {
    add_term(op, coeff);
    add_term(op.adjoint(), [coeff](double t) { return std::conj(coeff(t)); });
  }

  bool time_dependent() const { return !terms_.empty(); }
  int dim() const { return static_.dim(); }
  const SubsystemLayout& layout() const { return static_.layout(); }
  const Operator& static_part() const { return static_; }

  void materialize(double t, Matrix& out) const {
    out = static_.mat();
    for (const auto& term : terms_) out.noalias() += term.coeff(t) * term.op;
  }

 private:
  struct Term {
    Matrix op;
    std::function<Complex(double)> coeff;
  };

  Operator static_;
  std::vector<Term> terms_;
};

}  // namespace mwdet
