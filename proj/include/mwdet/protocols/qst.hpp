#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "mwdet/lindblad/evolution.hpp"
#include "mwdet/protocols/pulses.hpp"

namespace mwdet {

// Pulsed state transduction MW cavity -> phonon -> electron spin: two sech
// swap pulses on the beamsplitter couplings, with cavity decay, phonon decay
// and spin dephasing.
struct QstParams {
  double g_mp = 0.0;  // rad/s, MW-phonon pulse amplitude
  double g_pe = 0.0;  // rad/s, phonon-spin pulse amplitude
  double tau_mp = 0.0;  // s, first pulse center
  double tau_pe = 0.0;  // s, second pulse center
  double gamma_mw = 0.0, gamma_p = 0.0, gamma_e = 0.0;  // rad/s
  double omega_mw = 0.0, omega_p = 0.0, omega_e = 0.0;  // rad/s, rotating-frame detunings
  int fock_cutoff = 2;
  double thermal_occupation = 0.0;  // photon-absent branch sensitivity option
  int record_points = 401;

  double delay() const { return tau_pe - tau_mp; }

  QstParams with_delay(double d) const {
    QstParams p = *this;
    p.tau_pe = p.tau_mp + d;
    return p;
  }

  void validate() const {
    if (g_mp <= 0.0 || g_pe <= 0.0) throw PreconditionError("qst: pulse amplitudes must be > 0");
    if (gamma_mw < 0.0 || gamma_p < 0.0 || gamma_e < 0.0)
      throw PreconditionError("qst: rates must be >= 0");
    if (fock_cutoff < 2) throw PreconditionError("qst: fock cutoff must be >= 2");
    if (thermal_occupation < 0.0) throw PreconditionError("qst: thermal occupation must be >= 0");
  }
};

enum class QstBranch { photon_present, photon_absent };

namespace detail {

struct QstOps {
  SubsystemLayout layout;
  Operator a, b, spin_lower;
};

inline QstOps build_qst_ops(const QstParams& p) {
  SubsystemLayout layout(
      {Subsystem{p.fock_cutoff, true}, Subsystem{p.fock_cutoff, true}, Subsystem{2, false}});
  return QstOps{layout, embed(Operator::annihilation(p.fock_cutoff), layout, 0),
                embed(Operator::annihilation(p.fock_cutoff), layout, 1),
                embed(Operator::ket_bra(2, 0, 1), layout, 2)};
}

// Initial MW-cavity state restricted to the {|0>, |1>} photon subspace, as a
// qubit density matrix comparable with the reduced spin state.
inline Matrix mw_qubit_state(const QstParams& p, QstBranch branch) {
  Matrix m = Matrix::Zero(2, 2);
  if (branch == QstBranch::photon_present) {
    m(1, 1) = 1.0;
  } else if (p.thermal_occupation > 0.0) {
    Matrix th = State::thermal(p.fock_cutoff, p.thermal_occupation).density_matrix();
    m(0, 0) = th(0, 0).real();
    m(1, 1) = th(1, 1).real();
    m /= m.trace();
  } else {
    m(0, 0) = 1.0;
  }
  return m;
}

}  // namespace detail

// Evolves the transduction Hamiltonian with both sech pulses and computes the
// Uhlmann fidelity between the initial MW-cavity state and the reduced final
// spin state. Records the populations of all three modes.
inline ProtocolResult run_qst(const QstParams& p, QstBranch branch) {
  p.validate();
  auto ops = detail::build_qst_ops(p);

  Operator h0 = p.omega_mw * (ops.a.adjoint() * ops.a) + p.omega_p * (ops.b.adjoint() * ops.b) +
                p.omega_e * (ops.spin_lower.adjoint() * ops.spin_lower);
  TimeDependentHamiltonian h(h0);

  Operator swap_mp = ops.a.adjoint() * ops.b + ops.b.adjoint() * ops.a;
  Operator swap_pe = ops.spin_lower.adjoint() * ops.b + ops.b.adjoint() * ops.spin_lower;
  SechPulse pulse_mp(p.g_mp, p.tau_mp), pulse_pe(p.g_pe, p.tau_pe);
  h.add_term(swap_mp, [pulse_mp](double t) { return Complex(pulse_mp.value(t), 0.0); });
  h.add_term(swap_pe, [pulse_pe](double t) { return Complex(pulse_pe.value(t), 0.0); });

  std::vector<CollapseChannel> channels{
      {ops.a, p.gamma_mw},
      {ops.b, p.gamma_p},
      {embed(Operator::projector(2, 0), ops.layout, 2), p.gamma_e}};  // sigma sigma^dag

  State spin_down = State::level_state(2, 0);
  State phonon_vac = State::fock_state(p.fock_cutoff, 0);
  State initial = [&] {
    if (branch == QstBranch::photon_present)
      return tensor({State::fock_state(p.fock_cutoff, 1), phonon_vac, spin_down});
    if (p.thermal_occupation > 0.0)
      return tensor({State::thermal(p.fock_cutoff, p.thermal_occupation), phonon_vac, spin_down});
    return tensor({State::fock_state(p.fock_cutoff, 0), phonon_vac, spin_down});
  }();

  const double w_mp = 8.0 / p.g_mp, w_pe = 8.0 / p.g_pe;
  double t0 = std::min(p.tau_mp - w_mp, p.tau_pe - w_pe);
  double t_end = std::max(p.tau_mp + w_mp, p.tau_pe + w_pe);
  int n = std::max(2, p.record_points);
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = t0 + (t_end - t0) * i / (n - 1);

  EvolutionSpec spec{std::move(h),
                     std::move(channels),
                     std::move(grid),
                     {{"pop_mw", ops.a.adjoint() * ops.a},
                      {"pop_phonon", ops.b.adjoint() * ops.b},
                      {"pop_spin", ops.spin_lower.adjoint() * ops.spin_lower}},
                     std::move(initial),
                     {}};
  ProtocolResult res = evolve_master(spec);

  State spin_final = partial_trace(*res.final_state, {2});
  State mw_initial = State::density(SubsystemLayout::qubit(), detail::mw_qubit_state(p, branch));
  res.set_scalar("fidelity", fidelity(mw_initial, spin_final).value);
  res.set_scalar("pop_spin_final", res.record("pop_spin").back());
  res.set_scalar("delay", p.delay());
  return res;
}

struct DelayOptimum {
  double delay = 0.0;
  double fidelity = 0.0;
  bool multimodal = false;
};

// Coarse scan over the delay range followed by golden-section refinement.
// A non-unimodal coarse scan short-circuits to the grid maximum and sets the
// multimodality flag.
inline DelayOptimum optimize_qst_delay(const QstParams& params, double delay_lo, double delay_hi,
                                       double tol) {
  if (!(delay_hi > delay_lo) || !(tol > 0.0))
    throw PreconditionError("qst delay optimization: bad range or tolerance");

  QstParams probe = params;
  probe.record_points = 5;
  auto f_of = [&probe](double d) {
    return run_qst(probe.with_delay(d), QstBranch::photon_present).scalar("fidelity");
  };

  const int n_coarse = 25;
  std::vector<double> xs(n_coarse), fs(n_coarse);
  for (int i = 0; i < n_coarse; ++i) {
    xs[i] = delay_lo + (delay_hi - delay_lo) * i / (n_coarse - 1);
    fs[i] = f_of(xs[i]);
  }
  int m = static_cast<int>(std::max_element(fs.begin(), fs.end()) - fs.begin());

  // Unimodal up to plateaus: marching away from the maximum, the profile may
  // not rise again by more than a small slack.
  const double slack = 1e-6;
  bool multimodal = false;
  for (int i = m; i > 0; --i)
    if (fs[i - 1] > fs[i] + slack) multimodal = true;
  for (int i = m; i + 1 < n_coarse; ++i)
    if (fs[i + 1] > fs[i] + slack) multimodal = true;
  if (multimodal) return {xs[m], fs[m], true};

  double a = xs[std::max(0, m - 1)], b = xs[std::min(n_coarse - 1, m + 1)];
  const double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f_of(x1), f2 = f_of(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f_of(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f_of(x1);
    }
  }
  return (f1 > f2) ? DelayOptimum{x1, f1, false} : DelayOptimum{x2, f2, false};
}

}  // namespace mwdet
