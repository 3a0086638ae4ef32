#pragma once

#include <cmath>
#include <vector>

#include "mwdet/lindblad/evolution.hpp"
#include "mwdet/protocols/pulses.hpp"

namespace mwdet {

// Ensemble absorption with constant (untailored) couplings: the collective
// bright mode takes the excitation from the phonon and inhomogeneous
// dephasing drains it irreversibly into the lumped dark state.
// Ensemble indices: 0 = |G>, 1 = |B>, 2 = |D>.
struct EnmParams {
  double g_mp = 0.0;                     // rad/s
  double g_ens = 0.0;                    // rad/s, collective coupling
  double kappa = 0.0, kappa_loss = 0.0;  // rad/s
  double gamma_ph = 0.0;                 // rad/s
  double gamma_inh = 0.0;                // rad/s, Gamma = 1/T2*
  int fock_cutoff = 2;
  int record_points = 301;

  void validate() const {
    if (kappa <= 0.0) throw PreconditionError("enm: kappa must be > 0");
    if (g_mp < 0.0 || g_ens < 0.0 || kappa_loss < 0.0 || gamma_ph < 0.0 || gamma_inh < 0.0)
      throw PreconditionError("enm: rates must be >= 0");
    if (fock_cutoff < 2) throw PreconditionError("enm: fock cutoff must be >= 2");
  }
};

inline ProtocolResult run_enm(const InputPulse& pulse, const EnmParams& p) {
  p.validate();
  const int c = p.fock_cutoff;
  SubsystemLayout layout({Subsystem{c, true}, Subsystem{c, true}, Subsystem{3, false}});
  Operator a = embed(Operator::annihilation(c), layout, 0);
  Operator b = embed(Operator::annihilation(c), layout, 1);

  // |0,B><1,G| on the phonon x ensemble pair.
  Operator absorb = embed(
      tensor({Operator::ket_bra(c, 0, 1, true), Operator::ket_bra(3, 1, 0)}), layout, 1);
  Operator h0 = p.g_mp * (a.adjoint() * b + b.adjoint() * a) +
                p.g_ens * (absorb + absorb.adjoint());
  TimeDependentHamiltonian h(h0);

  Operator field = a + a.adjoint();
  const double root_kappa = std::sqrt(p.kappa);
  h.add_term(field, [pulse, root_kappa](double t) {
    return Complex(root_kappa * pulse.amplitude(t), 0.0);
  });

  // |0,D><0,B| on the phonon x ensemble pair.
  Operator dephase = embed(
      tensor({Operator::projector(c, 0, true), Operator::ket_bra(3, 2, 1)}), layout, 1);
  std::vector<CollapseChannel> channels{
      {a, p.kappa + p.kappa_loss}, {b, p.gamma_ph}, {dephase, p.gamma_inh}};

  State initial = tensor({State::fock_state(c, 0), State::fock_state(c, 0), State::level_state(3, 0)});

  int n = std::max(2, p.record_points);
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = pulse.t1 + (pulse.t2 - pulse.t1) * i / (n - 1);

  Operator p_dark = embed(Operator::projector(3, 2), layout, 2);
  Operator p_bright = embed(Operator::projector(3, 1), layout, 2);
  EvolutionSpec spec{std::move(h),
                     std::move(channels),
                     std::move(grid),
                     {{"eta", p_dark},
                      {"pop_antenna", a.adjoint() * a},
                      {"pop_phonon", b.adjoint() * b},
                      {"pop_bright", p_bright}},
                     std::move(initial),
                     {}};
  ProtocolResult res = evolve_master(spec);

  const double n_photons = pulse.mean_photons;
  std::vector<double> nu_t(res.t_grid.size());
  for (std::size_t i = 0; i < res.t_grid.size(); ++i)
    nu_t[i] = (n_photons > 0.0) ? res.record("eta")[i] / n_photons : 0.0;
  res.record_names.push_back("nu_dark");
  res.records.push_back(std::move(nu_t));

  double eta_end = res.record("eta").back();
  res.set_scalar("eta_final", eta_end);
  res.set_scalar("nu_dark", n_photons > 0.0 ? eta_end / n_photons : 0.0);
  res.set_scalar("truncation_loss", pulse.truncation_loss());
  return res;
}

}  // namespace mwdet
