#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mwdet/lindblad/trajectories.hpp"
#include "mwdet/readout/counting.hpp"

namespace mwdet {

// Cavity-enhanced single-shot readout: four spin levels
// {0 = up, 1 = down, 2 = up', 3 = down'} in a probed optical cavity. The
// cavity is resonant with the up <-> up' transition; the down <-> down'
// transition sits at detuning -delta, so a spin-down atom leaves the cavity
// transmitting while spin-up blocks it.
struct SsrParams {
  double g = 0.0;      // rad/s, cavity coupling of both optical transitions
  double kappa = 0.0;  // rad/s, cavity decay
  double gamma = 0.0;  // rad/s, optical dipole linewidth entering C = 2g^2/(kappa gamma)
  double gamma0 = 0.0, gamma1 = 0.0;  // rad/s, up' -> up (conserving) / up' -> down (flip)
  double gamma2 = 0.0, gamma3 = 0.0;  // rad/s, down' -> up (flip) / down' -> down (conserving)
  double gamma_d = 0.0;               // rad/s, pure dephasing of both excited states
  double delta = 0.0;                 // rad/s, detuning of the down-down' transition
  double epsilon = 0.0;  // sqrt(1/s), probe amplitude; H carries sqrt(kappa) epsilon (c + c^dag)
  double eta = 0.0;      // collection efficiency in [0, 1]
  double probe_duration = 0.0;  // s
  int fock_cutoff = 3;
  int record_points = 2001;

  double cooperativity() const { return 2.0 * g * g / (kappa * gamma); }
  // Incident photon flux equivalent of the drive on resonance (photons/s).
  double pump_flux() const { return 4.0 * epsilon * epsilon; }
  // Weak-field linear regime: drive well below the vacuum Rabi scale.
  bool weak_drive() const { return std::sqrt(kappa) * epsilon <= 0.1 * g; }

  void validate() const {
    if (g <= 0.0 || kappa <= 0.0 || gamma <= 0.0)
      throw PreconditionError("ssr: g, kappa, gamma must be > 0");
    if (gamma0 < 0.0 || gamma1 < 0.0 || gamma2 < 0.0 || gamma3 < 0.0 || gamma_d < 0.0)
      throw PreconditionError("ssr: decay rates must be >= 0");
    if (eta < 0.0 || eta > 1.0) throw PreconditionError("ssr: eta must lie in [0, 1]");
    if (probe_duration <= 0.0) throw PreconditionError("ssr: probe duration must be > 0");
    if (fock_cutoff < 2) throw PreconditionError("ssr: fock cutoff must be >= 2");
  }
};

// Weak-excitation closed form: N0 = eta T n_pump / (1 + C)^2, N1 = eta T n_pump.
// Feeds the P_s(T, C) surface; the pipeline itself uses the dynamical model.
inline CountModel count_model_closed_form(const SsrParams& p, double pump_flux) {
  if (pump_flux < 0.0) throw PreconditionError("ssr: pump flux must be >= 0");
  double c1 = 1.0 + p.cooperativity();
  double n1 = p.eta * p.probe_duration * pump_flux;
  return CountModel{n1 / (c1 * c1), n1};
}

namespace detail {

struct SsrSystem {
  SubsystemLayout layout;
  TimeDependentHamiltonian h;
  std::vector<CollapseChannel> channels;  // cavity channel first
  Operator photon_flux;                   // kappa c^dag c
};

inline SsrSystem build_ssr_system(const SsrParams& p) {
  const int c = p.fock_cutoff;
  SubsystemLayout layout({Subsystem{c, true}, Subsystem{4, false}});
  Operator cav = embed(Operator::annihilation(c), layout, 0);

  auto spin = [&](int i, int j) { return embed(Operator::ket_bra(4, i, j), layout, 1); };
  Operator h0 = -p.delta * spin(3, 3) +
                Complex(0.0, p.g) * (cav * spin(2, 0) - cav.adjoint() * spin(0, 2)) +
                Complex(0.0, p.g) * (cav * spin(3, 1) - cav.adjoint() * spin(1, 3)) +
                (std::sqrt(p.kappa) * p.epsilon) * (cav + cav.adjoint());

  std::vector<CollapseChannel> channels{
      {cav, p.kappa},        {spin(0, 2), p.gamma0},      {spin(1, 2), p.gamma1},
      {spin(0, 3), p.gamma2}, {spin(1, 3), p.gamma3},     {spin(2, 2), 2.0 * p.gamma_d},
      {spin(3, 3), 2.0 * p.gamma_d}};

  Operator flux = p.kappa * (cav.adjoint() * cav);
  return SsrSystem{layout, TimeDependentHamiltonian(h0), std::move(channels), std::move(flux)};
}

}  // namespace detail

// Transmitted-photon record of one readout branch: cumulative
// eta * integral_0^t kappa <c^dag c> on the output grid.
struct SsrCurve {
  std::vector<double> t;
  std::vector<double> counts;
};

// Integrates the readout master equation from the given initial spin state
// (true -> spin up / photon present) and accumulates the collected photon
// number by the trapezoid rule on the dense output grid.
inline SsrCurve ssr_count_curve(const SsrParams& p, bool spin_up) {
  p.validate();
  detail::SsrSystem sys = detail::build_ssr_system(p);

  State initial =
      tensor({State::fock_state(p.fock_cutoff, 0), State::level_state(4, spin_up ? 0 : 1)});
  int n = std::max(2, p.record_points);
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = p.probe_duration * i / (n - 1);

  EvolutionSpec spec{std::move(sys.h), std::move(sys.channels), std::move(grid),
                     {{"flux", sys.photon_flux}}, std::move(initial), {}};
  ProtocolResult res = evolve_master(spec);

  SsrCurve curve;
  curve.t = res.t_grid;
  curve.counts.resize(curve.t.size(), 0.0);
  const auto& flux = res.record("flux");
  for (std::size_t i = 1; i < curve.t.size(); ++i) {
    double dt = curve.t[i] - curve.t[i - 1];
    curve.counts[i] = curve.counts[i - 1] + 0.5 * (flux[i] + flux[i - 1]) * dt * p.eta;
  }
  return curve;
}

// Mean collected photons over the probe for both initial spin states,
// including spin flips during the readout.
inline CountModel count_model_dynamical(const SsrParams& p) {
  return CountModel{ssr_count_curve(p, true).counts.back(),
                    ssr_count_curve(p, false).counts.back()};
}

struct SsrHistogram {
  CountModel model_counts;
  ThresholdChoice threshold;
  std::vector<int> hist_up, hist_down;  // index = collected photons per shot
  double empirical_n0 = 0.0, empirical_n1 = 0.0;
  double empirical_tp = 0.0, empirical_tn = 0.0, empirical_ps = 0.0;
  int n_traj = 0;
};

// Quantum Monte Carlo click statistics: per trajectory, the collected photon
// count is the number of cavity-decay jumps thinned by eta. The threshold is
// chosen from the dynamical count model and applied to the empirical
// histograms.
inline SsrHistogram ssr_histogram(const SsrParams& p, int n_traj, std::uint64_t seed,
                                  double prior_absent = 0.5,
                                  ThresholdObjective objective =
                                      ThresholdObjective::success_probability) {
  p.validate();
  if (n_traj < 1) throw PreconditionError("ssr histogram: n_traj must be >= 1");

  SsrHistogram out;
  out.n_traj = n_traj;
  out.model_counts = count_model_dynamical(p);
  if (out.model_counts.n0 < out.model_counts.n1) {
    out.threshold = optimize_threshold(out.model_counts, prior_absent, objective);
  } else {
    out.threshold = ThresholdChoice{};  // degenerate model; keep k = 0
    out.threshold.confusion = poisson_confusion(out.model_counts, 0);
    out.threshold.metrics = detection_metrics(out.threshold.confusion, prior_absent);
  }

  auto run_branch = [&](bool spin_up, std::vector<int>& hist, double& mean,
                        std::uint64_t branch_salt) {
    detail::SsrSystem sys = detail::build_ssr_system(p);
    State initial =
        tensor({State::fock_state(p.fock_cutoff, 0), State::level_state(4, spin_up ? 0 : 1)});
    EvolutionSpec spec{std::move(sys.h), std::move(sys.channels),
                       std::vector<double>{0.0, p.probe_duration}, {}, std::move(initial), {}};
    TrajectoryEnsemble ens =
        evolve_trajectories(spec, n_traj, derive_stream(seed, 0, branch_salt));

    std::vector<int> counts(static_cast<std::size_t>(n_traj), 0);
    for (std::size_t i = 0; i < ens.trajectories.size(); ++i) {
      std::mt19937_64 thin = make_rng(seed, i, branch_salt + 2);
      int kept = 0;
      for (int ch : ens.trajectories[i].jump_channels)
        if (ch == 0 && uniform01(thin) < p.eta) ++kept;
      counts[i] = kept;
    }
    int k_max = 0;
    for (int v : counts) k_max = std::max(k_max, v);
    hist.assign(static_cast<std::size_t>(k_max) + 1, 0);
    double acc = 0.0;
    for (int v : counts) {
      ++hist[static_cast<std::size_t>(v)];
      acc += v;
    }
    mean = acc / n_traj;
  };

  run_branch(true, out.hist_up, out.empirical_n0, 100);
  run_branch(false, out.hist_down, out.empirical_n1, 200);

  const int k = out.threshold.k;
  auto frac_at_most = [](const std::vector<int>& hist, int kk, int total) {
    long below = 0;
    for (int v = 0; v <= kk && v < static_cast<int>(hist.size()); ++v) below += hist[v];
    return static_cast<double>(below) / total;
  };
  out.empirical_tp = frac_at_most(out.hist_up, k, n_traj);
  out.empirical_tn = 1.0 - frac_at_most(out.hist_down, k, n_traj);
  const double q = 1.0 - prior_absent;
  out.empirical_ps = q * out.empirical_tp + prior_absent * out.empirical_tn;
  return out;
}

}  // namespace mwdet
