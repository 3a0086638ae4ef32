#include <cmath>

#include "gtest/gtest.h"
#include "mwdet/lindblad/evolution.hpp"
#include "test_util.hpp"

using namespace mwdet;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

// Jaynes-Cummings swap block: layout [fock(cutoff), spin], H = g (a sigma+ + a^dag sigma-).
EvolutionSpec rabi_spec(double g, int cutoff, double t_end, int points) {
  SubsystemLayout layout({Subsystem{cutoff, true}, Subsystem{2, false}});
  Operator a = embed(Operator::annihilation(cutoff), layout, 0);
  Operator sp = embed(Operator::ket_bra(2, 1, 0), layout, 1);
  Operator h_op = g * (a * sp + (a * sp).adjoint());
  TimeDependentHamiltonian h(h_op);

  State initial = tensor({State::fock_state(cutoff, 1), State::level_state(2, 0)});
  Operator excited = embed(Operator::projector(2, 1), layout, 1);
  EvolutionSpec spec{std::move(h), {}, linspace(0.0, t_end, points), {{"p_up", excited}}, initial, {}};
  return spec;
}

TEST(Master, TrivialGeneratorKeepsState) {
  SubsystemLayout layout = SubsystemLayout::level(3);
  std::mt19937_64 rng = make_rng(3, 0);
  State rho0 = testutil::random_density(layout, rng);
  TimeDependentHamiltonian h(Operator::zero(layout));
  Operator n(layout, Operator::number(3).mat());
  EvolutionSpec spec{std::move(h), {}, linspace(0.0, 1.0, 11), {{"n", n}}, rho0, {}};
  ProtocolResult res = evolve_master(spec);

  double n0 = expectation(n, rho0).real();
  for (double v : res.record("n")) EXPECT_NEAR(v, n0, 1e-12);
  EXPECT_LT((res.final_state->density_matrix() - rho0.density_matrix()).norm(), 1e-10);
}

TEST(Master, ResonantRabiSwap) {
  const double g = 2.0e6;  // rad/s
  const double t_swap = M_PI / (2.0 * g);
  ProtocolResult res = evolve_master(rabi_spec(g, 3, t_swap, 101));

  const auto& p = res.record("p_up");
  for (std::size_t i = 0; i < res.t_grid.size(); ++i) {
    double expect = std::pow(std::sin(g * res.t_grid[i]), 2);
    EXPECT_NEAR(p[i], expect, 1e-6);
  }
  EXPECT_NEAR(p.back(), 1.0, 1e-6);  // full swap at t = pi/(2g)
}

TEST(Master, ExponentialDecayLaw) {
  const double gamma = 1.0e5;  // rad/s
  const int cutoff = 4;
  SubsystemLayout layout = SubsystemLayout::fock(cutoff);
  TimeDependentHamiltonian h(Operator::zero(layout));
  std::vector<CollapseChannel> channels{{Operator::annihilation(cutoff), gamma}};
  State initial = State::fock_state(cutoff, 2);
  EvolutionSpec spec{std::move(h), channels, linspace(0.0, 1.0 / gamma, 51),
                     {{"n", Operator::number(cutoff)}}, initial, {}};
  ProtocolResult res = evolve_master(spec);

  const double n0 = 2.0;
  const auto& n = res.record("n");
  for (std::size_t i = 0; i < res.t_grid.size(); ++i)
    EXPECT_NEAR(n[i], n0 * std::exp(-gamma * res.t_grid[i]), 1e-6);
  EXPECT_NEAR(n.back(), n0 / std::exp(1.0), 1e-6);
}

TEST(Master, StateQualityInvariantsOnDampedDrivenRun) {
  // Driven, decaying, dephasing two-level system: checks trace, Hermiticity
  // and positivity bounds on every grid point.
  SubsystemLayout layout = SubsystemLayout::qubit();
  Matrix sx(2, 2);
  sx << 0.0, 1.0, 1.0, 0.0;
  TimeDependentHamiltonian h(Operator::zero(layout));
  h.add_term(Operator(layout, sx), [](double t) { return Complex(1.0e6 * std::cos(2.0e5 * t), 0.0); });

  std::vector<CollapseChannel> channels{{Operator::ket_bra(2, 0, 1), 3.0e5},
                                        {Operator::projector(2, 1), 1.0e5}};
  State initial = State::level_state(2, 1);
  EvolutionSpec spec{std::move(h), channels, linspace(0.0, 2.0e-5, 101),
                     {{"p_up", Operator::projector(2, 1)}}, initial, {}};

  // Re-run on prefixes of the grid so every grid point is a terminal state.
  ProtocolResult res = evolve_master(spec);
  for (int stop : {10, 35, 70, 100}) {
    EvolutionSpec partial = spec;
    partial.t_grid.assign(spec.t_grid.begin(), spec.t_grid.begin() + stop + 1);
    ProtocolResult r = evolve_master(partial);
    Matrix rho = r.final_state->density_matrix();
    EXPECT_LT(std::abs(rho.trace().real() - 1.0), 1e-8);
    EXPECT_LT((rho - rho.adjoint()).norm() / rho.norm(), 1e-9);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-7);
  }
  EXPECT_EQ(res.t_grid.size(), res.record("p_up").size());
}

TEST(Master, ToleranceHalvingLeavesTerminalValue) {
  EvolutionSpec spec = rabi_spec(1.5e6, 3, 1.1e-6, 21);
  spec.channels.push_back({embed(Operator::annihilation(3), spec.h.layout(), 0), 2.0e5});

  ProtocolResult coarse = evolve_master(spec);
  spec.integrator.rtol *= 0.5;
  spec.integrator.atol *= 0.5;
  ProtocolResult fine = evolve_master(spec);
  EXPECT_LT(std::abs(coarse.record("p_up").back() - fine.record("p_up").back()), 1e-5);
}

TEST(Master, StepBudgetExhaustionRaisesIntegrationError) {
  EvolutionSpec spec = rabi_spec(1.0e6, 3, 1.0e-5, 5);
  spec.integrator.max_steps = 3;
  try {
    evolve_master(spec);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GE(e.time_of_failure(), 0.0);
    EXPECT_LT(e.time_of_failure(), 1.0e-5);
  }
}

TEST(Master, GridValidation) {
  EvolutionSpec spec = rabi_spec(1.0e6, 3, 1.0e-6, 5);
  spec.t_grid = {0.0, 1.0e-6, 1.0e-6};
  EXPECT_THROW(evolve_master(spec), std::invalid_argument);
  spec.t_grid = {0.0};
  EXPECT_THROW(evolve_master(spec), std::invalid_argument);
}

TEST(Master, NegativeRateRejected) {
  EvolutionSpec spec = rabi_spec(1.0e6, 3, 1.0e-6, 5);
  spec.channels.push_back({embed(Operator::annihilation(3), spec.h.layout(), 0), -1.0});
  EXPECT_THROW(evolve_master(spec), std::invalid_argument);
}

}  // namespace
