#include <cmath>

#include "gtest/gtest.h"
#include "mwdet/core/operator.hpp"
#include "mwdet/core/state.hpp"
#include "test_util.hpp"

using namespace mwdet;

namespace {

// Basis convention used throughout: index 0 = spin down, index 1 = spin up.
Operator sigma_minus() { return Operator::ket_bra(2, 0, 1); }

TEST(Tensor, IdentityCase) {
  Operator i2 = Operator::identity(SubsystemLayout::qubit());
  Operator i4 = tensor({i2, i2});
  EXPECT_EQ(i4.dim(), 4);
  EXPECT_NEAR((i4.mat() - Matrix::Identity(4, 4)).norm(), 0.0, 0.0);
}

TEST(Tensor, BasisAction) {
  Operator op = tensor({sigma_minus(), Operator::identity(SubsystemLayout::qubit())});
  State up_up = tensor({State::level_state(2, 1), State::level_state(2, 1)});
  Vector out = op.mat() * up_up.ket_data();
  State down_up = tensor({State::level_state(2, 0), State::level_state(2, 1)});
  EXPECT_NEAR((out - down_up.ket_data()).norm(), 0.0, 1e-15);
}

TEST(Tensor, VacuumAnnihilation) {
  Operator op = tensor({Operator::annihilation(3), Operator::identity(SubsystemLayout::qubit())});
  EXPECT_EQ(op.dim(), 6);
  std::mt19937_64 rng = make_rng(7, 0);
  State any = testutil::random_ket(SubsystemLayout::qubit(), rng);
  State vac_any = tensor({State::fock_state(3, 0), any});
  EXPECT_NEAR((op.mat() * vac_any.ket_data()).norm(), 0.0, 1e-15);
}

TEST(Tensor, AssociativeUpToLayoutFlattening) {
  std::mt19937_64 rng = make_rng(11, 0);
  auto rand_op = [&rng](int d) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = Complex(testutil::gauss(rng), testutil::gauss(rng));
    return Operator(SubsystemLayout::level(d), std::move(m));
  };
  Operator a = rand_op(2), b = rand_op(3), c = rand_op(2);
  Operator nested = tensor({a, tensor({b, c})});
  Operator flat = tensor({a, b, c});
  EXPECT_LT((nested.mat() - flat.mat()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(nested.layout().subsystems(), 3);
}

TEST(Tensor, EmptyListRejected) { EXPECT_THROW(tensor(std::vector<Operator>{}), std::invalid_argument); }

TEST(Operator, TruncatedCommutatorBelowTopLevel) {
  const int cutoff = 5;
  Operator a = Operator::annihilation(cutoff);
  Matrix comm = a.mat() * a.adjoint().mat() - a.adjoint().mat() * a.mat();
  for (int n = 0; n < cutoff - 1; ++n) {
    for (int m = 0; m < cutoff - 1; ++m) {
      Complex expect = (n == m) ? 1.0 : 0.0;
      EXPECT_NEAR(std::abs(comm(n, m) - expect), 0.0, 1e-14);
    }
  }
}

TEST(Operator, HermiticityGate) {
  Operator a = Operator::annihilation(3);
  EXPECT_THROW(a.require_hermitian(), std::invalid_argument);
  Operator n = Operator::number(3);
  EXPECT_NO_THROW(n.require_hermitian());
}

TEST(Operator, LayoutDimensionMismatchRejected) {
  EXPECT_THROW(Operator(SubsystemLayout::qubit(), Matrix::Identity(3, 3)), std::invalid_argument);
}

TEST(PartialTrace, ProductState) {
  State s00 = tensor({State::level_state(2, 0), State::level_state(2, 0)});
  State rho = State::density(s00.layout(), s00.density_matrix());
  State reduced = partial_trace(rho, {1});
  Matrix expect = State::level_state(2, 0).density_matrix();
  EXPECT_LT((reduced.density_matrix() - expect).norm(), 1e-14);
}

TEST(PartialTrace, BellStateIsMaximallyMixed) {
  Vector bell(4);
  bell << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
  SubsystemLayout two_qubits({Subsystem{2, false}, Subsystem{2, false}});
  State rho = State::density(two_qubits, bell * bell.adjoint());
  State reduced = partial_trace(rho, {0});
  EXPECT_LT((reduced.density_matrix() - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(PartialTrace, TracePreservedOnRandomStates) {
  SubsystemLayout layout({Subsystem{2, false}, Subsystem{3, true}, Subsystem{2, false}});
  std::mt19937_64 rng = make_rng(23, 0);
  for (int rep = 0; rep < 25; ++rep) {
    State rho = testutil::random_density(layout, rng);
    for (const auto& keep : std::vector<std::vector<int>>{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}}) {
      State reduced = partial_trace(rho, keep);
      EXPECT_NEAR(reduced.density_matrix().trace().real(), 1.0, 1e-12);
      EXPECT_NEAR(reduced.density_matrix().trace().imag(), 0.0, 1e-12);
    }
  }
}

TEST(PartialTrace, ExactFactorOfProductState) {
  std::mt19937_64 rng = make_rng(29, 0);
  State a = testutil::random_density(SubsystemLayout::level(3), rng);
  State b = testutil::random_density(SubsystemLayout::qubit(), rng);
  State ab = tensor({a, b});
  EXPECT_LT((partial_trace(ab, {0}).density_matrix() - a.density_matrix()).norm(), 1e-12);
  EXPECT_LT((partial_trace(ab, {1}).density_matrix() - b.density_matrix()).norm(), 1e-12);
}

TEST(PartialTrace, InvalidIndexRejected) {
  std::mt19937_64 rng = make_rng(31, 0);
  SubsystemLayout layout({Subsystem{2, false}, Subsystem{2, false}});
  State rho = testutil::random_density(layout, rng);
  EXPECT_THROW(partial_trace(rho, {2}), std::invalid_argument);
  EXPECT_THROW(partial_trace(rho, {1, 0}), std::invalid_argument);
  EXPECT_THROW(partial_trace(rho, {}), std::invalid_argument);
}

TEST(Fidelity, IdenticalStates) {
  std::mt19937_64 rng = make_rng(37, 0);
  State rho = testutil::random_density(SubsystemLayout::level(4), rng);
  EXPECT_NEAR(fidelity(rho, rho).value, 1.0, 1e-10);
}

TEST(Fidelity, OrthogonalStates) {
  State zero = State::fock_state(2, 0);
  State one = State::fock_state(2, 1);
  EXPECT_NEAR(fidelity(zero, one).value, 0.0, 1e-12);
}

TEST(Fidelity, DiagonalClosedForm) {
  // F(|0><0|, (1-p)|0><0| + p|1><1|) = sqrt(1-p); frozen at p = 0.25.
  Matrix mix = Matrix::Zero(2, 2);
  mix(0, 0) = 0.75;
  mix(1, 1) = 0.25;
  State mixed = State::density(SubsystemLayout::qubit(), mix);
  State zero = State::level_state(2, 0);
  EXPECT_NEAR(fidelity(zero, mixed).value, 0.8660254037844386, 1e-12);
}

TEST(Fidelity, SymmetricAndPureOverlap) {
  std::mt19937_64 rng = make_rng(41, 0);
  SubsystemLayout layout = SubsystemLayout::level(5);
  for (int rep = 0; rep < 10; ++rep) {
    State psi = testutil::random_ket(layout, rng);
    State phi = testutil::random_ket(layout, rng);
    double overlap = std::abs(psi.ket_data().dot(phi.ket_data()));
    State rho_psi = State::density(layout, psi.density_matrix());
    State rho_phi = State::density(layout, phi.density_matrix());
    EXPECT_NEAR(fidelity(rho_psi, rho_phi).value, overlap, 1e-10);
    EXPECT_NEAR(fidelity(rho_psi, rho_phi).value, fidelity(rho_phi, rho_psi).value, 1e-10);

    State mixed = testutil::random_density(layout, rng);
    EXPECT_NEAR(fidelity(psi, mixed).value, fidelity(mixed, psi).value, 1e-10);
  }
}

TEST(Fidelity, DimensionMismatchRejected) {
  EXPECT_THROW(fidelity(State::fock_state(2, 0), State::fock_state(3, 0)), std::invalid_argument);
}

TEST(Expectation, FockEigenstate) {
  EXPECT_NEAR(expectation(Operator::number(3), State::fock_state(3, 1)).real(), 1.0, 1e-14);
}

TEST(Expectation, TraceNormalization) {
  std::mt19937_64 rng = make_rng(43, 0);
  State rho = testutil::random_density(SubsystemLayout::level(6), rng);
  Complex e = expectation(Operator::identity(rho.layout()), rho);
  EXPECT_NEAR(e.real(), 1.0, 1e-12);
  EXPECT_NEAR(e.imag(), 0.0, 1e-12);
}

TEST(Expectation, SymmetrySuperposition) {
  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  State s = State::ket(SubsystemLayout::qubit(), plus);
  Matrix sz(2, 2);
  sz << -1.0, 0.0, 0.0, 1.0;  // down = -1, up = +1
  Operator sigma_z(SubsystemLayout::qubit(), sz);
  EXPECT_NEAR(expectation(sigma_z, s).real(), 0.0, 1e-14);
}

TEST(Expectation, HermitianOperatorHasRealValue) {
  std::mt19937_64 rng = make_rng(47, 0);
  State rho = testutil::random_density(SubsystemLayout::level(4), rng);
  Operator n(SubsystemLayout::level(4), Operator::number(4).mat());
  EXPECT_LT(std::abs(expectation(n, rho).imag()), 1e-10);
}

TEST(State, ValidationGates) {
  Vector bad(2);
  bad << 1.0, 1.0;
  EXPECT_THROW(State::ket(SubsystemLayout::qubit(), bad), std::invalid_argument);

  Matrix neg(2, 2);
  neg << 1.5, 0.0, 0.0, -0.5;
  EXPECT_THROW(State::density(SubsystemLayout::qubit(), neg), std::invalid_argument);

  Matrix off(2, 2);
  off << 0.5, 0.3, 0.1, 0.5;  // not Hermitian
  EXPECT_THROW(State::density(SubsystemLayout::qubit(), off), std::invalid_argument);
}

TEST(State, ThermalAndCoherentFactories) {
  State th = State::thermal(8, 0.1);
  EXPECT_NEAR(th.density_matrix().trace().real(), 1.0, 1e-12);
  double n_mean = expectation(Operator::number(8), th).real();
  EXPECT_NEAR(n_mean, 0.1, 1e-6);  // truncation at 8 levels leaves ~1e-8

  State coh = State::coherent(20, Complex(1.2, -0.4));
  double n_coh = expectation(Operator::number(20), coh).real();
  EXPECT_NEAR(n_coh, 1.2 * 1.2 + 0.4 * 0.4, 1e-9);
}

TEST(Embed, MatchesExplicitTensor) {
  SubsystemLayout layout({Subsystem{3, true}, Subsystem{2, false}, Subsystem{2, false}});
  Operator a = Operator::annihilation(3);
  Operator direct = tensor({a, Operator::identity(SubsystemLayout::qubit()),
                            Operator::identity(SubsystemLayout::qubit())});
  EXPECT_LT((embed(a, layout, 0).mat() - direct.mat()).norm(), 1e-15);

  Operator sm = Operator::ket_bra(2, 0, 1);
  Operator direct2 = tensor({Operator::identity(SubsystemLayout::fock(3)),
                             Operator::identity(SubsystemLayout::qubit()), sm});
  EXPECT_LT((embed(sm, layout, 2).mat() - direct2.mat()).norm(), 1e-15);
}

}  // namespace
