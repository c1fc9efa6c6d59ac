// Copyright 2026 The unravel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <cmath>

#include "unravel/errors.hpp"
#include "unravel/hilbert.hpp"
#include "unravel/random.hpp"
#include "unravel/systems.hpp"

using namespace unravel;
using hilbert::DensityMatrix;

namespace {

// Optical Bloch equations of the driven, decaying atom in the {|e>, |g>}
// basis, written out by hand.
Eigen::Vector3d bloch_rhs(double omega, double gamma, const Eigen::Vector3d& r) {
  return {-0.5 * gamma * r.x(), -0.5 * gamma * r.y() - omega * r.z(),
          omega * r.y() - gamma * (r.z() + 1.0)};
}

Eigen::Vector3d bloch_steady(double omega, double gamma) {
  Eigen::Matrix3d m;
  m << -0.5 * gamma, 0, 0, 0, -0.5 * gamma, -omega, 0, omega, -gamma;
  return m.fullPivLu().solve(Eigen::Vector3d(0, 0, gamma));
}

DensityMatrix random_qubit(random::Philox4x32& rng) {
  hilbert::BlochVector b;
  do {
    b.x = 2 * rng.uniform() - 1;
    b.y = 2 * rng.uniform() - 1;
    b.z = 2 * rng.uniform() - 1;
  } while (b.norm() > 1.0);
  return hilbert::from_bloch(b);
}

CMat random_state(int dim, random::Philox4x32& rng) {
  CMat g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const auto z = rng.normal_pair();
      g(i, j) = cplx(z[0], z[1]);
    }
  CMat rho = g * g.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("density matrix validation") {
  CMat bad = CMat::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix{bad}, InvariantError);
  CMat neg(2, 2);
  neg << 1.2, 0, 0, -0.2;
  CHECK_THROWS_AS(DensityMatrix{neg}, InvariantError);
  CMat nonherm(2, 2);
  nonherm << 0.5, 0.1, 0.3, 0.5;
  CHECK_THROWS_AS(DensityMatrix{nonherm}, InvariantError);
  CHECK_NOTHROW(DensityMatrix::maximally_mixed(3));
  CHECK(hilbert::purity(DensityMatrix::maximally_mixed(4)) == doctest::Approx(0.25));
  CHECK(hilbert::purity(DensityMatrix::basis_state(3, 2)) == doctest::Approx(1.0));
}

TEST_CASE("trace distance and overlap") {
  const auto e = DensityMatrix::basis_state(2, 0);
  const auto g = DensityMatrix::basis_state(2, 1);
  CHECK(hilbert::trace_distance(e, g) == doctest::Approx(1.0));
  CHECK(hilbert::trace_distance(e, e) == doctest::Approx(0.0));
  CHECK(hilbert::overlap(e, g) == doctest::Approx(0.0));
  random::Philox4x32 rng(1, 0);
  for (int k = 0; k < 20; ++k) {
    const auto a = random_qubit(rng);
    const auto b = random_qubit(rng);
    const auto ra = hilbert::to_bloch(a);
    const auto rb = hilbert::to_bloch(b);
    const double dist = std::sqrt(std::pow(ra.x - rb.x, 2) + std::pow(ra.y - rb.y, 2) +
                                  std::pow(ra.z - rb.z, 2));
    CHECK(hilbert::trace_distance(a, b) == doctest::Approx(0.5 * dist).epsilon(1e-9));
    CHECK(hilbert::overlap(a, b) ==
          doctest::Approx(0.5 * (1 + ra.x * rb.x + ra.y * rb.y + ra.z * rb.z)));
  }
}

TEST_CASE("lindblad generator matches the Bloch equations") {
  const double omega = 1.3, gamma = 0.7;
  const auto model = systems::build_tla({omega, gamma});
  random::Philox4x32 rng(2, 0);
  for (int k = 0; k < 10; ++k) {
    const auto rho = random_qubit(rng);
    const auto b = hilbert::to_bloch(rho);
    const CMat d = hilbert::lindblad_rhs(model, rho);
    CHECK(std::abs(d.trace()) < 1e-14);
    const Eigen::Vector3d expect = bloch_rhs(omega, gamma, {b.x, b.y, b.z});
    CHECK((d(0, 1) + d(1, 0)).real() == doctest::Approx(expect.x()));
    CHECK((cplx(0, 1) * (d(0, 1) - d(1, 0))).real() == doctest::Approx(expect.y()));
    CHECK((d(0, 0) - d(1, 1)).real() == doctest::Approx(expect.z()));
  }
}

TEST_CASE("vectorized generator agrees with the right-hand side") {
  random::Philox4x32 rng(3, 0);
  const int dim = 4;
  CMat h = random_state(dim, rng);
  CMat l1 = random_state(dim, rng), l2 = random_state(dim, rng);
  const hilbert::LindbladModel model(h, {l1, 0.5 * l2});
  const CMat gen = hilbert::generator_matrix(model);
  for (int k = 0; k < 5; ++k) {
    const CMat rho = random_state(dim, rng);
    const CMat rhs = hilbert::lindblad_rhs(model, rho);
    const CVec v = gen * Eigen::Map<const CVec>(rho.data(), rho.size());
    CHECK((Eigen::Map<const CVec>(rhs.data(), rhs.size()) - v).norm() < 1e-12);
  }
}

TEST_CASE("steady state of the driven atom") {
  SUBCASE("no drive relaxes to the ground state") {
    const auto ss = hilbert::steady_state(systems::build_tla({0.0, 1.0}));
    CHECK(hilbert::trace_distance(ss, DensityMatrix::basis_state(2, 1)) < 1e-10);
  }
  SUBCASE("omega = gamma") {
    const auto b = hilbert::to_bloch(hilbert::steady_state(systems::build_tla({1.0, 1.0})));
    const auto expect = bloch_steady(1.0, 1.0);
    CHECK(b.x == doctest::Approx(expect.x()));
    CHECK(b.y == doctest::Approx(expect.y()));
    CHECK(b.z == doctest::Approx(expect.z()));
    CHECK(b.y == doctest::Approx(2.0 / 3.0));
    CHECK(b.z == doctest::Approx(-1.0 / 3.0));
  }
  SUBCASE("strong drive approaches the maximally mixed state") {
    double prev = 1.0;
    for (double omega : {2.0, 10.0, 50.0, 200.0}) {
      const double p = hilbert::purity(hilbert::steady_state(systems::build_tla({omega, 1.0})));
      const auto r = bloch_steady(omega, 1.0);
      CHECK(p == doctest::Approx(0.5 * (1 + r.squaredNorm())));
      CHECK(p > 0.5);
      CHECK(p < prev);
      prev = p;
    }
    CHECK(prev < 0.5 + 1e-4);
  }
}

TEST_CASE("RK4 propagation tracks the Bloch solution") {
  const double omega = 2.0, gamma = 1.0;
  const auto model = systems::build_tla({omega, gamma});
  const auto states = hilbert::propagate_grid(model, DensityMatrix::basis_state(2, 1), 3.0, 1e-3, 500);
  // Independent RK4 on the hand-written Bloch equations.
  Eigen::Vector3d r(0, 0, -1);
  const double h = 1e-4;
  std::size_t k = 0;
  for (int step = 0; step <= 30000; ++step) {
    if (step % 5000 == 0) {
      const auto b = hilbert::to_bloch(states.at(k++));
      CHECK(std::abs(b.x - r.x()) < 1e-8);
      CHECK(std::abs(b.y - r.y()) < 1e-8);
      CHECK(std::abs(b.z - r.z()) < 1e-8);
    }
    const auto k1 = bloch_rhs(omega, gamma, r);
    const auto k2 = bloch_rhs(omega, gamma, r + 0.5 * h * k1);
    const auto k3 = bloch_rhs(omega, gamma, r + 0.5 * h * k2);
    const auto k4 = bloch_rhs(omega, gamma, r + h * k3);
    r += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  CHECK(k == states.size());
}

TEST_CASE("atom dynamics depend only on omega / gamma") {
  const auto a = systems::build_tla({1.5, 1.0});
  const auto b = systems::build_tla({3.0, 2.0});
  const auto rho0 = DensityMatrix::basis_state(2, 1);
  const auto sa = hilbert::propagate_grid(a, rho0, 4.0, 1e-3, 400);
  const auto sb = hilbert::propagate_grid(b, rho0, 2.0, 5e-4, 400);
  REQUIRE(sa.size() == sb.size());
  for (std::size_t k = 0; k < sa.size(); ++k) CHECK(hilbert::trace_distance(sa[k], sb[k]) < 1e-10);
}

TEST_CASE("steady state rejects degenerate models") {
  const hilbert::LindbladModel free(CMat::Zero(2, 2), {});
  CHECK_THROWS_AS(hilbert::steady_state(free), DegeneracyError);
}

TEST_CASE("fock workspace operators") {
  const hilbert::FockWorkspace fock(12);
  CHECK(fock.commutator_defect() < 1e-12);
  const CMat& a = fock.annihilation();
  const CMat comm = a * a.adjoint() - a.adjoint() * a;
  for (int n = 0; n < 11; ++n) CHECK(comm(n, n).real() == doctest::Approx(1.0));
  const CMat q = fock.position(), p = fock.momentum();
  CHECK((q - (a + a.adjoint()) / std::sqrt(2.0)).norm() < 1e-14);
  CHECK((q.adjoint() - q).norm() < 1e-14);
  CHECK((p.adjoint() - p).norm() < 1e-14);
  // Padded polynomials are exact on the whole truncated space.
  CHECK(fock.position_squared()(11, 11).real() == doctest::Approx(11.5));
  CHECK(fock.momentum_squared()(11, 11).real() == doctest::Approx(11.5));
  const CMat vac = DensityMatrix::basis_state(12, 0).matrix();
  CHECK(fock.tail_mass(vac) == doctest::Approx(0.0));
  CHECK(fock.tail_mass(DensityMatrix::basis_state(12, 11).matrix()) == doctest::Approx(1.0));
}
