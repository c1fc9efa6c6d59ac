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

#pragma once

#include <vector>

#include "unravel/linalg.hpp"

namespace unravel::hilbert {

/// Numerical slack for the density-matrix invariants.
struct Tolerances {
  double hermitian = 1e-10;
  double trace = 1e-9;
  double eigenvalue = 1e-9;
};

/// Throws InvariantError unless `rho` is Hermitian, unit-trace and PSD
/// within `tol`.
void validate_density(const CMat& rho, const Tolerances& tol = {});

/// A validated finite-dimensional quantum state.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMat elements, const Tolerances& tol = {});

  static DensityMatrix pure(const CVec& psi);
  static DensityMatrix maximally_mixed(int dim);
  /// |k><k| in a `dim`-dimensional space.
  static DensityMatrix basis_state(int dim, int k);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const CMat& matrix() const { return rho_; }
  cplx operator()(int i, int j) const { return rho_(i, j); }

 private:
  CMat rho_;
};

/// Tr[rho^2].
double purity(const DensityMatrix& rho);
double purity(const CMat& rho);

/// Tr[rho1 rho2].
double overlap(const DensityMatrix& rho1, const DensityMatrix& rho2);
double overlap(const CMat& rho1, const CMat& rho2);

/// Half the trace norm of the difference.
double trace_distance(const CMat& a, const CMat& b);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// d = 2 convenience representation, rho = (1 + x sx + y sy + z sz) / 2 in
/// the basis {|e>, |g>}.
struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
};

BlochVector to_bloch(const CMat& rho);
BlochVector to_bloch(const DensityMatrix& rho);
DensityMatrix from_bloch(const BlochVector& r);

/// Hamiltonian plus jump operators; each jump operator already carries its
/// rate (e.g. sqrt(gamma) sigma_minus).
class LindbladModel {
 public:
  LindbladModel(CMat hamiltonian, std::vector<CMat> jump_operators);

  int dim() const { return static_cast<int>(hamiltonian_.rows()); }
  const CMat& hamiltonian() const { return hamiltonian_; }
  const std::vector<CMat>& jump_operators() const { return jumps_; }
  /// H - (i/2) sum_k L_k^dag L_k.
  const CMat& effective_hamiltonian() const { return effective_; }

 private:
  CMat hamiltonian_;
  std::vector<CMat> jumps_;
  CMat effective_;
};

/// -i[H, rho] + sum_k D[L_k] rho.
CMat lindblad_rhs(const LindbladModel& model, const CMat& rho);
CMat lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho);

/// The Lindblad generator acting on column-stacked vec(rho):
/// vec(A rho B) = (B^T (x) A) vec(rho).
CMat generator_matrix(const LindbladModel& model);

/// Classical RK4 on lindblad_rhs with re-Hermitization after every step.
/// Throws IntegrationError if the result leaves the density-matrix set.
DensityMatrix propagate(const LindbladModel& model, const DensityMatrix& rho0,
                        double duration, double dt);

/// States at t = 0, h, 2h, ..., duration where h = dt * stride.
std::vector<DensityMatrix> propagate_grid(const LindbladModel& model,
                                          const DensityMatrix& rho0, double duration,
                                          double dt, int stride = 1);

/// exp(L * duration) as a dim^2 x dim^2 matrix on column-stacked states,
/// built from the same RK4 stepping as `propagate`.
CMat propagator(const LindbladModel& model, double duration, double dt);

/// Unique stationary state. Null-space solve of the vectorized generator,
/// with long-time propagation as a fallback when the residual check fails.
/// Throws DegeneracyError when the null space has dimension > 1.
DensityMatrix steady_state(const LindbladModel& model);

/// Truncated harmonic-oscillator operators with q = (a + a^dag)/sqrt(2),
/// p = (a - a^dag)/(i sqrt(2)).
class FockWorkspace {
 public:
  explicit FockWorkspace(int truncation);

  int truncation() const { return n_; }
  const CMat& annihilation() const { return a_; }
  const CMat& position() const { return q_; }
  const CMat& momentum() const { return p_; }

  /// Polynomials in q and p evaluated on a two-level-padded space and then
  /// projected, so the top rows are not corrupted by the truncation.
  CMat position_squared() const;
  CMat momentum_squared() const;
  /// (qp + pq) / 2.
  CMat symmetrized_qp() const;

  /// max |[q,p] - i| over the leading (N-2) block.
  double commutator_defect() const;

  /// Population in the top `levels` Fock levels.
  double tail_mass(const CMat& rho, int levels = 5) const;

 private:
  int n_;
  CMat a_;
  CMat q_;
  CMat p_;
  CMat q_pad_;
  CMat p_pad_;
};

}  // namespace unravel::hilbert
