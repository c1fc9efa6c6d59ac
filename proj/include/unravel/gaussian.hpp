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

// Phase-space backend for the quantum-Brownian-motion particle. All
// quantities are in scaled units (damping rate, mass and hbar equal to one).
//
// A Gaussian conditional state is fixed by its means and covariance. Under
// any continuous Markovian unravelling the covariance follows a deterministic
// Riccati equation
//
//   dV/dt = A V + V A^T + D - 4 eta G(V) S G(V)^T,   G(V) = V N + Gamma,
//
// where S is the covariance of the real innovation pair (Re dW, Im dW) per
// unit time and G(V) is the gain with which it moves the means:
// d<x> = A <x> dt + 2 sqrt(eta) G(V) dw.

namespace unravel::gaussian {

struct CovarianceState {
  double var_q = 0.5;
  double var_p = 0.5;
  double cov_qp = 0.0;
  double mean_q = 0.0;
  double mean_p = 0.0;

  Mat2 covariance() const;
  Vec2 mean() const;
  double determinant() const { return var_q * var_p - cov_qp * cov_qp; }

  static CovarianceState from(const Mat2& v, const Vec2& mean = Vec2::Zero());
};

/// Throws InvariantError unless the variances are positive and
/// det V >= 1/4 - tol.
void validate(const CovarianceState& v, double tol = 1e-9);

struct QbmParams {
  double temperature = 1.0;
};

void validate(const QbmParams& params);

/// General-dyne point upsilon = r e^{i phi}: r = 1 is homodyne, r = 0 heterodyne.
struct DiskPoint {
  double r = 1.0;
  double phi = 0.0;
};

/// Validates r and wraps phi into [0, 2 pi).
DiskPoint make_disk_point(double r, double phi);

struct GaussianGenerators {
  Mat2 drift;             // A
  Mat2 diffusion;         // D
  Mat2 gain_slope;        // N
  Mat2 gain_offset;       // Gamma
  Mat2 noise_covariance;  // S
  double efficiency = 0.0;

  Mat2 gain(const Mat2& v) const;
  /// The measurement term 4 eta G S G^T; also the diffusion of the means.
  Mat2 correction(const Mat2& v) const;
  Mat2 lyapunov_rhs(const Mat2& v) const;
  Mat2 riccati_rhs(const Mat2& v) const;

  // Standard form dV/dt = A' V + V A'^T + D' - V Q V.
  Mat2 reduced_drift() const;
  Mat2 reduced_diffusion() const;
  Mat2 information_rate() const;
  /// [[-A'^T, Q], [D', A']]; columns [X; Y] with V = Y X^{-1} evolve linearly.
  Mat4 hamiltonian() const;
};

GaussianGenerators qbm_generators(const QbmParams& params, const DiskPoint& u, double eta);

double gaussian_purity(const Mat2& v);
double gaussian_purity(const CovarianceState& v);
/// 1/sqrt(4 det V) written in terms of the precision matrix V^{-1}; zero for
/// a singular precision (infinitely broad state).
double purity_from_precision(const Mat2& precision);

/// Tr[rho1 rho2] = exp(-delta^T (V1+V2)^{-1} delta / 2) / sqrt(det(V1+V2)).
double gaussian_overlap(const Mat2& v1, const Vec2& mu1, const Mat2& v2, const Vec2& mu2);
double gaussian_overlap(const CovarianceState& a, const CovarianceState& b);

/// RK4 integration of the Riccati equation; means follow the drift only.
/// Output has one state per grid time 0, dt, ..., duration.
std::vector<CovarianceState> riccati_flow(const GaussianGenerators& gen, const CovarianceState& v0,
                                          double duration, double dt);

/// Exact unconditional covariance flow (Van Loan), same grid as riccati_flow.
std::vector<CovarianceState> lyapunov_flow(const GaussianGenerators& gen,
                                           const CovarianceState& v0, double duration, double dt);

/// V(t) = e^{At} V0 e^{A^T t} + int_0^t e^{As} D e^{A^T s} ds.
Mat2 lyapunov_propagate(const GaussianGenerators& gen, const Mat2& v0, double t);

/// Incremental exact Lyapunov stepping for monotone time grids.
class LyapunovStepper {
 public:
  LyapunovStepper(const GaussianGenerators& gen, const Mat2& v0);
  void advance_to(double t);
  double time() const { return t_; }
  const Mat2& covariance() const { return v_; }

 private:
  void step(double h);

  Mat2 drift_;
  Mat2 diffusion_;
  double max_step_;
  double t_ = 0.0;
  Mat2 v_;
  double cached_h_ = -1.0;
  Mat2 cached_f_;
  Mat2 cached_w_;
};

/// Solves A V + V A^T + D = 0; throws StabilityError unless A is Hurwitz.
CovarianceState lyapunov_steady(const GaussianGenerators& gen);

/// Stationary conditional covariance. Stable invariant subspace of the
/// Hamiltonian matrix, polished by Newton steps; throws ConvergenceError
/// when no stationary state exists (e.g. an unobservable marginal mode).
CovarianceState riccati_steady(const GaussianGenerators& gen);

/// lim_{t->inf} V(t)^{-1} of the unconditional flow. Equals the inverse of
/// lyapunov_steady for Hurwitz drift; for a drift with a zero mode (the free
/// Brownian particle) it is singular and the limiting purity is zero.
Mat2 unconditional_precision(const GaussianGenerators& gen);

/// Exact Riccati flow in precision form, P = V^{-1}, admitting a singular
/// (improper) initial precision. Each step applies exp(H h) to [P; 1].
class PrecisionFlow {
 public:
  PrecisionFlow(const GaussianGenerators& gen, const Mat2& precision0);
  void advance_to(double t);
  double time() const { return t_; }
  const Mat2& precision() const { return precision_; }
  double purity() const { return purity_from_precision(precision_); }

 private:
  void step(double h);

  Mat4 hamiltonian_;
  double max_step_;
  double t_ = 0.0;
  Mat2 precision_;
  double cached_h_ = -1.0;
  Mat4 cached_;
};

/// e^{A t}.
Mat2 mean_propagator(const GaussianGenerators& gen, double t);

/// Stationary covariance of the conditional means, V_ss - V_c, for Hurwitz
/// drift. Throws DecompositionError when it is not PSD.
Mat2 excess_noise(const GaussianGenerators& gen);

/// Covariance of delta = (1 - e^{A tau}) mu over the stationary distribution
/// of conditional means mu. Finite even when the drift has a zero mode,
/// because that mode is annihilated by (1 - e^{A tau}).
Mat2 displacement_covariance(const GaussianGenerators& gen, const Mat2& conditional, double tau);

/// Pure-state-against-itself overlap after unconditional evolution, averaged
/// over the stationary conditional means (closed form).
std::vector<double> survival_curve(const GaussianGenerators& conditioned,
                                   const std::vector<double>& tau_grid);
std::vector<double> survival_curve(const QbmParams& params, const DiskPoint& u,
                                   const std::vector<double>& tau_grid);

/// Purity after unconditional evolution of the stationary conditional state.
std::vector<double> mixing_curve(const GaussianGenerators& conditioned,
                                 const std::vector<double>& tau_grid);

}  // namespace unravel::gaussian
