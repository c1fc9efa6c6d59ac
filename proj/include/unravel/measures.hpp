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

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "unravel/gaussian.hpp"
#include "unravel/hilbert.hpp"
#include "unravel/systems.hpp"
#include "unravel/trajectories.hpp"

// Robustness measures of an unravelling. All four share the threshold
// theta = (1 + purity(rho_ss)) / 2:
//
//   tau_pur  first time the conditional purity, started at rho_ss with
//            eta = 1, rises through theta
//   eta_thr  efficiency at which the long-time conditional purity is theta
//   tau_mix  first time a stationary conditioned state, left unobserved,
//            falls through theta in purity
//   tau_sur  same, for the overlap of the frozen state with its evolved copy
//
// Each measure has a deterministic Gaussian backend (QBM) and a Monte Carlo
// backend for any LindbladModel.

namespace unravel::measures {

enum class MeasureKind { Purification, EfficiencyThreshold, Mixing, Survival };

/// tau_pur, eta_thr, tau_mix, tau_sur.
std::string measure_name(MeasureKind kind);
/// Accepts the names above and the short forms pur, thr, mix, sur.
MeasureKind parse_measure(const std::string& name);
const std::vector<MeasureKind>& all_measures();
/// Times are better when larger; eta_thr and tau_pur when smaller.
bool larger_is_better(MeasureKind kind);

struct ThetaThreshold {
  double theta = 1.0;
  double steady_purity = 1.0;

  static ThetaThreshold from_purity(double steady_purity);
  bool degenerate() const;
};

ThetaThreshold theta_for(const hilbert::LindbladModel& model);
/// QBM has no normalizable unconditional steady state; its purity is 0.
ThetaThreshold theta_for(const gaussian::QbmParams& params);

struct CrossingCurve {
  std::vector<double> times;
  std::vector<double> values;
  double theta = 0.5;
};

void validate(const CrossingCurve& curve);

/// Earliest grid interval whose endpoints straddle theta (in either
/// direction), linearly interpolated. A grid point exactly at theta is a
/// crossing. Throws HorizonError with the endpoint values otherwise.
double first_crossing(const CrossingCurve& curve);
/// Index i of the interval [t_i, t_{i+1}] used by first_crossing.
std::size_t crossing_interval(const CrossingCurve& curve);

struct MeasureResult {
  MeasureKind kind = MeasureKind::Purification;
  double value = 0.0;
  double uncertainty = 0.0;
  std::string backend;  // gaussian or monte-carlo
  std::string system;
  std::vector<std::pair<std::string, double>> params;
  std::string spec;
  long n_traj = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  double theta = 0.0;
};

// ---------------------------------------------------------------- Gaussian

struct GaussianOptions {
  /// Curves are sampled on 0 and a log grid [t_min, horizon] before the
  /// bracketing interval is refined by bisection.
  double t_min = 1e-8;
  double horizon = 1e4;
  int grid_points = 800;
  double time_tol = 1e-13;  // relative
  double eta_tol = 1e-12;
};

MeasureResult purification_time(const gaussian::QbmParams& params, const gaussian::DiskPoint& u,
                                const GaussianOptions& options = {});
MeasureResult efficiency_threshold(const gaussian::QbmParams& params,
                                   const gaussian::DiskPoint& u,
                                   const GaussianOptions& options = {});
MeasureResult mixing_time(const gaussian::QbmParams& params, const gaussian::DiskPoint& u,
                          const GaussianOptions& options = {});
MeasureResult survival_time(const gaussian::QbmParams& params, const gaussian::DiskPoint& u,
                            const GaussianOptions& options = {});
MeasureResult evaluate(MeasureKind kind, const gaussian::QbmParams& params,
                       const gaussian::DiskPoint& u, const GaussianOptions& options = {});

/// Bisection for a root of a nondecreasing f on [lo, hi]; f(lo) <= 0 <= f(hi).
/// Throws BracketError when the endpoints do not straddle zero.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

// ------------------------------------------------------------- Monte Carlo

/// Times (dt, horizons, frozen options) are in units of `time_unit`; the
/// TLA uses time_unit = 1/gamma and results are reported in the same units.
struct McOptions {
  long n_traj = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  int threads = 0;
  double time_unit = 1.0;
  /// tau_pur: horizon of the purity curve and its sample stride.
  double horizon = 10.0;
  int sample_stride = 10;
  /// tau_mix / tau_sur.
  trajectories::FrozenOptions frozen{};
  /// eta_thr: conditioning horizon and averaged tail fraction.
  double late_horizon = 20.0;
  double late_tail = 0.25;
  std::vector<double> eta_grid{0.25, 0.5, 0.75, 1.0};
  int max_iterations = 30;
  double ci_z = 1.96;
};

/// Ensemble counterpart of first_crossing; the uncertainty is the stderr at
/// the crossing divided by the local slope.
std::pair<double, double> curve_crossing(const trajectories::EnsembleCurve& curve, double theta);

MeasureResult purification_time_mc(const hilbert::LindbladModel& model,
                                   const trajectories::UnravellingSpec& spec,
                                   const McOptions& options = {});
/// Explicit start state and threshold (used where rho_ss is not normalizable).
MeasureResult purification_time_mc(const hilbert::LindbladModel& model,
                                   const trajectories::UnravellingSpec& spec,
                                   const hilbert::DensityMatrix& rho0,
                                   const ThetaThreshold& theta, const McOptions& options = {});
MeasureResult efficiency_threshold_mc(const hilbert::LindbladModel& model,
                                      const trajectories::UnravellingSpec& spec,
                                      const McOptions& options = {});

struct FrozenMeasures {
  MeasureResult mixing;
  MeasureResult survival;
};

/// tau_mix and tau_sur from one set of frozen stationary states.
FrozenMeasures frozen_measures_mc(const hilbert::LindbladModel& model,
                                  const trajectories::UnravellingSpec& spec,
                                  const McOptions& options = {});
FrozenMeasures frozen_measures_mc(const hilbert::LindbladModel& model,
                                  const trajectories::UnravellingSpec& spec,
                                  const hilbert::DensityMatrix& rho0,
                                  const ThetaThreshold& theta, const McOptions& options = {});
MeasureResult mixing_time_mc(const hilbert::LindbladModel& model,
                             const trajectories::UnravellingSpec& spec,
                             const McOptions& options = {});
MeasureResult survival_time_mc(const hilbert::LindbladModel& model,
                               const trajectories::UnravellingSpec& spec,
                               const McOptions& options = {});

/// TLA measures with times in units of 1/gamma.
MeasureResult evaluate(MeasureKind kind, const systems::TlaParams& params,
                       const trajectories::UnravellingSpec& spec, McOptions options = {});

// --------------------------------------------------------------- optimizer

struct DiskOptimum {
  gaussian::DiskPoint point;
  MeasureResult result;
  int evaluations = 0;
  int failures = 0;
};

struct OptimizeOptions {
  int r_points = 11;    // r in {0, 0.1, ..., 1}
  int phi_points = 36;  // phi in {0, 10, ..., 350} degrees
  double simplex_tol = 1e-9;
  int max_iterations = 400;
  int threads = 0;  // grid evaluations
  GaussianOptions gaussian{};
};

/// Grid search over the disk followed by Nelder-Mead on (r, phi) with r
/// clamped to [0, 1]. Points where the measure fails are skipped.
DiskOptimum optimize_disk(const gaussian::QbmParams& params, MeasureKind kind,
                          const OptimizeOptions& options = {});

/// Minimizes f from x0 with initial simplex steps `step`.
struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& step,
                             double tol, int max_iterations);

// ----------------------------------------------------------------- ranking

struct RankEntry {
  std::string scheme;
  double value = 0.0;
  double uncertainty = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// CI overlaps that of the next entry.
  bool tied_with_next = false;
  /// AID only: |beta| / sqrt(gamma) of the reported entry.
  double beta_factor = 0.0;
  MeasureResult result;
};

struct Ranking {
  MeasureKind kind = MeasureKind::Purification;
  std::vector<RankEntry> entries;  // most robust first
  bool resolved() const;
  std::string verdict() const { return resolved() ? "resolved" : "unresolved"; }
};

struct RankOptions {
  McOptions mc{};
  /// AID is evaluated at |beta| = f sqrt(gamma) for each f and the best is kept.
  std::vector<double> aid_beta_factors{0.5};
};

Ranking rank_unravellings(const systems::TlaParams& params, MeasureKind kind,
                          const std::vector<trajectories::Scheme>& schemes,
                          const RankOptions& options = {});
/// Ranks precomputed results (value, uncertainty) under `kind`'s ordering.
Ranking rank_results(MeasureKind kind, std::vector<RankEntry> entries, double ci_z = 1.96);

}  // namespace unravel::measures
