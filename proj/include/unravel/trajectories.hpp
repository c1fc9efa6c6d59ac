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
#include <vector>

#include "unravel/gaussian.hpp"
#include "unravel/hilbert.hpp"

// Stochastic unravellings of a Lindblad model. Every jump operator of the
// model is a monitored output channel and is detected with efficiency eta.
//
// Diffusive schemes use the Kraus-form Euler-Maruyama step
//
//   rho' ~ M rho M^dag + (1 - eta) sum_k c_k rho c_k^dag dt,
//   M = 1 - i H_eff dt + sqrt(eta) sum_k c_k dZ_k,
//   dZ_k = dW_k + sqrt(eta) (<c_k^dag> + upsilon <c_k>) dt,
//
// with dW dW* = dt and dW^2 = upsilon dt. The drift in dZ is the measured
// signal; it makes the normalized update reproduce the innovation form
// drho = L rho dt + sqrt(eta) (dW (c - <c>) rho + h.c.) and keeps rho
// positive for any dt.
//
// Jump schemes detect J = L + s beta with LO sign s = +-1 (beta = 0 for
// direct counting). The displacement is compensated by
// H_c = -(i/2)(s beta* L - s beta L^dag), so that D[J] - i[H_c, .] = D[L].

namespace unravel::trajectories {

using hilbert::DensityMatrix;
using hilbert::LindbladModel;

enum class Scheme { Direct, HomodyneX, HomodyneY, Heterodyne, AID, GeneralDyne };

std::string scheme_name(Scheme s);
/// Accepts direct, hom-x, hom-y, het, aid, general-dyne (and a few aliases).
Scheme parse_scheme(const std::string& name);

struct UnravellingSpec {
  Scheme kind = Scheme::HomodyneX;
  gaussian::DiskPoint disk{};  // GeneralDyne only
  cplx lo_amplitude{0.0, 0.0};  // AID only
  double eta = 1.0;

  static UnravellingSpec direct(double eta = 1.0);
  static UnravellingSpec homodyne_x(double eta = 1.0);
  static UnravellingSpec homodyne_y(double eta = 1.0);
  static UnravellingSpec heterodyne(double eta = 1.0);
  static UnravellingSpec aid(cplx beta, double eta = 1.0);
  static UnravellingSpec general_dyne(const gaussian::DiskPoint& u, double eta = 1.0);

  bool diffusive() const;
  /// dW^2 / dt for diffusive kinds.
  cplx upsilon() const;
  std::string name() const;
  UnravellingSpec with_eta(double e) const;
};

void validate(const UnravellingSpec& spec);

struct TrajectoryConfig {
  double dt = 1e-3;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  int sample_stride = 1;
  /// Keep the per-step innovations in the record (memory grows with steps).
  bool record_innovations = true;
};

void validate(const TrajectoryConfig& config);

struct InnovationRecord {
  /// dW per step and channel, step-major (diffusive kinds).
  std::vector<cplx> increments;
  int channels = 0;
  /// Detected jump times, strictly increasing (counting kinds).
  std::vector<double> jump_times;
  /// LO sign after each detected jump (AID); flips coincide with jump_times.
  std::vector<int> lo_signs;
  int lo_sign = 1;
};

/// One diffusive step with innovations dW_k (one per jump operator).
DensityMatrix step_diffusive(const LindbladModel& model, const UnravellingSpec& spec,
                             const DensityMatrix& rho, const std::vector<cplx>& noise,
                             double dt);

struct JumpOutcome {
  DensityMatrix state;
  bool jumped = false;
  int channel = -1;
};

/// One counting step. `uniform` in [0, 1) selects a detected jump when it
/// falls below eta <J^dag J> dt. Throws StepSizeError if that probability
/// exceeds 0.1.
JumpOutcome step_jump(const LindbladModel& model, const UnravellingSpec& spec,
                      const DensityMatrix& rho, double uniform, double dt, int lo_sign = 1);

/// Flips the AID local-oscillator sign on a detected jump and logs it.
int aid_update(InnovationRecord& record, double t, bool jumped);

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  InnovationRecord record;
};

/// Deterministic in (inputs, config.seed); the noise stream is trajectory 0
/// of that seed.
Trajectory run_trajectory(const LindbladModel& model, const UnravellingSpec& spec,
                          const DensityMatrix& rho0, const TrajectoryConfig& config,
                          std::uint64_t stream = 0);

struct EnsembleCurve {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> stderr_;
  long n = 0;
};

enum class Statistic { Purity, MeanState, Overlap, Mixing };

/// Options for the frozen-state statistics (Overlap, Mixing): each
/// trajectory is conditioned for `relax`, then every `spacing` a copy of
/// rho_c is frozen and evolved without measurement over [0, tau_horizon].
/// The per-trajectory average over `freezes` copies is one sample.
struct FrozenOptions {
  double relax = 10.0;
  double spacing = 2.0;
  int freezes = 5;
  double tau_horizon = 5.0;
  double tau_step = 0.01;
};

struct EnsembleOptions {
  int threads = 0;  // 0: UNRAVEL_THREADS or hardware concurrency
  FrozenOptions frozen{};
  /// Optional CSV dump (t,statistic,trajectory) of per-trajectory samples.
  std::string dump_path;
};

struct EnsembleResult {
  EnsembleCurve curve;
  /// Statistic::MeanState only: mean state per sample time and the
  /// standard error of its Frobenius norm.
  std::vector<CMat> mean_states;
  std::vector<double> mean_state_stderr;
};

/// Trajectory i uses stream i of config.seed; results are reduced in
/// fixed-size chunks in index order, so they do not depend on thread count.
/// For Overlap and Mixing the curve is indexed by tau.
EnsembleResult run_ensemble(const LindbladModel& model, const UnravellingSpec& spec,
                            const DensityMatrix& rho0, const TrajectoryConfig& config,
                            long n_traj, Statistic statistic, const EnsembleOptions& options = {});

/// Mixing and survival curves from one set of frozen states.
struct FrozenCurves {
  EnsembleCurve mixing;
  EnsembleCurve survival;
};

FrozenCurves run_frozen(const LindbladModel& model, const UnravellingSpec& spec,
                        const DensityMatrix& rho0, const TrajectoryConfig& config, long n_traj,
                        const EnsembleOptions& options = {});

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long n = 0;
};

/// Per-trajectory time average of the conditional purity over the final
/// `tail_fraction` of [0, config.horizon]. Draw counts per step do not
/// depend on eta, so calls differing only in eta share random numbers.
Estimate late_time_purity(const LindbladModel& model, const UnravellingSpec& spec,
                          const DensityMatrix& rho0, const TrajectoryConfig& config, long n_traj,
                          double tail_fraction = 0.25, const EnsembleOptions& options = {});

/// Worker count: `requested` if positive, else UNRAVEL_THREADS, else the
/// hardware concurrency.
int resolve_threads(int requested);

}  // namespace unravel::trajectories
