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


#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "unravel/errors.hpp"
#include "unravel/measures.hpp"

namespace unravel::measures {

namespace {

using hilbert::DensityMatrix;
using hilbert::LindbladModel;
using trajectories::UnravellingSpec;

void validate(const McOptions& o) {
  if (o.n_traj < 2) throw InvalidArgument("monte carlo options: n_traj must be >= 2");
  if (!(o.dt > 0.0) || !(o.time_unit > 0.0))
    throw InvalidArgument("monte carlo options: dt and time_unit must be > 0");
  if (!(o.late_tail > 0.0 && o.late_tail <= 1.0))
    throw InvalidArgument("monte carlo options: late_tail must lie in (0, 1]");
  if (!(o.ci_z > 0.0)) throw InvalidArgument("monte carlo options: ci_z must be > 0");
}

trajectories::TrajectoryConfig base_config(const McOptions& o, double horizon) {
  trajectories::TrajectoryConfig c;
  c.dt = o.dt * o.time_unit;
  c.horizon = horizon * o.time_unit;
  c.seed = o.seed;
  c.sample_stride = std::max(1, o.sample_stride);
  c.record_innovations = false;
  return c;
}

trajectories::EnsembleOptions ensemble_options(const McOptions& o) {
  trajectories::EnsembleOptions e;
  e.threads = o.threads;
  e.frozen = o.frozen;
  e.frozen.relax *= o.time_unit;
  e.frozen.spacing *= o.time_unit;
  e.frozen.tau_horizon *= o.time_unit;
  e.frozen.tau_step *= o.time_unit;
  return e;
}

MeasureResult mc_result(MeasureKind kind, const LindbladModel& model, const UnravellingSpec& spec,
                        const McOptions& o, double theta) {
  MeasureResult r;
  r.kind = kind;
  r.backend = "monte-carlo";
  r.system = "lindblad";
  r.params = {{"dim", static_cast<double>(model.dim())}};
  r.spec = spec.name();
  r.n_traj = o.n_traj;
  r.dt = o.dt;
  r.seed = o.seed;
  r.theta = theta;
  return r;
}

}  // namespace

MeasureResult purification_time_mc(const LindbladModel& model, const UnravellingSpec& spec,
                                   const DensityMatrix& rho0, const ThetaThreshold& theta,
                                   const McOptions& options) {
  validate(options);
  const UnravellingSpec efficient = spec.with_eta(1.0);
  MeasureResult r = mc_result(MeasureKind::Purification, model, efficient, options, theta.theta);
  if (theta.degenerate() && hilbert::purity(rho0) >= theta.theta - 1e-12) return r;
  const auto ens = trajectories::run_ensemble(model, efficient, rho0,
                                              base_config(options, options.horizon),
                                              options.n_traj, trajectories::Statistic::Purity,
                                              ensemble_options(options));
  const auto [t, se] = curve_crossing(ens.curve, theta.theta);
  r.value = t / options.time_unit;
  r.uncertainty = se / options.time_unit;
  return r;
}

MeasureResult purification_time_mc(const LindbladModel& model, const UnravellingSpec& spec,
                                   const McOptions& options) {
  return purification_time_mc(model, spec, hilbert::steady_state(model), theta_for(model),
                              options);
}

MeasureResult efficiency_threshold_mc(const LindbladModel& model, const UnravellingSpec& spec,
                                      const McOptions& options) {
  validate(options);
  const ThetaThreshold th = theta_for(model);
  if (th.degenerate())
    throw DegenerateMeasureError(
        "efficiency threshold undefined: the steady state is already pure (theta = 1)");
  const DensityMatrix rho_ss = hilbert::steady_state(model);
  const auto config = base_config(options, options.late_horizon);
  const auto ens = ensemble_options(options);
  // Every call shares seed and draw layout, so differences in eta are
  // estimated with common random numbers.
  std::map<double, trajectories::Estimate> cache;
  auto late = [&](double eta) {
    if (eta <= 0.0) return trajectories::Estimate{th.steady_purity, 0.0, options.n_traj};
    auto it = cache.find(eta);
    if (it == cache.end())
      it = cache
               .emplace(eta, trajectories::late_time_purity(model, spec.with_eta(eta), rho_ss,
                                                            config, options.n_traj,
                                                            options.late_tail, ens))
               .first;
    return it->second;
  };

  std::vector<double> grid = options.eta_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.empty() || grid.front() <= 0.0 || grid.back() > 1.0)
    throw InvalidArgument("eta grid must lie in (0, 1]");
  double lo = 0.0;
  double hi = -1.0;
  trajectories::Estimate p_lo = late(0.0);
  trajectories::Estimate p_hi{};
  trajectories::Estimate prev = p_lo;
  for (double eta : grid) {
    const auto p = late(eta);
    const double slack = 3.0 * std::hypot(p.stderr_, prev.stderr_);
    if (p.mean < prev.mean - slack) {
      std::ostringstream msg;
      msg << "long-time purity decreases with eta at eta=" << eta << " (" << prev.mean
          << " -> " << p.mean << ")";
      throw AssumptionError(msg.str());
    }
    prev = p;
    if (hi >= 0.0) continue;
    if (p.mean < th.theta) {
      lo = eta;
      p_lo = p;
    } else {
      hi = eta;
      p_hi = p;
    }
  }
  if (hi < 0.0) {
    std::ostringstream msg;
    msg << "long-time purity " << prev.mean << " at eta=" << grid.back()
        << " stays below theta=" << th.theta;
    throw BracketError(msg.str());
  }

  // False position with the Illinois weight halving, stopped once the
  // confidence interval of the purity at the iterate covers theta.
  MeasureResult r = mc_result(MeasureKind::EfficiencyThreshold, model, spec, options, th.theta);
  double f_lo = p_lo.mean - th.theta;
  double f_hi = p_hi.mean - th.theta;
  double eta = hi;
  trajectories::Estimate p = p_hi;
  int side = 0;
  bool covered = std::abs(f_hi) <= options.ci_z * p_hi.stderr_;
  for (int it = 0; !covered && it < options.max_iterations && hi - lo > 1e-6; ++it) {
    eta = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    eta = std::clamp(eta, lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo));
    p = late(eta);
    const double f = p.mean - th.theta;
    covered = std::abs(f) <= options.ci_z * p.stderr_;
    if (f < 0.0) {
      lo = eta;
      f_lo = f;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = eta;
      f_hi = f;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  // Local slope from the final bracket converts the purity error into eta.
  const auto a = late(lo);
  const auto b = late(hi);
  const double slope = (b.mean - a.mean) / (hi - lo);
  r.value = std::clamp(eta, 0.0, 1.0);
  r.uncertainty = slope > 0.0 ? p.stderr_ / slope : hi - lo;
  return r;
}

FrozenMeasures frozen_measures_mc(const LindbladModel& model, const UnravellingSpec& spec,
                                  const DensityMatrix& rho0, const ThetaThreshold& theta,
                                  const McOptions& options) {
  validate(options);
  const UnravellingSpec efficient = spec.with_eta(1.0);
  const auto curves =
      trajectories::run_frozen(model, efficient, rho0, base_config(options, 0.0), options.n_traj,
                               ensemble_options(options));
  FrozenMeasures out{mc_result(MeasureKind::Mixing, model, efficient, options, theta.theta),
                     mc_result(MeasureKind::Survival, model, efficient, options, theta.theta)};
  const auto [tm, sm] = curve_crossing(curves.mixing, theta.theta);
  const auto [ts, ss] = curve_crossing(curves.survival, theta.theta);
  out.mixing.value = tm / options.time_unit;
  out.mixing.uncertainty = sm / options.time_unit;
  out.survival.value = ts / options.time_unit;
  out.survival.uncertainty = ss / options.time_unit;
  return out;
}

FrozenMeasures frozen_measures_mc(const LindbladModel& model, const UnravellingSpec& spec,
                                  const McOptions& options) {
  return frozen_measures_mc(model, spec, hilbert::steady_state(model), theta_for(model),
                            options);
}

MeasureResult mixing_time_mc(const LindbladModel& model, const UnravellingSpec& spec,
                             const McOptions& options) {
  return frozen_measures_mc(model, spec, options).mixing;
}

MeasureResult survival_time_mc(const LindbladModel& model, const UnravellingSpec& spec,
                               const McOptions& options) {
  return frozen_measures_mc(model, spec, options).survival;
}

MeasureResult evaluate(MeasureKind kind, const systems::TlaParams& params,
                       const UnravellingSpec& spec, McOptions options) {
  systems::validate(params);
  const LindbladModel model = systems::build_tla(params);
  options.time_unit = 1.0 / params.gamma;
  MeasureResult r;
  switch (kind) {
    case MeasureKind::Purification:
      r = purification_time_mc(model, spec, options);
      break;
    case MeasureKind::EfficiencyThreshold:
      r = efficiency_threshold_mc(model, spec, options);
      break;
    case MeasureKind::Mixing:
      r = mixing_time_mc(model, spec, options);
      break;
    case MeasureKind::Survival:
      r = survival_time_mc(model, spec, options);
      break;
  }
  r.system = "tla";
  r.params = {{"omega", params.rabi}, {"gamma", params.gamma}};
  return r;
}

}  // namespace unravel::measures
