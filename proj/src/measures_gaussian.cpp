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
#include <sstream>

#include "unravel/errors.hpp"
#include "unravel/measures.hpp"

namespace unravel::measures {

namespace {

using gaussian::DiskPoint;
using gaussian::GaussianGenerators;
using gaussian::QbmParams;

std::vector<double> time_grid(const GaussianOptions& o) {
  if (!(o.t_min > 0.0) || !(o.horizon > o.t_min) || o.grid_points < 2)
    throw InvalidArgument("gaussian options: need 0 < t_min < horizon and grid_points >= 2");
  std::vector<double> grid{0.0};
  const double ratio = std::log(o.horizon / o.t_min);
  for (int k = 0; k < o.grid_points; ++k)
    grid.push_back(o.t_min * std::exp(ratio * k / (o.grid_points - 1)));
  grid.back() = o.horizon;
  return grid;
}

// Walks the grid until the first straddling interval, then bisects inside it
// starting from a copy of the flow at the interval's left end.
template <class Flow, class Value>
double crossing_time(Flow flow, Value value, double theta, const GaussianOptions& o) {
  const std::vector<double> grid = time_grid(o);
  CrossingCurve curve;
  curve.theta = theta;
  Flow left = flow;
  for (double t : grid) {
    Flow before = flow;
    flow.advance_to(t);
    curve.times.push_back(t);
    curve.values.push_back(value(flow, t));
    const std::size_t n = curve.values.size();
    if (n == 1 && curve.values[0] == theta) return 0.0;
    if (n >= 2 && (curve.values[n - 2] - theta) * (curve.values[n - 1] - theta) <= 0.0) {
      left = before;
      break;
    }
  }
  const std::size_t i = crossing_interval(curve);
  if (curve.values[i] == theta) return curve.times[i];
  if (curve.values[i + 1] == theta) return curve.times[i + 1];
  const bool below = curve.values[i] < theta;
  double lo = curve.times[i];
  double hi = curve.times[i + 1];
  while (hi - lo > o.time_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    Flow f = left;
    f.advance_to(mid);
    ((value(f, mid) < theta) == below ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

MeasureResult gaussian_result(MeasureKind kind, const QbmParams& params, const DiskPoint& u,
                              double value, double theta) {
  MeasureResult r;
  r.kind = kind;
  r.value = value;
  r.backend = "gaussian";
  r.system = "qbm";
  r.params = {{"T", params.temperature}, {"r", u.r}, {"phi", u.phi}};
  std::ostringstream spec;
  spec.precision(17);
  spec << "general-dyne(r=" << u.r << ",phi=" << u.phi << ")";
  r.spec = spec.str();
  r.theta = theta;
  return r;
}

double steady_purity(const QbmParams& params, const DiskPoint& u, double eta) {
  if (eta <= 0.0) return 0.0;
  return gaussian::gaussian_purity(
      gaussian::riccati_steady(gaussian::qbm_generators(params, u, eta)));
}

}  // namespace

MeasureResult purification_time(const QbmParams& params, const DiskPoint& u,
                                const GaussianOptions& options) {
  const ThetaThreshold th = theta_for(params);
  const GaussianGenerators gen = gaussian::qbm_generators(params, u, 1.0);
  gaussian::PrecisionFlow flow(gen, gaussian::unconditional_precision(gen));
  const double t = crossing_time(
      flow, [](const gaussian::PrecisionFlow& f, double) { return f.purity(); }, th.theta,
      options);
  return gaussian_result(MeasureKind::Purification, params, u, t, th.theta);
}

MeasureResult efficiency_threshold(const QbmParams& params, const DiskPoint& u,
                                   const GaussianOptions& options) {
  const ThetaThreshold th = theta_for(params);
  constexpr int kGrid = 10;
  double prev = steady_purity(params, u, 0.0);
  double lo = 0.0;
  double hi = -1.0;
  for (int k = 1; k <= kGrid; ++k) {
    const double eta = static_cast<double>(k) / kGrid;
    const double p = steady_purity(params, u, eta);
    if (p < prev - 1e-12) {
      std::ostringstream msg;
      msg << "long-time purity decreases with eta near eta=" << eta;
      throw AssumptionError(msg.str());
    }
    prev = p;
    if (hi < 0.0) {
      if (p < th.theta)
        lo = eta;
      else
        hi = eta;
    }
  }
  if (hi < 0.0) throw BracketError("long-time purity stays below theta for eta in (0, 1]");
  const double eta = bisect(
      [&](double e) { return steady_purity(params, u, e) - th.theta; }, lo, hi,
      options.eta_tol);
  return gaussian_result(MeasureKind::EfficiencyThreshold, params, u, eta, th.theta);
}

MeasureResult mixing_time(const QbmParams& params, const DiskPoint& u,
                          const GaussianOptions& options) {
  const ThetaThreshold th = theta_for(params);
  const GaussianGenerators gen = gaussian::qbm_generators(params, u, 1.0);
  gaussian::LyapunovStepper flow(gen, gaussian::riccati_steady(gen).covariance());
  const double t = crossing_time(
      flow,
      [](const gaussian::LyapunovStepper& f, double) {
        return gaussian::gaussian_purity(f.covariance());
      },
      th.theta, options);
  return gaussian_result(MeasureKind::Mixing, params, u, t, th.theta);
}

MeasureResult survival_time(const QbmParams& params, const DiskPoint& u,
                            const GaussianOptions& options) {
  const ThetaThreshold th = theta_for(params);
  const GaussianGenerators gen = gaussian::qbm_generators(params, u, 1.0);
  const Mat2 vc = gaussian::riccati_steady(gen).covariance();
  gaussian::LyapunovStepper flow(gen, vc);
  const double t = crossing_time(
      flow,
      [&](const gaussian::LyapunovStepper& f, double tau) {
        const Mat2 sigma =
            vc + f.covariance() + gaussian::displacement_covariance(gen, vc, tau);
        return 1.0 / std::sqrt(sigma.determinant());
      },
      th.theta, options);
  return gaussian_result(MeasureKind::Survival, params, u, t, th.theta);
}

MeasureResult evaluate(MeasureKind kind, const QbmParams& params, const DiskPoint& u,
                       const GaussianOptions& options) {
  switch (kind) {
    case MeasureKind::Purification:
      return purification_time(params, u, options);
    case MeasureKind::EfficiencyThreshold:
      return efficiency_threshold(params, u, options);
    case MeasureKind::Mixing:
      return mixing_time(params, u, options);
    case MeasureKind::Survival:
      return survival_time(params, u, options);
  }
  throw InvalidArgument("unknown measure kind");
}

}  // namespace unravel::measures
