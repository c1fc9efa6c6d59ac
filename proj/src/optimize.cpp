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
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include "unravel/errors.hpp"
#include "unravel/measures.hpp"
#include "unravel/parallel.hpp"

namespace unravel::measures {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& step,
                             double tol, int max_iterations) {
  const std::size_t n = x0.size();
  if (n == 0 || step.size() != n) throw InvalidArgument("nelder_mead: bad dimensions");
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  auto combine = [&](const std::vector<double>& c, const std::vector<double>& x, double t) {
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) y[k] = c[k] + t * (x[k] - c[k]);
    return y;
  };

  NelderMeadResult out;
  std::vector<std::size_t> order(n + 1);
  for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        diameter = std::max(diameter, std::abs(pts[i][k] - pts[best][k]));
    if (diameter < tol) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);

    const auto xr = combine(centroid, pts[worst], -1.0);
    const double fr = f(xr);
    if (fr < vals[best]) {
      const auto xe = combine(centroid, pts[worst], -2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const auto xc = combine(centroid, outside ? xr : pts[worst], 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = combine(pts[best], pts[i], 0.5);
      vals[i] = f(pts[i]);
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  out.x = pts[static_cast<std::size_t>(it - vals.begin())];
  out.value = *it;
  return out;
}

namespace {

gaussian::DiskPoint to_disk(const std::vector<double>& x) {
  const double two_pi = 2.0 * std::numbers::pi;
  double phi = std::fmod(x[1], two_pi);
  if (phi < 0.0) phi += two_pi;
  return gaussian::make_disk_point(std::clamp(x[0], 0.0, 1.0), phi);
}

}  // namespace

DiskOptimum optimize_disk(const gaussian::QbmParams& params, MeasureKind kind,
                          const OptimizeOptions& options) {
  gaussian::validate(params);
  if (options.r_points < 2 || options.phi_points < 1)
    throw InvalidArgument("optimize_disk: need r_points >= 2 and phi_points >= 1");
  const double sign = larger_is_better(kind) ? -1.0 : 1.0;
  DiskOptimum out;
  std::optional<MeasureResult> best;
  gaussian::DiskPoint best_point;

  auto attempt = [&](const gaussian::DiskPoint& u) -> std::optional<MeasureResult> {
    ++out.evaluations;
    try {
      MeasureResult r = evaluate(kind, params, u, options.gaussian);
      if (!std::isfinite(r.value)) throw ConvergenceError("non-finite measure value");
      return r;
    } catch (const Error&) {
      ++out.failures;
      return std::nullopt;
    }
  };
  auto consider = [&](const gaussian::DiskPoint& u, const MeasureResult& r) {
    if (!best || sign * r.value < sign * best->value) {
      best = r;
      best_point = u;
    }
  };

  std::vector<gaussian::DiskPoint> grid;
  for (int i = 0; i < options.r_points; ++i) {
    const double r = static_cast<double>(i) / (options.r_points - 1);
    const int n_phi = r == 0.0 ? 1 : options.phi_points;
    for (int j = 0; j < n_phi; ++j)
      grid.push_back(
          gaussian::make_disk_point(r, 2.0 * std::numbers::pi * j / options.phi_points));
  }
  std::vector<std::optional<MeasureResult>> values(grid.size());
  detail::parallel_for(static_cast<long>(grid.size()),
                       trajectories::resolve_threads(options.threads), [&](long i) {
                         try {
                           values[i] = evaluate(kind, params, grid[i], options.gaussian);
                           if (!std::isfinite(values[i]->value)) values[i].reset();
                         } catch (const Error&) {
                         }
                       });
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ++out.evaluations;
    if (values[i])
      consider(grid[i], *values[i]);
    else
      ++out.failures;
  }
  if (!best) throw ConvergenceError("optimize_disk: the measure failed at every grid point");

  auto objective = [&](const std::vector<double>& x) {
    const auto res = attempt(to_disk(x));
    return res ? sign * res->value : std::numeric_limits<double>::infinity();
  };
  const double dr = 1.0 / (options.r_points - 1);
  const double dphi = 2.0 * std::numbers::pi / options.phi_points;
  const auto nm = nelder_mead(objective, {best_point.r, best_point.phi}, {best_point.r >= 0.5 ? -0.5 * dr : 0.5 * dr, 0.5 * dphi},
                              options.simplex_tol, options.max_iterations);
  const auto u = to_disk(nm.x);
  if (auto res = attempt(u)) consider(u, *res);

  out.point = best_point;
  out.result = *best;
  return out;
}

}  // namespace unravel::measures
