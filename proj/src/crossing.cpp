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
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "unravel/errors.hpp"
#include "unravel/measures.hpp"

namespace unravel::measures {

std::string measure_name(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::Purification:
      return "tau_pur";
    case MeasureKind::EfficiencyThreshold:
      return "eta_thr";
    case MeasureKind::Mixing:
      return "tau_mix";
    case MeasureKind::Survival:
      return "tau_sur";
  }
  return "unknown";
}

MeasureKind parse_measure(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::replace(s.begin(), s.end(), '-', '_');
  if (s == "tau_pur" || s == "pur" || s == "purification") return MeasureKind::Purification;
  if (s == "eta_thr" || s == "thr" || s == "efficiency") return MeasureKind::EfficiencyThreshold;
  if (s == "tau_mix" || s == "mix" || s == "mixing") return MeasureKind::Mixing;
  if (s == "tau_sur" || s == "sur" || s == "survival") return MeasureKind::Survival;
  throw InvalidArgument("unknown measure '" + name + "'");
}

const std::vector<MeasureKind>& all_measures() {
  static const std::vector<MeasureKind> kinds{MeasureKind::Purification,
                                              MeasureKind::EfficiencyThreshold,
                                              MeasureKind::Mixing, MeasureKind::Survival};
  return kinds;
}

bool larger_is_better(MeasureKind kind) {
  return kind == MeasureKind::Mixing || kind == MeasureKind::Survival;
}

ThetaThreshold ThetaThreshold::from_purity(double steady_purity) {
  if (!(steady_purity >= 0.0) || steady_purity > 1.0 + 1e-9)
    throw InvalidArgument("steady-state purity must lie in [0, 1]");
  ThetaThreshold t;
  t.steady_purity = std::min(steady_purity, 1.0);
  t.theta = 0.5 * (1.0 + t.steady_purity);
  return t;
}

bool ThetaThreshold::degenerate() const { return steady_purity >= 1.0 - 1e-12; }

ThetaThreshold theta_for(const hilbert::LindbladModel& model) {
  return ThetaThreshold::from_purity(hilbert::purity(hilbert::steady_state(model)));
}

ThetaThreshold theta_for(const gaussian::QbmParams& params) {
  gaussian::validate(params);
  return ThetaThreshold::from_purity(0.0);
}

void validate(const CrossingCurve& curve) {
  if (curve.times.empty() || curve.times.size() != curve.values.size())
    throw InvalidArgument("crossing curve: times and values must be non-empty and equal length");
  for (std::size_t i = 1; i < curve.times.size(); ++i)
    if (!(curve.times[i] > curve.times[i - 1]))
      throw InvalidArgument("crossing curve: time grid must be strictly increasing");
  for (double v : curve.values)
    if (!std::isfinite(v)) throw InvalidArgument("crossing curve: non-finite value");
  if (!std::isfinite(curve.theta)) throw InvalidArgument("crossing curve: non-finite theta");
}

std::size_t crossing_interval(const CrossingCurve& curve) {
  validate(curve);
  const auto& v = curve.values;
  const double th = curve.theta;
  if (v.size() == 1 && v[0] == th) return 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if ((v[i] - th) * (v[i + 1] - th) <= 0.0) return i;
  std::ostringstream msg;
  msg << "no crossing of theta=" << th << " within horizon t=" << curve.times.back()
      << " (curve runs from " << v.front() << " to " << v.back() << ")";
  throw HorizonError(msg.str(), v.front(), v.back());
}

double first_crossing(const CrossingCurve& curve) {
  const std::size_t i = crossing_interval(curve);
  const auto& t = curve.times;
  const auto& v = curve.values;
  if (v[i] == curve.theta || i + 1 == v.size()) return t[i];
  const double w = (curve.theta - v[i]) / (v[i + 1] - v[i]);
  return t[i] + w * (t[i + 1] - t[i]);
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo < hi)) throw InvalidArgument("bisect: need lo < hi");
  double flo = f(lo);
  double fhi = f(hi);
  if (flo > 0.0 || fhi < 0.0) {
    std::ostringstream msg;
    msg << "no sign change on [" << lo << ", " << hi << "]: f = " << flo << ", " << fhi;
    throw BracketError(msg.str());
  }
  if (fhi == 0.0) return hi;
  if (flo == 0.0) return lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    (fm < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> curve_crossing(const trajectories::EnsembleCurve& curve, double theta) {
  CrossingCurve c{curve.times, curve.mean, theta};
  const std::size_t i = crossing_interval(c);
  const double t = first_crossing(c);
  if (i + 1 >= curve.times.size() || curve.mean[i + 1] == curve.mean[i])
    return {t, curve.stderr_.empty() ? 0.0 : curve.stderr_[i]};
  const double dt = curve.times[i + 1] - curve.times[i];
  const double slope = (curve.mean[i + 1] - curve.mean[i]) / dt;
  const double w = (t - curve.times[i]) / dt;
  const double se = (1.0 - w) * curve.stderr_[i] + w * curve.stderr_[i + 1];
  return {t, se / std::abs(slope)};
}

}  // namespace unravel::measures
