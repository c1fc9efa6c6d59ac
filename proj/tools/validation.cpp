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

#include "cli.hpp"
#include "unravel/errors.hpp"
#include "unravel/measures.hpp"
#include "unravel/systems.hpp"
#include "unravel/version.hpp"

namespace unravel::cli {

namespace {

Check make_check(std::string name, double value, double tolerance, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.tolerance = tolerance;
  c.passed = std::isfinite(value) && value <= tolerance;
  c.detail = std::move(detail);
  return c;
}

Check flag_check(std::string name, bool ok, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.passed = ok;
  c.value = ok ? 0.0 : 1.0;
  c.detail = std::move(detail);
  return c;
}

double moment_error(const gaussian::CovarianceState& a, const gaussian::CovarianceState& b) {
  return std::max({std::abs(a.var_q - b.var_q), std::abs(a.var_p - b.var_p),
                   std::abs(a.cov_qp - b.cov_qp), std::abs(a.mean_q - b.mean_q),
                   std::abs(a.mean_p - b.mean_p)});
}

}  // namespace

bool SuiteReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

report::Json SuiteReport::to_json() const {
  report::Json list = report::Json::array();
  for (const auto& c : checks) {
    report::Json j{{"name", c.name},
                   {"passed", c.passed},
                   {"value", std::isfinite(c.value) ? report::Json(c.value)
                                                    : report::Json(report::format_number(c.value))},
                   {"tolerance", c.tolerance}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    list.push_back(std::move(j));
  }
  return report::Json{{"suite", suite}, {"passed", passed()}, {"checks", std::move(list)},
                      {"version", kVersion}};
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"invariance", "gaussian-oracle", "properties",
                                              "all"};
  return names;
}

SuiteReport invariance_suite(const InvarianceOptions& o) {
  SuiteReport rep{"invariance", {}};
  const systems::TlaParams params{o.omega, o.gamma};
  const auto model = systems::build_tla(params);
  const auto rho0 = hilbert::DensityMatrix::basis_state(2, 1);
  const double dt = o.dt / o.gamma;
  const double horizon = o.horizon / o.gamma;
  const auto reference = hilbert::propagate_grid(model, rho0, horizon, dt, o.stride);
  for (double eta : o.etas) {
    for (const auto& spec : systems::tla_unravellings(params, eta)) {
      trajectories::TrajectoryConfig cfg;
      cfg.dt = dt;
      cfg.horizon = horizon;
      cfg.seed = o.seed;
      cfg.sample_stride = o.stride;
      cfg.record_innovations = false;
      trajectories::EnsembleOptions eo;
      eo.threads = o.threads;
      const auto ens = trajectories::run_ensemble(model, spec, rho0, cfg, o.n_traj,
                                                  trajectories::Statistic::MeanState, eo);
      const std::size_t n = std::min(ens.mean_states.size(), reference.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        worst = std::max(worst, hilbert::trace_distance(ens.mean_states[k],
                                                        reference[k].matrix()));
      std::ostringstream name;
      name << spec.name() << " eta=" << eta;
      rep.checks.push_back(make_check(name.str(), worst, o.tolerance, "max trace distance"));
    }
  }
  return rep;
}

SuiteReport gaussian_oracle_suite(const OracleOptions& o) {
  SuiteReport rep{"gaussian-oracle", {}};
  const gaussian::QbmParams params{o.temperature};
  const auto oracle = systems::build_qbm_oracle(params, o.truncation);
  const auto gen0 = gaussian::qbm_generators(params, {1.0, 0.0}, 0.0);
  const Mat2 vacuum = 0.5 * Mat2::Identity();

  // Gaussian state written into Fock space keeps its moments.
  const auto reference =
      gaussian::CovarianceState::from(gaussian::lyapunov_propagate(gen0, vacuum, 1.0));
  const CMat embedded = systems::gaussian_to_fock(reference, o.truncation);
  rep.checks.push_back(make_check("fock embedding moments",
                                  moment_error(systems::fock_moments(oracle.fock, embedded),
                                               reference),
                                  o.tolerance));

  // Unconditional evolution of the vacuum against the Lyapunov flow.
  const auto vac = hilbert::DensityMatrix::basis_state(o.truncation, 0);
  const auto states = hilbert::propagate_grid(oracle.model, vac, 2.0, 1e-3, 250);
  double moments = 0.0;
  double purity = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double t = 0.25 * static_cast<double>(k);
    const auto v = gaussian::CovarianceState::from(gaussian::lyapunov_propagate(gen0, vacuum, t));
    moments = std::max(moments, moment_error(systems::fock_moments(oracle.fock,
                                                                   states[k].matrix()),
                                             v));
    purity = std::max(purity,
                      std::abs(hilbert::purity(states[k]) - gaussian::gaussian_purity(v)));
  }
  rep.checks.push_back(make_check("unconditional moments", moments, o.tolerance));
  rep.checks.push_back(make_check("unconditional purity", purity, o.tolerance));

  if (o.n_traj > 0) {
    const auto prep = hilbert::propagate(oracle.model, vac, 1.0, 1e-3);
    const auto gen = gaussian::qbm_generators(params, {1.0, 0.0}, 1.0);
    const auto start = gaussian::CovarianceState::from(gaussian::lyapunov_propagate(gen0, vacuum, 1.0));
    const auto flow = gaussian::riccati_flow(gen, start, o.horizon, o.dt);
    trajectories::TrajectoryConfig cfg;
    cfg.dt = o.dt;
    cfg.horizon = o.horizon;
    cfg.seed = o.seed;
    cfg.sample_stride = std::max(1, static_cast<int>(std::lround(0.05 / o.dt)));
    cfg.record_innovations = false;
    trajectories::EnsembleOptions eo;
    eo.threads = o.threads;
    const auto curve =
        trajectories::run_ensemble(oracle.model, trajectories::UnravellingSpec::homodyne_x(1.0),
                                   prep, cfg, o.n_traj, trajectories::Statistic::Purity, eo)
            .curve;
    double ratio = 0.0;
    for (std::size_t k = 0; k < curve.times.size(); ++k) {
      const auto idx = static_cast<std::size_t>(std::lround(curve.times[k] / o.dt));
      if (idx >= flow.size()) break;
      const double dev = std::abs(curve.mean[k] - gaussian::gaussian_purity(flow[idx]));
      ratio = std::max(ratio, dev / std::max(o.tolerance, 3.0 * curve.stderr_[k]));
    }
    rep.checks.push_back(make_check("conditional purity", ratio, 1.0,
                                    "max |mc - riccati| / max(tol, 3 stderr)"));
  }
  return rep;
}

SuiteReport property_suite(int threads) {
  SuiteReport rep{"properties", {}};

  {
    const auto gen = gaussian::qbm_generators({0.5}, {1.0, 0.0}, 0.0);
    const gaussian::CovarianceState v0{};
    const auto ric = gaussian::riccati_flow(gen, v0, 5.0, 1e-3);
    const auto lya = gaussian::lyapunov_flow(gen, v0, 5.0, 1e-3);
    double worst = 0.0;
    for (std::size_t k = 0; k < std::min(ric.size(), lya.size()); ++k)
      worst = std::max(worst, moment_error(ric[k], lya[k]));
    rep.checks.push_back(make_check("eta=0 riccati equals lyapunov", worst, 1e-10));
  }

  const systems::TlaParams still{0.0, 1.0};
  const auto decay = systems::build_tla(still);
  measures::McOptions mc;
  mc.n_traj = 20;
  mc.threads = threads;
  {
    const auto r = measures::purification_time_mc(decay, trajectories::UnravellingSpec::homodyne_x(), mc);
    rep.checks.push_back(make_check("omega=0 tau_pur", std::abs(r.value), 0.0));
  }
  {
    bool degenerate = false;
    std::string what;
    try {
      measures::efficiency_threshold_mc(decay, trajectories::UnravellingSpec::direct(), mc);
      what = "no error raised";
    } catch (const DegenerateMeasureError&) {
      degenerate = true;
    } catch (const Error& e) {
      what = e.what();
    }
    rep.checks.push_back(flag_check("omega=0 eta_thr degenerate", degenerate, what));
  }

  {
    const systems::TlaParams p{2.0, 1.0};
    const auto model = systems::build_tla(p);
    trajectories::TrajectoryConfig cfg;
    cfg.horizon = 1.0;
    cfg.seed = 7;
    cfg.sample_stride = 50;
    const auto rho0 = hilbert::steady_state(model);
    bool identical = true;
    for (const auto& spec : systems::tla_unravellings(p)) {
      trajectories::EnsembleOptions one;
      one.threads = 1;
      trajectories::EnsembleOptions many;
      many.threads = std::max(2, trajectories::resolve_threads(threads));
      const auto a = trajectories::run_ensemble(model, spec, rho0, cfg, 70, trajectories::Statistic::Purity, one);
      const auto b = trajectories::run_ensemble(model, spec, rho0, cfg, 70, trajectories::Statistic::Purity, many);
      const auto c = trajectories::run_ensemble(model, spec, rho0, cfg, 70, trajectories::Statistic::Purity, one);
      identical = identical && a.curve.mean == b.curve.mean && a.curve.stderr_ == b.curve.stderr_ &&
                  a.curve.mean == c.curve.mean && a.curve.stderr_ == c.curve.stderr_;
    }
    rep.checks.push_back(flag_check("same seed reproducible", identical));
  }

  {
    const systems::TlaParams p{2.0, 1.0};
    const auto model = systems::build_tla(p);
    trajectories::TrajectoryConfig cfg;
    cfg.horizon = 2.0;
    cfg.seed = 3;
    double loss = 0.0;
    for (const auto& spec : systems::tla_unravellings(p)) {
      const auto traj = trajectories::run_trajectory(model, spec, hilbert::DensityMatrix::basis_state(2, 1), cfg);
      for (const auto& s : traj.states) loss = std::max(loss, 1.0 - hilbert::purity(s));
    }
    rep.checks.push_back(make_check("efficient unravellings keep purity", loss, 1e-9));
  }

  {
    const auto s = gaussian::survival_curve(gaussian::QbmParams{1.0}, {1.0, 0.0}, {0.0});
    rep.checks.push_back(make_check("survival overlap at tau=0", std::abs(s.at(0) - 1.0), 1e-9));
  }
  return rep;
}

}  // namespace unravel::cli
