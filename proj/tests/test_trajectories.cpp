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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "unravel/errors.hpp"
#include "unravel/systems.hpp"
#include "unravel/trajectories.hpp"

using namespace unravel;
using namespace unravel::trajectories;
using hilbert::DensityMatrix;

TEST_CASE("scheme names") {
  for (auto s : {Scheme::Direct, Scheme::HomodyneX, Scheme::HomodyneY, Scheme::Heterodyne,
                 Scheme::AID, Scheme::GeneralDyne})
    CHECK(parse_scheme(scheme_name(s)) == s);
  CHECK_THROWS_AS(parse_scheme("photon-counting-with-feedback"), InvalidArgument);
  CHECK(UnravellingSpec::homodyne_x().upsilon() == cplx(1.0));
  CHECK(UnravellingSpec::homodyne_y().upsilon() == cplx(-1.0));
  CHECK(UnravellingSpec::heterodyne().upsilon() == cplx(0.0));
  CHECK_THROWS_AS(UnravellingSpec::direct().upsilon(), InvalidArgument);
  CHECK_THROWS_AS(validate(UnravellingSpec::direct(1.5)), InvalidArgument);
  CHECK_THROWS_AS(validate(UnravellingSpec::aid(0.0)), InvalidArgument);
  TrajectoryConfig bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(validate(bad), InvalidArgument);
}

TEST_CASE("single steps") {
  const auto model = systems::build_tla({1.0, 1.0});
  const auto e = DensityMatrix::basis_state(2, 0);
  SUBCASE("jump step with a certain jump") {
    const auto out = step_jump(model, UnravellingSpec::direct(), e, 1e-9, 0.05);
    CHECK(out.jumped);
    CHECK(hilbert::trace_distance(out.state, DensityMatrix::basis_state(2, 1)) < 1e-12);
  }
  SUBCASE("jump probability must stay small") {
    CHECK_THROWS_AS(step_jump(model, UnravellingSpec::direct(), e, 0.5, 0.5), StepSizeError);
  }
  SUBCASE("diffusive step needs one innovation per channel") {
    CHECK_THROWS_AS(step_diffusive(model, UnravellingSpec::homodyne_x(), e, {}, 1e-3),
                    DimensionError);
    CHECK_THROWS_AS(step_diffusive(model, UnravellingSpec::direct(), e, {0.0}, 1e-3),
                    InvalidArgument);
  }
  SUBCASE("zero innovation gives the no-information update") {
    const auto a = step_diffusive(model, UnravellingSpec::homodyne_x(0.0), e, {0.0}, 1e-4);
    const auto ref = hilbert::propagate(model, e, 1e-4, 1e-4);
    CHECK(hilbert::trace_distance(a, ref) < 1e-7);
  }
  SUBCASE("AID sign flips at detections") {
    InnovationRecord rec;
    CHECK(aid_update(rec, 0.1, false) == 1);
    CHECK(aid_update(rec, 0.2, true) == -1);
    CHECK(aid_update(rec, 0.3, true) == 1);
    CHECK(rec.jump_times == std::vector<double>{0.2, 0.3});
    CHECK(rec.lo_signs == std::vector<int>{-1, 1});
  }
}

TEST_CASE("efficient unravellings keep pure states pure") {
  const systems::TlaParams p{2.0, 1.0};
  const auto model = systems::build_tla(p);
  TrajectoryConfig cfg;
  cfg.horizon = 3.0;
  cfg.seed = 5;
  for (const auto& spec : systems::tla_unravellings(p)) {
    const auto traj = run_trajectory(model, spec, DensityMatrix::basis_state(2, 1), cfg);
    CHECK(traj.states.size() == 3001);
    double worst = 0.0;
    for (const auto& s : traj.states) worst = std::max(worst, 1.0 - hilbert::purity(s));
    CHECK(worst < 1e-9);
  }
  // Inefficient detection mixes.
  const auto traj = run_trajectory(model, UnravellingSpec::homodyne_x(0.5),
                                   DensityMatrix::basis_state(2, 1), cfg);
  CHECK(hilbert::purity(traj.states.back()) < 0.99);
}

TEST_CASE("innovation statistics") {
  const auto model = systems::build_tla({1.0, 1.0});
  TrajectoryConfig cfg;
  cfg.horizon = 200.0;
  cfg.dt = 1e-3;
  cfg.seed = 9;
  cfg.sample_stride = 100000;
  for (auto spec : {UnravellingSpec::homodyne_x(), UnravellingSpec::homodyne_y(),
                    UnravellingSpec::heterodyne(),
                    UnravellingSpec::general_dyne({0.5, 1.0})}) {
    const auto traj = run_trajectory(model, spec, DensityMatrix::basis_state(2, 1), cfg);
    const auto& dw = traj.record.increments;
    REQUIRE(dw.size() == 200000);
    cplx mean = 0.0, sq = 0.0;
    double abs2 = 0.0;
    for (const auto& w : dw) {
      mean += w;
      sq += w * w;
      abs2 += std::norm(w);
    }
    const double n = static_cast<double>(dw.size());
    const double tol = 4.0 / std::sqrt(n);
    CHECK(std::abs(mean / (n * std::sqrt(cfg.dt))) < tol);
    CHECK(abs2 / (n * cfg.dt) == doctest::Approx(1.0).epsilon(2 * tol));
    CHECK(std::abs(sq / (n * cfg.dt) - spec.upsilon()) < 2 * tol);
  }
}

TEST_CASE("detected waiting times of the undriven atom are exponential") {
  const double gamma = 1.0;
  const auto model = systems::build_tla({0.0, gamma});
  TrajectoryConfig cfg;
  cfg.horizon = 14.0;
  cfg.dt = 1e-3;
  cfg.seed = 21;
  cfg.sample_stride = 100000;
  constexpr int n = 10000;
  std::vector<double> waits;
  waits.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto traj = run_trajectory(model, UnravellingSpec::direct(),
                                     DensityMatrix::basis_state(2, 0), cfg,
                                     static_cast<std::uint64_t>(i));
    REQUIRE(traj.record.jump_times.size() <= 1);
    waits.push_back(traj.record.jump_times.empty() ? cfg.horizon : traj.record.jump_times[0]);
  }
  std::sort(waits.begin(), waits.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = 1.0 - std::exp(-gamma * waits[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n),
                  std::abs(f - static_cast<double>(i + 1) / n)});
  }
  // Kolmogorov-Smirnov critical value at the 5% level.
  CHECK(d < 1.358 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("ensemble mean follows the master equation") {
  const systems::TlaParams p{2.0, 1.0};
  const auto model = systems::build_tla(p);
  const auto rho0 = DensityMatrix::basis_state(2, 1);
  TrajectoryConfig cfg;
  cfg.horizon = 2.0;
  cfg.seed = 4;
  cfg.sample_stride = 100;
  const auto ref = hilbert::propagate_grid(model, rho0, 2.0, 1e-3, 100);
  const auto dyne = UnravellingSpec::general_dyne({0.6, 2.2}, 0.7);
  for (const auto& spec : {systems::tla_unravellings(p, 0.7)[3], systems::tla_unravellings(p, 0.7)[4], dyne}) {
    const auto ens = run_ensemble(model, spec, rho0, cfg, 2000, Statistic::MeanState);
    REQUIRE(ens.mean_states.size() == ref.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k)
      worst = std::max(worst, hilbert::trace_distance(ens.mean_states[k], ref[k].matrix()));
    CHECK(worst < 0.05);
  }
}

TEST_CASE("results do not depend on the thread count") {
  const systems::TlaParams p{2.0, 1.0};
  const auto model = systems::build_tla(p);
  const auto rho0 = hilbert::steady_state(model);
  TrajectoryConfig cfg;
  cfg.horizon = 1.0;
  cfg.seed = 8;
  cfg.sample_stride = 20;
  for (const auto& spec : systems::tla_unravellings(p)) {
    EnsembleOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const auto a = run_ensemble(model, spec, rho0, cfg, 101, Statistic::Purity, one);
    const auto b = run_ensemble(model, spec, rho0, cfg, 101, Statistic::Purity, four);
    CHECK(a.curve.mean == b.curve.mean);
    CHECK(a.curve.stderr_ == b.curve.stderr_);
    FrozenCurves fa, fb;
    EnsembleOptions small = one;
    small.frozen = {1.0, 0.5, 2, 1.0, 0.1};
    fa = run_frozen(model, spec, rho0, cfg, 40, small);
    small.threads = 3;
    fb = run_frozen(model, spec, rho0, cfg, 40, small);
    CHECK(fa.survival.mean == fb.survival.mean);
    CHECK(fa.mixing.stderr_ == fb.mixing.stderr_);
  }
}

TEST_CASE("frozen statistics start at the conditional purity") {
  const systems::TlaParams p{2.0, 1.0};
  const auto model = systems::build_tla(p);
  TrajectoryConfig cfg;
  cfg.seed = 2;
  EnsembleOptions opts;
  opts.frozen = {3.0, 1.0, 3, 2.0, 0.05};
  for (const auto& spec : systems::tla_unravellings(p)) {
    const auto f = run_frozen(model, spec, hilbert::DensityMatrix::basis_state(2, 1), cfg, 50, opts);
    CHECK(f.mixing.mean.front() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.survival.mean.front() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.mixing.times.size() == 41);
    // Long unobserved evolution approaches the stationary purity from above.
    const double pss = hilbert::purity(hilbert::steady_state(model));
    CHECK(f.mixing.mean.back() > pss - 1e-9);
  }
}

TEST_CASE("late-time purity") {
  const systems::TlaParams p{1.0, 1.0};
  const auto model = systems::build_tla(p);
  const auto rho_ss = hilbert::steady_state(model);
  TrajectoryConfig cfg;
  cfg.horizon = 4.0;
  cfg.seed = 6;
  const auto none = late_time_purity(model, UnravellingSpec::homodyne_x(0.0), rho_ss, cfg, 10);
  // Unmeasured: stays at the stationary state up to the O(dt) step bias.
  CHECK(none.mean == doctest::Approx(hilbert::purity(rho_ss)).epsilon(1e-3));
  const auto ground = hilbert::DensityMatrix::basis_state(2, 1);
  const auto full = late_time_purity(model, UnravellingSpec::direct(1.0), ground, cfg, 50);
  CHECK(full.mean == doctest::Approx(1.0).epsilon(1e-9));
  const auto half = late_time_purity(model, UnravellingSpec::direct(0.5), rho_ss, cfg, 200);
  CHECK(half.mean > none.mean);
  CHECK(half.mean < 1.0);
  CHECK(half.stderr_ > 0.0);
}

TEST_CASE("trajectory dump") {
  const auto model = systems::build_tla({1.0, 1.0});
  TrajectoryConfig cfg;
  cfg.horizon = 0.01;
  cfg.sample_stride = 5;
  EnsembleOptions opts;
  opts.dump_path = "trajectory_dump_test.csv";
  opts.threads = 2;
  run_ensemble(model, UnravellingSpec::homodyne_x(), hilbert::steady_state(model), cfg, 3,
               Statistic::Purity, opts);
  std::ifstream in(opts.dump_path);
  std::string line;
  do {
    REQUIRE(std::getline(in, line));
  } while (line.starts_with("#"));
  CHECK(line == "t,statistic,trajectory");
  int rows = 0;
  std::vector<int> ids;
  while (std::getline(in, line)) {
    ++rows;
    ids.push_back(std::stoi(line.substr(line.rfind(',') + 1)));
  }
  CHECK(rows == 9);
  CHECK(std::is_sorted(ids.begin(), ids.end()));
  std::remove(opts.dump_path.c_str());
}

TEST_CASE("sparse backend agrees with the dense two-level backend") {
  // Embed the atom in a 3-level space with an uncoupled third level.
  const auto small = systems::build_tla({1.5, 1.0});
  CMat h = CMat::Zero(3, 3), l = CMat::Zero(3, 3);
  h.topLeftCorner(2, 2) = small.hamiltonian();
  l.topLeftCorner(2, 2) = small.jump_operators()[0];
  const hilbert::LindbladModel big(h, {l});
  CMat r0 = CMat::Zero(3, 3);
  r0(1, 1) = 1.0;
  TrajectoryConfig cfg;
  cfg.horizon = 2.0;
  cfg.seed = 3;
  cfg.sample_stride = 200;
  for (auto spec : {UnravellingSpec::homodyne_x(), UnravellingSpec::direct(0.8)}) {
    const auto a = run_ensemble(small, spec, DensityMatrix::basis_state(2, 1), cfg, 200, Statistic::Purity);
    const auto b = run_ensemble(big, spec, DensityMatrix(r0), cfg, 200, Statistic::Purity);
    for (std::size_t k = 0; k < a.curve.mean.size(); ++k)
      CHECK(std::abs(a.curve.mean[k] - b.curve.mean[k]) < 0.02);
  }
}
