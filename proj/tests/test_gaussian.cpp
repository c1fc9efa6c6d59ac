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

#include <cmath>
#include <numbers>

#include "unravel/errors.hpp"
#include "unravel/gaussian.hpp"
#include "unravel/random.hpp"

#include <unsupported/Eigen/KroneckerProduct>

using namespace unravel;
using namespace unravel::gaussian;

namespace {

// Filter equation written out directly:
// dV/dt = A V + V A^T + D - 4 eta (V N + G) S (V N + G)^T.
Mat2 filter_rhs(const GaussianGenerators& g, const Mat2& v) {
  const Mat2 k = v * g.gain_slope + g.gain_offset;
  return g.drift * v + v * g.drift.transpose() + g.diffusion -
         4.0 * g.efficiency * k * g.noise_covariance * k.transpose();
}

Mat2 rk4_filter(const GaussianGenerators& g, Mat2 v, double t, double h, bool measured = true) {
  GaussianGenerators u = g;
  if (!measured) u.efficiency = 0.0;
  const int n = static_cast<int>(std::lround(t / h));
  for (int i = 0; i < n; ++i) {
    const Mat2 k1 = filter_rhs(u, v);
    const Mat2 k2 = filter_rhs(u, v + 0.5 * h * k1);
    const Mat2 k3 = filter_rhs(u, v + 0.5 * h * k2);
    const Mat2 k4 = filter_rhs(u, v + h * k3);
    v += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return v;
}

// Precision form of the same equation, integrated from a (possibly
// singular) precision L: dL/dt = -L A - A^T L - L D L + 4 eta (N + L G) S (N + L G)^T.
Mat2 precision_rhs(const GaussianGenerators& g, const Mat2& l) {
  const Mat2 k = g.gain_slope + l * g.gain_offset;
  return -l * g.drift - g.drift.transpose() * l - l * g.diffusion * l +
         4.0 * g.efficiency * k * g.noise_covariance * k.transpose();
}

Mat2 rk4_precision(const GaussianGenerators& g, Mat2 l, double t, double h) {
  const int n = static_cast<int>(std::lround(t / h));
  for (int i = 0; i < n; ++i) {
    const Mat2 k1 = precision_rhs(g, l);
    const Mat2 k2 = precision_rhs(g, l + 0.5 * h * k1);
    const Mat2 k3 = precision_rhs(g, l + 0.5 * h * k2);
    const Mat2 k4 = precision_rhs(g, l + h * k3);
    l += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return l;
}

double max_diff(const Mat2& a, const Mat2& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("covariance states") {
  const CovarianceState vac{};
  CHECK(gaussian_purity(vac) == doctest::Approx(1.0));
  CHECK_NOTHROW(validate(vac));
  CovarianceState thermal{1.5, 1.5, 0.0};
  CHECK(gaussian_purity(thermal) == doctest::Approx(1.0 / 3.0));
  CovarianceState bad{0.4, 0.4, 0.0};
  CHECK_THROWS_AS(validate(bad), InvariantError);
  CHECK(gaussian_overlap(vac, vac) == doctest::Approx(1.0));
  CovarianceState shifted{0.5, 0.5, 0.0, 1.0, 0.0};
  // |<0|alpha>|^2 = exp(-|alpha|^2) with alpha = (q + ip)/sqrt(2).
  CHECK(gaussian_overlap(vac, shifted) == doctest::Approx(std::exp(-0.5)));
  CHECK(gaussian_overlap(thermal, shifted) == doctest::Approx(gaussian_overlap(shifted, thermal)));
}

TEST_CASE("disk points and generator structure") {
  CHECK_THROWS_AS(make_disk_point(1.1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_disk_point(-0.1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(qbm_generators({-1.0}, {1, 0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(qbm_generators({1.0}, {1, 0}, 1.5), InvalidArgument);
  const double t = 2.0;
  const auto g = qbm_generators({t}, {0.3, 1.0}, 0.7);
  CHECK(g.drift(0, 0) == 0.0);
  CHECK(g.drift(0, 1) == 1.0);
  CHECK(g.drift(1, 1) == -1.0);
  CHECK(g.diffusion(0, 0) == doctest::Approx(1.0 / (8 * t)));
  CHECK(g.diffusion(1, 1) == doctest::Approx(2 * t));
  CHECK(g.noise_covariance.trace() == doctest::Approx(1.0));
  CHECK(g.noise_covariance.determinant() == doctest::Approx(0.25 * (1 - 0.09)));
}

TEST_CASE("unmeasured conditional flow equals the Lyapunov flow") {
  const auto g = qbm_generators({0.5}, {1, 0}, 0.0);
  const auto ric = riccati_flow(g, CovarianceState{}, 5.0, 1e-3);
  const auto lya = lyapunov_flow(g, CovarianceState{}, 5.0, 1e-3);
  REQUIRE(ric.size() == lya.size());
  for (std::size_t k = 0; k < ric.size(); ++k)
    CHECK(max_diff(ric[k].covariance(), lya[k].covariance()) < 1e-10);
}

TEST_CASE("exact Lyapunov propagation matches direct integration") {
  for (double temp : {0.5, 3.0}) {
    const auto g = qbm_generators({temp}, {1, 0}, 0.0);
    const Mat2 v0 = 0.5 * Mat2::Identity();
    for (double t : {0.3, 1.0, 4.0}) {
      const Mat2 exact = lyapunov_propagate(g, v0, t);
      const Mat2 rk = rk4_filter(g, v0, t, 1e-4, false);
      CHECK(max_diff(exact, rk) < 1e-9 * std::max(1.0, rk.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("conditional flow matches direct integration of the filter") {
  const auto g = qbm_generators({1.0}, {0.6, 2.0}, 0.8);
  const auto flow = riccati_flow(g, CovarianceState{}, 2.0, 1e-3);
  CHECK(max_diff(flow.back().covariance(), rk4_filter(g, 0.5 * Mat2::Identity(), 2.0, 1e-4)) < 1e-9);
  for (const auto& v : flow) CHECK(v.determinant() >= 0.25 - 1e-12);
}

TEST_CASE("stationary conditional covariance") {
  for (double temp : {0.5, 1.0, 10.0, 1e3}) {
    for (double phi : {0.0, 1.0, 2.5, 3.0}) {
      const auto g = qbm_generators({temp}, {1.0, phi}, 1.0);
      const Mat2 v = riccati_steady(g).covariance();
      const double scale = std::max(1.0, g.diffusion.cwiseAbs().maxCoeff());
      CHECK(filter_rhs(g, v).cwiseAbs().maxCoeff() < 1e-9 * scale);
      // Efficient homodyne conditioning keeps the state pure.
      CHECK(gaussian_purity(v) == doctest::Approx(1.0).epsilon(1e-8));
      // Attractor of the flow; near phi = pi q is barely observed and the
      // approach is too slow to integrate here.
      if (phi > 2.5) continue;
      const Mat2 late = rk4_filter(g, 0.5 * Mat2::Identity(), 30.0, 2e-4 / std::sqrt(temp));
      CHECK(max_diff(late, v) < 1e-6 * std::max(1.0, v.cwiseAbs().maxCoeff()));
    }
  }
  const auto inefficient = qbm_generators({1.0}, {1.0, 0.0}, 0.3);
  CHECK(gaussian_purity(riccati_steady(inefficient)) < 1.0);
}

TEST_CASE("unconditional limit has no normalizable state") {
  const auto g = qbm_generators({0.5}, {1, 0}, 0.0);
  CHECK_THROWS_AS(lyapunov_steady(g), StabilityError);
  const Mat2 l = unconditional_precision(g);
  CHECK(purity_from_precision(l) == doctest::Approx(0.0).epsilon(1e-12));
  // Long unmeasured evolution from the vacuum converges to the same precision.
  const Mat2 late = lyapunov_propagate(g, 0.5 * Mat2::Identity(), 1e5).inverse();
  CHECK(max_diff(late, l) < 1e-3 * l.cwiseAbs().maxCoeff());
}

TEST_CASE("precision flow from a singular start") {
  const auto g = qbm_generators({1.0}, {1.0, 0.7}, 1.0);
  const Mat2 l0 = unconditional_precision(qbm_generators({1.0}, {1, 0}, 0.0));
  PrecisionFlow flow(g, l0);
  CHECK(flow.purity() == doctest::Approx(0.0).epsilon(1e-12));
  for (double t : {0.05, 0.2, 1.0}) {
    flow.advance_to(t);
    const Mat2 oracle = rk4_precision(g, l0, t, 1e-5);
    CHECK(max_diff(flow.precision(), oracle) < 1e-8 * oracle.cwiseAbs().maxCoeff());
  }
  // Proper start: agrees with the covariance flow.
  PrecisionFlow proper(g, 2.0 * Mat2::Identity());
  proper.advance_to(1.5);
  const auto cov = riccati_flow(g, CovarianceState{}, 1.5, 1e-3).back().covariance();
  CHECK(max_diff(proper.precision().inverse(), cov) < 1e-9);
}

TEST_CASE("survival closed form against sampled conditional means") {
  // A stable drift gives the conditional means a stationary law N(0, M)
  // with A M + M A^T + K = 0, K the innovation covariance of the means.
  auto g = qbm_generators({1.0}, {1.0, 0.4}, 1.0);
  g.drift << -0.3, 1.0, -0.8, -0.6;
  const Mat2 vc = riccati_steady(g).covariance();
  const Mat2 k = g.correction(vc);
  Eigen::Matrix4d op = Eigen::kroneckerProduct(Mat2::Identity(), g.drift) +
                       Eigen::kroneckerProduct(g.drift, Mat2::Identity());
  Mat2 m;
  Eigen::Map<Eigen::Vector4d>(m.data()) =
      op.fullPivLu().solve(-Eigen::Map<const Eigen::Vector4d>(k.data()));
  const Eigen::LLT<Mat2> chol(0.5 * (m + m.transpose()));
  REQUIRE(chol.info() == Eigen::Success);

  const std::vector<double> taus{0.0, 0.5, 1.5, 4.0};
  const auto curve = survival_curve(g, taus);
  random::Philox4x32 rng(11, 0);
  constexpr int n = 100000;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const Mat2 e = expm((g.drift * taus[i]).eval());
    const Mat2 vt = e * vc * e.transpose() + lyapunov_propagate(g, Mat2::Zero(), taus[i]);
    double s = 0.0, ss = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto z = rng.normal_pair();
      const Vec2 mu = chol.matrixL() * Vec2(z[0], z[1]);
      const double o = gaussian_overlap(vc, mu, vt, e * mu);
      s += o;
      ss += o * o;
    }
    const double mean = s / n;
    const double se = std::sqrt(std::max(0.0, ss / n - mean * mean) / n);
    CHECK(std::abs(curve[i] - mean) <= 3 * se + 1e-12);
  }
  CHECK(curve[0] == doctest::Approx(gaussian_purity(vc)));
}

TEST_CASE("survival and mixing curves of the particle") {
  const std::vector<double> taus{0.0, 0.1, 0.5, 1.0, 3.0};
  const auto sur = survival_curve({1.0}, {1.0, 1.0}, taus);
  CHECK(sur[0] == doctest::Approx(1.0));
  for (std::size_t i = 1; i < sur.size(); ++i) CHECK(sur[i] < sur[i - 1]);
  const auto mix = mixing_curve(qbm_generators({1.0}, {1.0, 1.0}, 1.0), taus);
  CHECK(mix[0] == doctest::Approx(1.0));
  for (std::size_t i = 1; i < mix.size(); ++i) CHECK(mix[i] < mix[i - 1]);
  CHECK_THROWS_AS(displacement_covariance(qbm_generators({1.0}, {1, 0}, 1.0),
                                          0.5 * Mat2::Identity(), -1.0) ,
                  InvalidArgument);
}
