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

#include "unravel/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "unravel/errors.hpp"

namespace unravel::gaussian {

namespace {

constexpr double kHeisenbergSlack = 1e-9;

int grid_steps(double duration, double dt) {
  if (duration < 0.0) throw InvalidArgument("flow: duration must be >= 0");
  if (!(dt > 0.0)) throw InvalidArgument("flow: dt must be > 0");
  return static_cast<int>(std::ceil(duration / dt - 1e-12));
}

double matrix_norm(const Mat2& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

Mat2 CovarianceState::covariance() const {
  Mat2 v;
  v << var_q, cov_qp, cov_qp, var_p;
  return v;
}

Vec2 CovarianceState::mean() const { return {mean_q, mean_p}; }

CovarianceState CovarianceState::from(const Mat2& v, const Vec2& mean) {
  return {v(0, 0), v(1, 1), 0.5 * (v(0, 1) + v(1, 0)), mean(0), mean(1)};
}

void validate(const CovarianceState& v, double tol) {
  std::ostringstream os;
  if (!(v.var_q > 0.0) || !(v.var_p > 0.0)) {
    os << "covariance has non-positive variance (V_q=" << v.var_q << ", V_p=" << v.var_p << ")";
    throw InvariantError(os.str());
  }
  if (!(v.determinant() >= 0.25 - tol)) {
    os << "covariance violates the Heisenberg bound: det V = " << v.determinant();
    throw InvariantError(os.str());
  }
}

void validate(const QbmParams& params) {
  if (!(params.temperature > 0.0) || !std::isfinite(params.temperature)) {
    throw InvalidArgument("QBM temperature must be a positive finite number");
  }
}

DiskPoint make_disk_point(double r, double phi) {
  if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("disk point needs 0 <= r <= 1");
  if (!std::isfinite(phi)) throw InvalidArgument("disk point phase must be finite");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(phi, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  if (wrapped >= two_pi) wrapped = 0.0;
  return {r, wrapped};
}

Mat2 GaussianGenerators::gain(const Mat2& v) const { return v * gain_slope + gain_offset; }

Mat2 GaussianGenerators::correction(const Mat2& v) const {
  if (efficiency == 0.0) return Mat2::Zero();
  const Mat2 g = gain(v);
  return symmetrize(4.0 * efficiency * g * noise_covariance * g.transpose());
}

Mat2 GaussianGenerators::lyapunov_rhs(const Mat2& v) const {
  return drift * v + v * drift.transpose() + diffusion;
}

Mat2 GaussianGenerators::riccati_rhs(const Mat2& v) const {
  return lyapunov_rhs(v) - correction(v);
}

Mat2 GaussianGenerators::reduced_drift() const {
  return drift - 4.0 * efficiency * gain_offset * noise_covariance * gain_slope.transpose();
}

Mat2 GaussianGenerators::reduced_diffusion() const {
  return symmetrize(diffusion -
                    4.0 * efficiency * gain_offset * noise_covariance * gain_offset.transpose());
}

Mat2 GaussianGenerators::information_rate() const {
  return symmetrize(4.0 * efficiency * gain_slope * noise_covariance * gain_slope.transpose());
}

Mat4 GaussianGenerators::hamiltonian() const {
  const Mat2 a = reduced_drift();
  Mat4 h;
  h.topLeftCorner<2, 2>() = -a.transpose();
  h.topRightCorner<2, 2>() = information_rate();
  h.bottomLeftCorner<2, 2>() = reduced_diffusion();
  h.bottomRightCorner<2, 2>() = a;
  return h;
}

GaussianGenerators qbm_generators(const QbmParams& params, const DiskPoint& u, double eta) {
  validate(params);
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("efficiency must lie in [0, 1]");
  const DiskPoint w = make_disk_point(u.r, u.phi);
  const double t = params.temperature;
  // c = a q + i b p with a b = 1/2.
  const double a = std::sqrt(2.0 * t);
  const double b = 1.0 / std::sqrt(8.0 * t);

  GaussianGenerators g;
  // H = p^2/2 + (qp+pq)/4 cancels the position damping of D[c]: dq = p, dp = -p.
  g.drift << 0.0, 1.0, 0.0, -1.0;
  g.diffusion << b * b, 0.0, 0.0, a * a;
  g.gain_slope << a, 0.0, 0.0, -b;
  g.gain_offset << -0.5 * b, 0.0, 0.0, 0.5 * a;
  // dW dW* = dt and dW^2 = r e^{i phi} dt for dW = dw_re + i dw_im.
  const double c = w.r * std::cos(w.phi);
  const double s = w.r * std::sin(w.phi);
  g.noise_covariance << 0.5 * (1.0 + c), 0.5 * s, 0.5 * s, 0.5 * (1.0 - c);
  g.efficiency = eta;
  return g;
}

double gaussian_purity(const Mat2& v) {
  const double det = v.determinant();
  if (!(det > 0.0)) throw InvariantError("gaussian_purity: covariance is not positive definite");
  return 1.0 / std::sqrt(4.0 * det);
}

double gaussian_purity(const CovarianceState& v) { return gaussian_purity(v.covariance()); }

double purity_from_precision(const Mat2& precision) {
  return 0.5 * std::sqrt(std::max(0.0, precision.determinant()));
}

double gaussian_overlap(const Mat2& v1, const Vec2& mu1, const Mat2& v2, const Vec2& mu2) {
  const Mat2 sum = v1 + v2;
  const double det = sum.determinant();
  if (!(det > 0.0)) throw DecompositionError("gaussian_overlap: V1 + V2 is singular");
  const Vec2 delta = mu1 - mu2;
  const double quad = delta.dot(sum.ldlt().solve(delta));
  return std::exp(-0.5 * quad) / std::sqrt(det);
}

double gaussian_overlap(const CovarianceState& a, const CovarianceState& b) {
  return gaussian_overlap(a.covariance(), a.mean(), b.covariance(), b.mean());
}

std::vector<CovarianceState> riccati_flow(const GaussianGenerators& gen,
                                          const CovarianceState& v0, double duration,
                                          double dt) {
  validate(v0);
  const int n = grid_steps(duration, dt);
  std::vector<CovarianceState> out{v0};
  if (n == 0) return out;
  out.reserve(n + 1);
  const double h = duration / n;
  Mat2 v = v0.covariance();
  Vec2 mu = v0.mean();
  const Mat2 a = gen.drift;
  for (int i = 1; i <= n; ++i) {
    const Mat2 k1 = gen.riccati_rhs(v);
    const Mat2 k2 = gen.riccati_rhs(v + 0.5 * h * k1);
    const Mat2 k3 = gen.riccati_rhs(v + 0.5 * h * k2);
    const Mat2 k4 = gen.riccati_rhs(v + h * k3);
    v = symmetrize(v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    const Vec2 m1 = a * mu;
    const Vec2 m2 = a * (mu + 0.5 * h * m1);
    const Vec2 m3 = a * (mu + 0.5 * h * m2);
    const Vec2 m4 = a * (mu + h * m3);
    mu += (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    const CovarianceState next = CovarianceState::from(v, mu);
    if (!(next.determinant() >= 0.25 - kHeisenbergSlack) || !(next.var_q > 0.0) ||
        !(next.var_p > 0.0)) {
      std::ostringstream os;
      os << "riccati_flow: Heisenberg bound violated at t=" << i * h
         << " (det V = " << next.determinant() << "); reduce dt";
      throw StepSizeError(os.str());
    }
    out.push_back(next);
  }
  return out;
}

LyapunovStepper::LyapunovStepper(const GaussianGenerators& gen, const Mat2& v0)
    : drift_(gen.drift), diffusion_(gen.diffusion), v_(v0) {
  max_step_ = 1.0 / std::max(1.0, matrix_norm(drift_));
}

void LyapunovStepper::step(double h) {
  if (h != cached_h_) {
    // exp([[-A, D], [0, A^T]] h) = [[., G], [0, F^T]] with F = e^{Ah},
    // int_0^h e^{As} D e^{A^T s} ds = F G.
    Mat4 block = Mat4::Zero();
    block.topLeftCorner<2, 2>() = -drift_ * h;
    block.topRightCorner<2, 2>() = diffusion_ * h;
    block.bottomRightCorner<2, 2>() = drift_.transpose() * h;
    const Mat4 e = expm(block);
    cached_f_ = e.bottomRightCorner<2, 2>().transpose();
    cached_w_ = symmetrize(cached_f_ * e.topRightCorner<2, 2>());
    cached_h_ = h;
  }
  v_ = symmetrize(cached_f_ * v_ * cached_f_.transpose() + cached_w_);
}

void LyapunovStepper::advance_to(double t) {
  if (t < t_) throw InvalidArgument("LyapunovStepper: time must be non-decreasing");
  const double span = t - t_;
  if (span == 0.0) return;
  const int n = std::max(1, static_cast<int>(std::ceil(span / max_step_)));
  const double h = span / n;
  for (int i = 0; i < n; ++i) step(h);
  t_ = t;
}

Mat2 lyapunov_propagate(const GaussianGenerators& gen, const Mat2& v0, double t) {
  if (t < 0.0) throw InvalidArgument("lyapunov_propagate: t must be >= 0");
  LyapunovStepper s(gen, v0);
  s.advance_to(t);
  return s.covariance();
}

std::vector<CovarianceState> lyapunov_flow(const GaussianGenerators& gen,
                                           const CovarianceState& v0, double duration,
                                           double dt) {
  validate(v0);
  const int n = grid_steps(duration, dt);
  std::vector<CovarianceState> out{v0};
  if (n == 0) return out;
  const double h = duration / n;
  LyapunovStepper s(gen, v0.covariance());
  for (int i = 1; i <= n; ++i) {
    s.advance_to(i * h);
    const Vec2 mu = mean_propagator(gen, i * h) * v0.mean();
    out.push_back(CovarianceState::from(s.covariance(), mu));
  }
  return out;
}

namespace {

bool is_hurwitz(const Mat2& a) {
  const Eigen::EigenSolver<Mat2> es(a, false);
  return es.eigenvalues().real().maxCoeff() < 0.0;
}

}  // namespace

CovarianceState lyapunov_steady(const GaussianGenerators& gen) {
  if (!is_hurwitz(gen.drift)) {
    throw StabilityError("lyapunov_steady: drift matrix is not Hurwitz; no stationary state");
  }
  Mat2 v;
  if (!solve_lyapunov2(gen.drift, gen.diffusion, v)) {
    throw StabilityError("lyapunov_steady: singular Lyapunov operator");
  }
  return CovarianceState::from(symmetrize(v));
}

namespace {

// Eigenvectors of H for its two eigenvalues of largest real part span the
// subspace that [X; Y](t) converges to.
void dominant_subspace(const Mat4& h, Eigen::Matrix2cd& x, Eigen::Matrix2cd& y,
                       Eigen::Vector2cd& lambdas) {
  const Eigen::EigenSolver<Mat4> es(h, true);
  const Eigen::Vector4cd w = es.eigenvalues();
  const Eigen::Matrix4cd vecs = es.eigenvectors();
  std::array<int, 4> idx{0, 1, 2, 3};
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return w(i).real() > w(j).real(); });
  for (int k = 0; k < 2; ++k) {
    x.col(k) = vecs.col(idx[k]).head<2>();
    y.col(k) = vecs.col(idx[k]).tail<2>();
    lambdas(k) = w(idx[k]);
  }
}

double riccati_scale(const GaussianGenerators& gen, const Mat2& v) {
  const Mat2 a = gen.reduced_drift();
  const Mat2 q = gen.information_rate();
  return std::max({1e-300, max_abs(gen.reduced_diffusion()), max_abs(a * v),
                   max_abs(v * q * v), max_abs(gen.diffusion)});
}

Mat2 standard_rhs(const GaussianGenerators& gen, const Mat2& v) {
  const Mat2 a = gen.reduced_drift();
  return symmetrize(a * v + v * a.transpose() + gen.reduced_diffusion() -
                    v * gen.information_rate() * v);
}

}  // namespace

CovarianceState riccati_steady(const GaussianGenerators& gen) {
  if (gen.efficiency == 0.0) return lyapunov_steady(gen);
  const Mat4 h = gen.hamiltonian();
  Eigen::Matrix2cd x, y;
  Eigen::Vector2cd lambdas;
  dominant_subspace(h, x, y, lambdas);
  const double hscale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (!(lambdas(1).real() > 1e-9 * hscale)) {
    throw ConvergenceError(
        "riccati_steady: conditional covariance has no stationary value (marginal mode is "
        "not observed)");
  }
  const Eigen::PartialPivLU<Eigen::Matrix2cd> lux(x);
  if (std::abs(x.determinant()) < 1e-300) {
    throw ConvergenceError("riccati_steady: stationary covariance is unbounded");
  }
  Mat2 v = symmetrize((y * lux.inverse()).real());

  const Mat2 a = gen.reduced_drift();
  const Mat2 q = gen.information_rate();
  for (int it = 0; it < 8; ++it) {
    const Mat2 r = standard_rhs(gen, v);
    if (max_abs(r) <= 1e-12 * riccati_scale(gen, v)) break;
    Mat2 delta;
    if (!solve_lyapunov2(a - v * q, r, delta)) break;
    v = symmetrize(v + delta);
  }
  const double residual = max_abs(standard_rhs(gen, v));
  if (!(residual <= 1e-10 * riccati_scale(gen, v))) {
    std::ostringstream os;
    os << "riccati_steady: residual " << residual << " above tolerance";
    throw ConvergenceError(os.str());
  }
  CovarianceState out = CovarianceState::from(v);
  validate(out);
  return out;
}

Mat2 unconditional_precision(const GaussianGenerators& gen) {
  const Eigen::EigenSolver<Mat2> es(gen.drift, true);
  const Eigen::Vector2cd w = es.eigenvalues();
  const double scale = std::max(1.0, matrix_norm(gen.drift));
  const double max_re = w.real().maxCoeff();
  if (max_re < 0.0) return lyapunov_steady(gen).covariance().inverse();
  if (max_re > 1e-12 * scale) {
    throw StabilityError("unconditional_precision: drift has a growing mode");
  }
  const int zero = std::abs(w(0)) <= std::abs(w(1)) ? 0 : 1;
  const int other = 1 - zero;
  if (!(w(other).real() < -1e-12 * scale) || std::abs(w(zero)) > 1e-12 * scale) {
    throw StabilityError("unconditional_precision: only a single zero mode is supported");
  }
  // Null direction u of A and its unit complement n. V(t) grows along u;
  // V(t)^{-1} tends to n n^T / lim n^T V n, which is reached by doubling t.
  Vec2 u = es.eigenvectors().col(zero).real();
  u.normalize();
  const Vec2 n(-u(1), u(0));
  Mat2 f = expm(gen.drift);
  Mat2 wacc = lyapunov_propagate(gen, Mat2::Zero(), 1.0);
  const Mat2 v0 = 0.5 * Mat2::Identity();
  double prev = 0.0;
  for (int k = 0; k < 60; ++k) {
    const Mat2 v = f * v0 * f.transpose() + wacc;
    const double c = n.dot(v.inverse() * n);
    if (k > 0 && std::abs(c - prev) <= 1e-14 * std::abs(c)) return c * n * n.transpose();
    prev = c;
    wacc = symmetrize(wacc + f * wacc * f.transpose());
    f = (f * f).eval();
  }
  throw ConvergenceError("unconditional_precision: limit did not settle");
}

PrecisionFlow::PrecisionFlow(const GaussianGenerators& gen, const Mat2& precision0)
    : hamiltonian_(gen.hamiltonian()), precision_(symmetrize(precision0)) {
  const double norm = hamiltonian_.cwiseAbs().rowwise().sum().maxCoeff();
  max_step_ = 4.0 / std::max(norm, 1e-12);
}

void PrecisionFlow::step(double h) {
  if (h != cached_h_) {
    cached_ = expm((hamiltonian_ * h).eval());
    cached_h_ = h;
  }
  // [X; Y] = exp(H h) [P; 1], then P <- X Y^{-1} (so the next step starts at Y = 1).
  const Mat2 x = cached_.topLeftCorner<2, 2>() * precision_ + cached_.topRightCorner<2, 2>();
  const Mat2 y = cached_.bottomLeftCorner<2, 2>() * precision_ + cached_.bottomRightCorner<2, 2>();
  precision_ = symmetrize(x * y.inverse());
}

void PrecisionFlow::advance_to(double t) {
  if (t < t_) throw InvalidArgument("PrecisionFlow: time must be non-decreasing");
  const double span = t - t_;
  if (span == 0.0) return;
  const int n = std::max(1, static_cast<int>(std::ceil(span / max_step_)));
  const double h = span / n;
  for (int i = 0; i < n; ++i) step(h);
  t_ = t;
}

Mat2 mean_propagator(const GaussianGenerators& gen, double t) { return expm((gen.drift * t).eval()); }

Mat2 excess_noise(const GaussianGenerators& gen) {
  const Mat2 vss = lyapunov_steady(gen).covariance();
  const Mat2 vc = riccati_steady(gen).covariance();
  const Mat2 m = symmetrize(vss - vc);
  Eigen::SelfAdjointEigenSolver<Mat2> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, max_abs(vss))) {
    throw DecompositionError("excess noise V_ss - V_c is not PSD");
  }
  return m;
}

Mat2 displacement_covariance(const GaussianGenerators& gen, const Mat2& conditional, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("displacement_covariance: tau must be >= 0");
  const Mat2 corr = gen.correction(conditional);
  const Eigen::EigenSolver<Mat2> es(gen.drift, true);
  const Eigen::Vector2cd lam = es.eigenvalues();
  const Eigen::Matrix2cd p = es.eigenvectors();
  const Eigen::FullPivLU<Eigen::Matrix2cd> lu(p);
  const double scale = std::max(1.0, matrix_norm(gen.drift));
  if (!lu.isInvertible() || lu.rcond() < 1e-10) {
    throw DecompositionError("displacement_covariance: drift is not diagonalizable");
  }
  const Eigen::Matrix2cd pinv = lu.inverse();
  const Eigen::Matrix2cd ct = pinv * corr.cast<cplx>() * pinv.transpose();
  Eigen::Vector2cd factor;
  for (int i = 0; i < 2; ++i) {
    factor(i) = std::abs(lam(i)) <= 1e-12 * scale ? cplx(0.0) : 1.0 - std::exp(lam(i) * tau);
  }
  Eigen::Matrix2cd e = Eigen::Matrix2cd::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (factor(i) == cplx(0.0) || factor(j) == cplx(0.0)) continue;
      const cplx rate = lam(i) + lam(j);
      if (!(rate.real() < 0.0)) {
        throw DecompositionError("displacement_covariance: conditional means are not stationary");
      }
      e(i, j) = factor(i) * factor(j) * ct(i, j) / (-rate);
    }
  }
  const Mat2 s = symmetrize((p * e * p.transpose()).real());
  Eigen::SelfAdjointEigenSolver<Mat2> check(s, Eigen::EigenvaluesOnly);
  if (check.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, max_abs(s))) {
    throw DecompositionError("displacement covariance is not PSD");
  }
  return s;
}

std::vector<double> survival_curve(const GaussianGenerators& conditioned,
                                   const std::vector<double>& tau_grid) {
  const Mat2 vc = riccati_steady(conditioned).covariance();
  LyapunovStepper flow(conditioned, vc);
  std::vector<double> out;
  out.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    flow.advance_to(tau);
    const Mat2 sigma = vc + flow.covariance() + displacement_covariance(conditioned, vc, tau);
    out.push_back(1.0 / std::sqrt(sigma.determinant()));
  }
  return out;
}

std::vector<double> survival_curve(const QbmParams& params, const DiskPoint& u,
                                   const std::vector<double>& tau_grid) {
  return survival_curve(qbm_generators(params, u, 1.0), tau_grid);
}

std::vector<double> mixing_curve(const GaussianGenerators& conditioned,
                                 const std::vector<double>& tau_grid) {
  const Mat2 vc = riccati_steady(conditioned).covariance();
  LyapunovStepper flow(conditioned, vc);
  std::vector<double> out;
  out.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    flow.advance_to(tau);
    out.push_back(gaussian_purity(flow.covariance()));
  }
  return out;
}

}  // namespace unravel::gaussian
