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

#include "unravel/systems.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

#include "unravel/errors.hpp"

namespace unravel::systems {

void validate(const TlaParams& params) {
  if (!(params.gamma > 0.0) || !std::isfinite(params.gamma)) {
    throw InvalidArgument("TLA decay rate gamma must be > 0");
  }
  if (!(params.rabi >= 0.0) || !std::isfinite(params.rabi)) {
    throw InvalidArgument("TLA Rabi frequency must be >= 0");
  }
}

CMat sigma_minus() {
  CMat s = CMat::Zero(2, 2);
  s(1, 0) = 1.0;  // |g><e|
  return s;
}

CMat sigma_x() {
  CMat s(2, 2);
  s << 0.0, 1.0, 1.0, 0.0;
  return s;
}

CMat sigma_y() {
  CMat s(2, 2);
  s << 0.0, -kI, kI, 0.0;
  return s;
}

CMat sigma_z() {
  CMat s(2, 2);
  s << 1.0, 0.0, 0.0, -1.0;
  return s;
}

hilbert::LindbladModel build_tla(const TlaParams& params) {
  validate(params);
  return hilbert::LindbladModel(0.5 * params.rabi * sigma_x(),
                                {std::sqrt(params.gamma) * sigma_minus()});
}

cplx default_aid_amplitude(const TlaParams& params) {
  validate(params);
  return 0.5 * std::sqrt(params.gamma);
}

std::vector<trajectories::UnravellingSpec> tla_unravellings(const TlaParams& params, double eta) {
  using trajectories::UnravellingSpec;
  return {UnravellingSpec::direct(eta), UnravellingSpec::homodyne_x(eta),
          UnravellingSpec::homodyne_y(eta), UnravellingSpec::heterodyne(eta),
          UnravellingSpec::aid(default_aid_amplitude(params), eta)};
}

namespace {

CMat padded_ladder(int n) {
  CMat a = CMat::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

gaussian::CovarianceState unit_time_reference(const gaussian::QbmParams& params) {
  const auto gen = gaussian::qbm_generators(params, {1.0, 0.0}, 0.0);
  return gaussian::CovarianceState::from(
      gaussian::lyapunov_propagate(gen, 0.5 * Mat2::Identity(), 1.0));
}

}  // namespace

CMat gaussian_to_fock(const gaussian::CovarianceState& v, int truncation) {
  gaussian::validate(v);
  if (truncation < 3) throw InvalidArgument("Fock truncation must be at least 3");
  const Mat2 cov = v.covariance();
  const double nu = std::sqrt(cov.determinant());
  const int pad = truncation + 40;

  const CMat a = padded_ladder(pad);
  const double s = 1.0 / std::sqrt(2.0);
  const CMat q = s * (a + a.adjoint());
  const CMat p = -kI * s * (a - a.adjoint());

  // Thermal state with <n> = nu - 1/2.
  const double nbar = nu - 0.5;
  CMat rho = CMat::Zero(pad, pad);
  if (nbar <= 1e-14) {
    rho(0, 0) = 1.0;
  } else {
    const double ratio = nbar / (1.0 + nbar);
    for (int k = 0; k < pad; ++k) rho(k, k) = std::pow(ratio, k) / (1.0 + nbar);
  }

  // Symplectic S = sqrt(V / nu) = exp(X), realized by U = exp(-i x^T h x / 2)
  // with h = -Omega X, Omega = [[0, 1], [-1, 0]].
  Eigen::SelfAdjointEigenSolver<Mat2> es(cov / nu);
  const Mat2 x = es.eigenvectors() * es.eigenvalues().array().log().matrix().asDiagonal() *
                 es.eigenvectors().transpose() * 0.5;
  Mat2 omega;
  omega << 0.0, 1.0, -1.0, 0.0;
  const Mat2 h = -omega * x;
  const CMat gen = 0.5 * (h(0, 0) * q * q + h(0, 1) * (q * p + p * q) + h(1, 1) * p * p);
  const CMat squeeze = expm((-kI * gen).eval());
  rho = squeeze * rho * squeeze.adjoint();

  const CMat disp = expm((-kI * (v.mean_q * p - v.mean_p * q)).eval());
  rho = disp * rho * disp.adjoint();

  CMat out = rho.topLeftCorner(truncation, truncation);
  out = 0.5 * (out + out.adjoint()).eval();
  out /= out.trace().real();
  return out;
}

gaussian::CovarianceState fock_moments(const hilbert::FockWorkspace& fock, const CMat& rho) {
  if (rho.rows() != fock.truncation()) throw DimensionError("fock_moments: dimension mismatch");
  auto expect = [&](const CMat& o) { return (o * rho).trace().real(); };
  const double mq = expect(fock.position());
  const double mp = expect(fock.momentum());
  gaussian::CovarianceState out;
  out.mean_q = mq;
  out.mean_p = mp;
  out.var_q = expect(fock.position_squared()) - mq * mq;
  out.var_p = expect(fock.momentum_squared()) - mp * mp;
  out.cov_qp = expect(fock.symmetrized_qp()) - mq * mp;
  return out;
}

QbmOracle build_qbm_oracle(const gaussian::QbmParams& params, int truncation) {
  gaussian::validate(params);
  return build_qbm_oracle(params, truncation, unit_time_reference(params));
}

QbmOracle build_qbm_oracle(const gaussian::QbmParams& params, int truncation,
                           const gaussian::CovarianceState& reference) {
  gaussian::validate(params);
  hilbert::FockWorkspace fock(truncation);
  const double t = params.temperature;
  const CMat c = std::sqrt(2.0 * t) * fock.position() + kI * fock.momentum() / std::sqrt(8.0 * t);
  const CMat h = 0.5 * fock.momentum_squared() + 0.5 * fock.symmetrized_qp();

  const CMat ref = gaussian_to_fock(reference, truncation + 40);
  double tail = 0.0;
  for (int k = std::max(0, truncation - 5); k < truncation; ++k) tail += ref(k, k).real();
  for (int k = truncation; k < ref.rows(); ++k) tail += ref(k, k).real();
  if (tail > 1e-6) {
    std::ostringstream os;
    os << "Fock truncation N=" << truncation << " too small at T=" << t
       << ": reference state holds " << tail << " in the top levels";
    throw TruncationError(os.str());
  }
  return QbmOracle{std::move(fock), hilbert::LindbladModel(h, {c}), c};
}

Quadrature measured_quadrature(const gaussian::QbmParams& params, const gaussian::DiskPoint& u) {
  gaussian::validate(params);
  const auto w = gaussian::make_disk_point(u.r, u.phi);
  if (std::abs(w.r - 1.0) > 1e-12) {
    throw InvalidArgument("the record is a single quadrature only for homodyne detection (r = 1)");
  }
  const double a = std::sqrt(2.0 * params.temperature);
  const double b = 1.0 / std::sqrt(8.0 * params.temperature);
  return {2.0 * a * std::cos(0.5 * w.phi), -2.0 * b * std::sin(0.5 * w.phi)};
}

SystemSpec SystemSpec::qbm(double temperature) {
  gaussian::QbmParams p{temperature};
  gaussian::validate(p);
  return {p};
}

SystemSpec SystemSpec::tla(double rabi, double gamma) {
  TlaParams p{rabi, gamma};
  validate(p);
  return {p};
}

std::vector<trajectories::Scheme> SystemSpec::allowed_schemes() const {
  using trajectories::Scheme;
  if (is_qbm()) return {Scheme::HomodyneX, Scheme::HomodyneY, Scheme::Heterodyne, Scheme::GeneralDyne};
  return {Scheme::Direct, Scheme::HomodyneX, Scheme::HomodyneY, Scheme::Heterodyne, Scheme::AID};
}

std::string SystemSpec::describe() const {
  std::ostringstream os;
  if (is_qbm()) {
    os << "qbm(T=" << std::get<gaussian::QbmParams>(params).temperature << ")";
  } else {
    const auto& p = std::get<TlaParams>(params);
    os << "tla(omega=" << p.rabi << ",gamma=" << p.gamma << ")";
  }
  return os.str();
}

}  // namespace unravel::systems
