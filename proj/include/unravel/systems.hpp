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

#include <string>
#include <variant>
#include <vector>

#include "unravel/gaussian.hpp"
#include "unravel/hilbert.hpp"
#include "unravel/trajectories.hpp"

namespace unravel::systems {

/// Resonantly driven two-level atom, H = (Omega/2) sigma_x, L = sqrt(gamma)
/// sigma_-, in the basis {|e>, |g>}.
struct TlaParams {
  double rabi = 1.0;
  double gamma = 1.0;
};

void validate(const TlaParams& params);

CMat sigma_minus();
CMat sigma_x();
CMat sigma_y();
CMat sigma_z();

hilbert::LindbladModel build_tla(const TlaParams& params);

/// LO amplitude used for AID when none is given: sqrt(gamma)/2. With this
/// real amplitude the conditioned state alternates between two fixed states.
cplx default_aid_amplitude(const TlaParams& params);

/// The five atom unravellings at efficiency eta, in the order direct, hom-x,
/// hom-y, het, aid.
std::vector<trajectories::UnravellingSpec> tla_unravellings(const TlaParams& params,
                                                            double eta = 1.0);

/// Fock-space model of the Brownian particle, used as an oracle for the
/// phase-space backend.
struct QbmOracle {
  hilbert::FockWorkspace fock;
  hilbert::LindbladModel model;
  /// c = sqrt(2T) q + i p / sqrt(8T).
  CMat lindblad_operator;
};

/// H = p^2/2 + (qp+pq)/4, L = c. Throws TruncationError when the top five
/// levels of `reference` (by default the state reached from the vacuum after
/// unit time of unconditional evolution) carry more than 1e-6 population.
QbmOracle build_qbm_oracle(const gaussian::QbmParams& params, int truncation = 60);
QbmOracle build_qbm_oracle(const gaussian::QbmParams& params, int truncation,
                           const gaussian::CovarianceState& reference);

/// Fock representation of a single-mode Gaussian state: displaced, squeezed
/// thermal state built in a padded space and projected to `truncation`
/// levels.
CMat gaussian_to_fock(const gaussian::CovarianceState& v, int truncation);

/// Means and covariance of a Fock-basis state.
gaussian::CovarianceState fock_moments(const hilbert::FockWorkspace& fock, const CMat& rho);

/// The quadrature read out by homodyne detection at u = e^{i phi}:
/// x = c e^{i phi/2} + c^dag e^{-i phi/2} = q_coeff q + p_coeff p.
struct Quadrature {
  double q_coeff = 0.0;
  double p_coeff = 0.0;
};

/// Throws InvalidArgument for r < 1, where the record is not a single
/// quadrature.
Quadrature measured_quadrature(const gaussian::QbmParams& params, const gaussian::DiskPoint& u);

/// Either system together with the unravellings it admits.
struct SystemSpec {
  std::variant<gaussian::QbmParams, TlaParams> params;

  static SystemSpec qbm(double temperature);
  static SystemSpec tla(double rabi, double gamma = 1.0);

  bool is_qbm() const { return std::holds_alternative<gaussian::QbmParams>(params); }
  std::vector<trajectories::Scheme> allowed_schemes() const;
  std::string describe() const;
};

}  // namespace unravel::systems
