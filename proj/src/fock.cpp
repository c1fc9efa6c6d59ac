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

#include <cmath>

#include "unravel/errors.hpp"
#include "unravel/hilbert.hpp"

namespace unravel::hilbert {

namespace {

CMat ladder(int n) {
  CMat a = CMat::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

}  // namespace

FockWorkspace::FockWorkspace(int truncation) : n_(truncation) {
  if (truncation < 3) throw InvalidArgument("Fock truncation must be at least 3");
  const double s = 1.0 / std::sqrt(2.0);
  a_ = ladder(n_);
  q_ = s * (a_ + a_.adjoint());
  p_ = -kI * s * (a_ - a_.adjoint());
  const CMat big = ladder(n_ + 2);
  q_pad_ = s * (big + big.adjoint());
  p_pad_ = -kI * s * (big - big.adjoint());
}

CMat FockWorkspace::position_squared() const { return (q_pad_ * q_pad_).topLeftCorner(n_, n_); }

CMat FockWorkspace::momentum_squared() const { return (p_pad_ * p_pad_).topLeftCorner(n_, n_); }

CMat FockWorkspace::symmetrized_qp() const {
  return (0.5 * (q_pad_ * p_pad_ + p_pad_ * q_pad_)).topLeftCorner(n_, n_);
}

double FockWorkspace::commutator_defect() const {
  const int m = n_ - 2;
  const CMat c = (q_ * p_ - p_ * q_).topLeftCorner(m, m);
  return (c - kI * CMat::Identity(m, m)).cwiseAbs().maxCoeff();
}

double FockWorkspace::tail_mass(const CMat& rho, int levels) const {
  if (rho.rows() != n_) throw DimensionError("tail_mass: state dimension differs from truncation");
  double mass = 0.0;
  for (int k = std::max(0, n_ - levels); k < n_; ++k) mass += rho(k, k).real();
  return mass;
}

}  // namespace unravel::hilbert
