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

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>

namespace unravel {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;
using Mat4 = Eigen::Matrix4d;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

/// Matrix exponential (Eigen's scaling and squaring Pade implementation).
template <typename Derived>
typename Derived::PlainObject expm(const Eigen::MatrixBase<Derived>& a) {
  using Plain = typename Derived::PlainObject;
  return Plain(Plain(a).exp());
}

inline double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

inline Mat2 symmetrize(const Mat2& m) { return 0.5 * (m + m.transpose()); }

/// Solves A X + X A^T + B = 0 for symmetric X (B symmetric) by reducing to
/// the 3x3 linear system on (X_00, X_01, X_11). Returns false when singular.
inline bool solve_lyapunov2(const Mat2& a, const Mat2& b, Mat2& x) {
  Eigen::Matrix3d lhs;
  lhs << 2 * a(0, 0), 2 * a(0, 1), 0.0,
         a(1, 0), a(0, 0) + a(1, 1), a(0, 1),
         0.0, 2 * a(1, 0), 2 * a(1, 1);
  const Eigen::Vector3d rhs(-b(0, 0), -b(0, 1), -b(1, 1));
  Eigen::FullPivLU<Eigen::Matrix3d> lu(lhs);
  if (!lu.isInvertible()) return false;
  const Eigen::Vector3d sol = lu.solve(rhs);
  x << sol(0), sol(1), sol(1), sol(2);
  return true;
}

}  // namespace unravel
