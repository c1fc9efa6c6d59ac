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

#include "unravel/hilbert.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

#include "unravel/errors.hpp"

namespace unravel::hilbert {

namespace {

void require_square(const CMat& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << " must be a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

CMat hermitize(const CMat& m) { return 0.5 * (m + m.adjoint()); }

CMat rk4_step(const LindbladModel& model, const CMat& rho, double h) {
  const CMat k1 = lindblad_rhs(model, rho);
  const CMat k2 = lindblad_rhs(model, rho + 0.5 * h * k1);
  const CMat k3 = lindblad_rhs(model, rho + 0.5 * h * k2);
  const CMat k4 = lindblad_rhs(model, rho + h * k3);
  return hermitize(rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

int step_count(double duration, double dt) {
  if (duration < 0.0) throw InvalidArgument("propagate: duration must be >= 0");
  if (!(dt > 0.0)) throw InvalidArgument("propagate: dt must be > 0");
  return static_cast<int>(std::ceil(duration / dt - 1e-12));
}

DensityMatrix checked(const CMat& rho) {
  try {
    return DensityMatrix(rho);
  } catch (const InvariantError& e) {
    throw IntegrationError(std::string("propagation left the density-matrix set: ") + e.what());
  }
}


CMat reshape(const CVec& v, int dim) {
  return Eigen::Map<const CMat>(v.data(), dim, dim);
}

}  // namespace

void validate_density(const CMat& rho, const Tolerances& tol) {
  require_square(rho, "density matrix");
  std::ostringstream os;
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= tol.hermitian)) {
    os << "density matrix not Hermitian: max|rho - rho^dag| = " << herm;
    throw InvariantError(os.str());
  }
  const cplx tr = rho.trace();
  if (!(std::abs(tr - 1.0) <= tol.trace)) {
    os << "density matrix trace = " << tr.real() << "+" << tr.imag() << "i";
    throw InvariantError(os.str());
  }
  if (rho.rows() == 2) {
    // Closed form for qubits: eigenvalues (1 +- |r|)/2.
    const BlochVector b = to_bloch(rho);
    if (!(b.norm() <= 1.0 + 2.0 * tol.eigenvalue)) {
      os << "qubit state outside the Bloch ball, |r| = " << b.norm();
      throw InvariantError(os.str());
    }
    return;
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(rho), Eigen::EigenvaluesOnly);
  const double lowest = es.eigenvalues().minCoeff();
  if (!(lowest >= -tol.eigenvalue)) {
    os << "density matrix not PSD, lowest eigenvalue = " << lowest;
    throw InvariantError(os.str());
  }
}

DensityMatrix::DensityMatrix(CMat elements, const Tolerances& tol) : rho_(std::move(elements)) {
  validate_density(rho_, tol);
}

DensityMatrix DensityMatrix::pure(const CVec& psi) {
  const double n = psi.norm();
  if (!(n > 0.0)) throw InvalidArgument("pure state vector must be non-zero");
  const CVec u = psi / n;
  return DensityMatrix(u * u.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim <= 0) throw DimensionError("dimension must be positive");
  return DensityMatrix(CMat::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::basis_state(int dim, int k) {
  if (dim <= 0 || k < 0 || k >= dim) throw DimensionError("basis index out of range");
  CMat m = CMat::Zero(dim, dim);
  m(k, k) = 1.0;
  return DensityMatrix(std::move(m));
}

double purity(const CMat& rho) {
  // Tr[rho^2] = sum_ij |rho_ij|^2 for Hermitian rho.
  return rho.squaredNorm();
}

double purity(const DensityMatrix& rho) { return purity(rho.matrix()); }

double overlap(const CMat& rho1, const CMat& rho2) {
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols()) {
    throw DimensionError("overlap: dimension mismatch");
  }
  // Tr[A B] = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
  return (rho1.array() * rho2.conjugate().array()).sum().real();
}

double overlap(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  return overlap(rho1.matrix(), rho2.matrix());
}

double trace_distance(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("trace_distance: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a - b), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

BlochVector to_bloch(const CMat& rho) {
  if (rho.rows() != 2 || rho.cols() != 2) throw DimensionError("Bloch vector needs dim 2");
  // rho_01 = (x - i y)/2, rho_00 - rho_11 = z.
  return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

BlochVector to_bloch(const DensityMatrix& rho) { return to_bloch(rho.matrix()); }

DensityMatrix from_bloch(const BlochVector& r) {
  CMat m(2, 2);
  m(0, 0) = 0.5 * (1.0 + r.z);
  m(1, 1) = 0.5 * (1.0 - r.z);
  m(0, 1) = 0.5 * cplx(r.x, -r.y);
  m(1, 0) = 0.5 * cplx(r.x, r.y);
  return DensityMatrix(std::move(m));
}

LindbladModel::LindbladModel(CMat hamiltonian, std::vector<CMat> jump_operators)
    : hamiltonian_(std::move(hamiltonian)), jumps_(std::move(jump_operators)) {
  require_square(hamiltonian_, "Hamiltonian");
  const double herm = (hamiltonian_ - hamiltonian_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10) throw InvalidArgument("Hamiltonian is not Hermitian");
  effective_ = hamiltonian_;
  for (const CMat& l : jumps_) {
    if (l.rows() != hamiltonian_.rows() || l.cols() != hamiltonian_.cols()) {
      throw DimensionError("jump operator dimension differs from the Hamiltonian");
    }
    effective_ -= 0.5 * kI * (l.adjoint() * l);
  }
}

CMat lindblad_rhs(const LindbladModel& model, const CMat& rho) {
  if (rho.rows() != model.dim() || rho.cols() != model.dim()) {
    throw DimensionError("lindblad_rhs: state dimension differs from the model");
  }
  const CMat& k = model.effective_hamiltonian();
  CMat out = -kI * (k * rho);
  out += kI * (rho * k.adjoint());
  for (const CMat& l : model.jump_operators()) out += l * rho * l.adjoint();
  return out;
}

CMat lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho) {
  return lindblad_rhs(model, rho.matrix());
}

CMat generator_matrix(const LindbladModel& model) {
  const int d = model.dim();
  const CMat id = CMat::Identity(d, d);
  const CMat& k = model.effective_hamiltonian();
  CMat g = Eigen::kroneckerProduct(id, (-kI * k).eval()).eval();
  g += Eigen::kroneckerProduct((kI * k.conjugate()).eval(), id).eval();
  for (const CMat& l : model.jump_operators()) {
    g += Eigen::kroneckerProduct(l.conjugate(), l).eval();
  }
  return g;
}

DensityMatrix propagate(const LindbladModel& model, const DensityMatrix& rho0, double duration,
                        double dt) {
  const int n = step_count(duration, dt);
  if (rho0.dim() != model.dim()) throw DimensionError("propagate: dimension mismatch");
  if (n == 0) return rho0;
  const double h = duration / n;
  CMat rho = rho0.matrix();
  for (int i = 0; i < n; ++i) rho = rk4_step(model, rho, h);
  return checked(rho);
}

std::vector<DensityMatrix> propagate_grid(const LindbladModel& model, const DensityMatrix& rho0,
                                          double duration, double dt, int stride) {
  if (stride < 1) throw InvalidArgument("propagate_grid: stride must be >= 1");
  const int n = step_count(duration, dt);
  if (rho0.dim() != model.dim()) throw DimensionError("propagate_grid: dimension mismatch");
  std::vector<DensityMatrix> out{rho0};
  const double h = n > 0 ? duration / n : dt;
  CMat rho = rho0.matrix();
  for (int i = 1; i <= n; ++i) {
    rho = rk4_step(model, rho, h);
    if (i % stride == 0) out.push_back(checked(rho));
  }
  return out;
}

CMat propagator(const LindbladModel& model, double duration, double dt) {
  const int n = step_count(duration, dt);
  const int d = model.dim();
  const CMat g = generator_matrix(model);
  const int dd = d * d;
  if (n == 0) return CMat::Identity(dd, dd);
  const double h = duration / n;
  // One RK4 step of a linear ODE is the degree-4 Taylor polynomial of exp(h G).
  const CMat hg = h * g;
  CMat step = CMat::Identity(dd, dd);
  CMat term = CMat::Identity(dd, dd);
  for (int k = 1; k <= 4; ++k) {
    term = (term * hg / static_cast<double>(k)).eval();
    step += term;
  }
  CMat out = CMat::Identity(dd, dd);
  // Binary powering keeps the cost logarithmic in the step count.
  CMat base = step;
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) out = (out * base).eval();
    if (e > 1) base = (base * base).eval();
  }
  return out;
}

namespace {

constexpr double kSteadyResidual = 1e-9;

DensityMatrix normalize_null_vector(const CVec& v, int d) {
  CMat rho = reshape(v, d);
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-300) throw DegeneracyError("steady state: null vector is traceless");
  rho /= tr;
  return DensityMatrix(hermitize(rho), Tolerances{1e-8, 1e-9, 1e-8});
}

bool residual_ok(const LindbladModel& model, const CMat& rho) {
  return lindblad_rhs(model, rho).cwiseAbs().maxCoeff() <= kSteadyResidual;
}

DensityMatrix steady_state_by_propagation(const LindbladModel& model) {
  DensityMatrix rho = DensityMatrix::maximally_mixed(model.dim());
  const double scale = std::max(1.0, model.effective_hamiltonian().cwiseAbs().maxCoeff());
  const double dt = 0.05 / scale;
  for (int block = 0; block < 400; ++block) {
    rho = propagate(model, rho, 5.0 / scale, dt);
    if (residual_ok(model, rho.matrix())) return rho;
  }
  throw ConvergenceError("steady state: long-time propagation did not converge");
}

}  // namespace

DensityMatrix steady_state(const LindbladModel& model) {
  const int d = model.dim();
  if (d <= 20) {
    const CMat g = generator_matrix(model);
    Eigen::FullPivLU<CMat> lu(g);
    lu.setThreshold(1e-10);
    const CMat kernel = lu.kernel();
    if (lu.dimensionOfKernel() > 1) {
      std::ostringstream os;
      os << "steady state is not unique (null space dimension " << lu.dimensionOfKernel() << ")";
      throw DegeneracyError(os.str());
    }
    if (lu.dimensionOfKernel() == 1) {
      DensityMatrix rho = normalize_null_vector(kernel.col(0), d);
      if (residual_ok(model, rho.matrix())) return rho;
    }
    return steady_state_by_propagation(model);
  }

  // Large dimension: sparse LU with one row replaced by the trace condition.
  using Sparse = Eigen::SparseMatrix<cplx>;
  const int dd = d * d;
  Sparse id(d, d);
  id.setIdentity();
  const CMat& k = model.effective_hamiltonian();
  Sparse g = Eigen::kroneckerProduct(id, Sparse((-kI * k).sparseView()));
  g += Sparse(Eigen::kroneckerProduct(Sparse((kI * k.conjugate()).sparseView()), id));
  for (const CMat& l : model.jump_operators()) {
    g += Sparse(Eigen::kroneckerProduct(Sparse(l.conjugate().sparseView()), Sparse(l.sparseView())));
  }
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int j = 0; j < g.outerSize(); ++j) {
    for (Sparse::InnerIterator it(g, j); it; ++it) {
      if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int i = 0; i < d; ++i) trip.emplace_back(0, i * d + i, cplx(1.0));
  Sparse a(dd, dd);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Sparse> solver;
  solver.compute(a);
  if (solver.info() != Eigen::Success) {
    throw DegeneracyError("steady state: generator with trace constraint is singular");
  }
  CVec rhs = CVec::Zero(dd);
  rhs(0) = 1.0;
  const CVec v = solver.solve(rhs);
  DensityMatrix rho = normalize_null_vector(v, d);
  if (residual_ok(model, rho.matrix())) return rho;
  return steady_state_by_propagation(model);
}

}  // namespace unravel::hilbert
