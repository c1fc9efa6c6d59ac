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

// Inner loops of the trajectory steppers, shared by trajectories.cpp and
// ensemble.cpp. Two backends: fixed 2x2 matrices for the atom and a CSR
// operator set on a shared sparsity pattern for Fock-space models whose
// operators are banded.

#include <Eigen/Sparse>

#include <cmath>
#include <numbers>
#include <sstream>
#include <type_traits>
#include <vector>

#include "unravel/errors.hpp"
#include "unravel/random.hpp"
#include "unravel/trajectories.hpp"

namespace unravel::trajectories::detail {

struct SmallBackend {
  using State = Eigen::Matrix2cd;
  using Op = Eigen::Matrix2cd;

  class OpSet {
   public:
    explicit OpSet(const std::vector<CMat>& ops) {
      ops_.reserve(ops.size());
      for (const auto& o : ops) ops_.emplace_back(o);
    }
    Op combine(const std::vector<std::pair<int, cplx>>& terms) const {
      Op m = Op::Zero();
      for (const auto& [k, c] : terms) m += c * ops_[k];
      return m;
    }
    cplx trace_product(int k, const State& rho) const { return (ops_[k] * rho).trace(); }
    const Op& op(int k) const { return ops_[k]; }

   private:
    std::vector<Op> ops_;
  };

  static State from(const CMat& m) { return m; }
  static CMat to(const State& s) { return s; }
  static State mul(const Op& m, const State& x) { return m * x; }
  /// m rho m^dag for Hermitian rho.
  static State sandwich(const Op& m, const State& rho) { return m * rho * m.adjoint(); }
};

struct SparseBackend {
  // Row-major so that banded-times-dense products stream over contiguous rows.
  using State = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Op = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

  class OpSet {
   public:
    explicit OpSet(const std::vector<CMat>& ops) {
      const Eigen::Index n = ops.front().rows();
      std::vector<Eigen::Triplet<cplx>> pattern;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          bool any = i == j;
          for (const auto& o : ops) any = any || o(i, j) != cplx(0.0);
          if (any) pattern.emplace_back(i, j, cplx(1.0));
        }
      }
      shape_.resize(n, n);
      shape_.setFromTriplets(pattern.begin(), pattern.end());
      shape_.makeCompressed();
      values_.resize(ops.size());
      for (std::size_t k = 0; k < ops.size(); ++k) {
        auto& v = values_[k];
        v.resize(shape_.nonZeros());
        for (Eigen::Index r = 0, idx = 0; r < n; ++r) {
          for (Op::InnerIterator it(shape_, r); it; ++it, ++idx) v[idx] = ops[k](r, it.col());
        }
        ops_.push_back(shape_);
        std::copy(v.begin(), v.end(), ops_.back().valuePtr());
      }
    }
    Op combine(const std::vector<std::pair<int, cplx>>& terms) const {
      Op m = shape_;
      cplx* out = m.valuePtr();
      const Eigen::Index nnz = m.nonZeros();
      std::fill(out, out + nnz, cplx(0.0));
      for (const auto& [k, c] : terms) {
        const cplx* v = values_[k].data();
        for (Eigen::Index i = 0; i < nnz; ++i) out[i] += c * v[i];
      }
      return m;
    }
    cplx trace_product(int k, const State& rho) const {
      cplx acc = 0.0;
      const auto& v = values_[k];
      Eigen::Index idx = 0;
      for (Eigen::Index r = 0; r < shape_.outerSize(); ++r) {
        for (Op::InnerIterator it(shape_, r); it; ++it, ++idx) acc += v[idx] * rho(it.col(), r);
      }
      return acc;
    }
    const Op& op(int k) const { return ops_[k]; }

   private:
    Op shape_;
    std::vector<std::vector<cplx>> values_;
    std::vector<Op> ops_;
  };

  static State from(const CMat& m) { return m; }
  static CMat to(const State& s) { return s; }
  static State mul(const Op& m, const State& x) { return m * x; }
  static State sandwich(const Op& m, const State& rho) {
    const State y = m * rho;
    const State yt = y.adjoint();
    return m * yt;
  }
};

template <class State>
double purity_of(const State& rho) {
  return rho.cwiseAbs2().sum();
}

template <class State>
double overlap_of(const State& a, const State& b) {
  // Tr[a b] = sum_ij a_ij conj(b_ij) for Hermitian b.
  return (a.array() * b.array().conjugate()).sum().real();
}

template <class State>
void hermitize_normalize(State& rho, const char* where) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const double tr = rho.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    std::ostringstream os;
    os << where << ": state lost its trace (" << tr << "); reduce dt";
    throw StepSizeError(os.str());
  }
  rho /= tr;
}

/// Noise shaping for dW with dW dW* = dt, dW^2 = upsilon dt.
struct DyneNoise {
  cplx along;
  cplx across;

  explicit DyneNoise(cplx upsilon) {
    const double r = std::abs(upsilon);
    const double phi = r > 0.0 ? std::arg(upsilon) : 0.0;
    const cplx rot = std::polar(1.0, 0.5 * phi);
    along = rot * std::sqrt(0.5 * (1.0 + r));
    across = rot * cplx(0.0, std::sqrt(0.5 * (1.0 - r)));
  }
  cplx draw(random::Philox4x32& rng, double sqrt_dt) const {
    const auto z = rng.normal_pair();
    return sqrt_dt * (along * z[0] + across * z[1]);
  }
};

/// Per-trajectory stepping machinery for one (model, spec, dt).
template <class B>
class Engine {
 public:
  using State = typename B::State;
  using Op = typename B::Op;

  Engine(const LindbladModel& model, const UnravellingSpec& spec, double dt)
      : spec_(spec), dt_(dt), channels_(static_cast<int>(model.jump_operators().size())),
        ops_(build_ops(model, spec, dt, std::is_same_v<B, SmallBackend>)),
        noise_(spec.diffusive() ? spec.upsilon() : cplx(0.0)) {}

  bool diffusive() const { return spec_.diffusive(); }
  int channels() const { return channels_; }
  double dt() const { return dt_; }

  /// Diffusive step with given innovations (length = channels).
  void diffusive_step(State& rho, const cplx* dw) {
    const double se = std::sqrt(spec_.eta);
    const cplx ups = spec_.upsilon();
    terms_.assign(1, {e_index(0), 1.0});
    for (int k = 0; k < channels_; ++k) {
      const cplx e = ops_.trace_product(j_index(0, k), rho);
      const cplx dz = dw[k] + se * (std::conj(e) + ups * e) * dt_;
      terms_.emplace_back(j_index(0, k), se * dz);
    }
    const Op m = ops_.combine(terms_);
    State next = B::sandwich(m, rho);
    if (spec_.eta < 1.0) add_unobserved(next, rho, 0, (1.0 - spec_.eta) * dt_);
    rho = std::move(next);
    hermitize_normalize(rho, "diffusive step");
  }

  /// Counting step; returns the detected channel or -1.
  int jump_step(State& rho, double u, int sign) const {
    const int s = sign > 0 ? 0 : 1;
    double cumulative = 0.0;
    for (int k = 0; k < channels_; ++k) {
      const double pk = spec_.eta * dt_ * ops_.trace_product(jdj_index(s, k), rho).real();
      cumulative += std::max(0.0, pk);
      if (cumulative > 0.1) {
        std::ostringstream os;
        os << "jump step: detection probability " << cumulative << " per step exceeds 0.1; reduce dt";
        throw StepSizeError(os.str());
      }
    }
    double acc = 0.0;
    for (int k = 0; k < channels_; ++k) {
      acc += std::max(0.0, spec_.eta * dt_ * ops_.trace_product(jdj_index(s, k), rho).real());
      if (u < acc) {
        rho = B::sandwich(ops_.op(j_index(s, k)), rho);
        hermitize_normalize(rho, "jump step");
        return k;
      }
    }
    State next = B::sandwich(ops_.op(e_index(s)), rho);
    if (spec_.eta < 1.0) add_unobserved(next, rho, s, (1.0 - spec_.eta) * dt_);
    rho = std::move(next);
    hermitize_normalize(rho, "jump step");
    return -1;
  }

  /// Draws this step's randomness (fixed count for every eta) and advances.
  /// Returns the detected channel for counting kinds.
  int step(State& rho, random::Philox4x32& rng, int sign, cplx* dw_out) {
    if (diffusive()) {
      const double sdt = std::sqrt(dt_);
      dw_.resize(channels_);
      for (int k = 0; k < channels_; ++k) dw_[k] = noise_.draw(rng, sdt);
      if (dw_out != nullptr) std::copy(dw_.begin(), dw_.end(), dw_out);
      diffusive_step(rho, dw_.data());
      return -1;
    }
    return jump_step(rho, rng.uniform(), sign);
  }

  /// Unconditional RK4 step of the original model's generator.
  void lindblad_step(State& rho, double h) const {
    auto rhs = [&](const State& x) {
      const State kx = B::mul(ops_.op(kUnconditional), x);
      State out = kx + kx.adjoint();
      for (int k = 0; k < channels_; ++k) out += B::sandwich(ops_.op(l_index(k)), x);
      return out;
    };
    const State k1 = rhs(rho);
    const State k2 = rhs(rho + 0.5 * h * k1);
    const State k3 = rhs(rho + 0.5 * h * k2);
    const State k4 = rhs(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint()).eval();
  }

 private:
  static constexpr int kUnconditional = 0;
  int e_index(int s) const { return 1 + s; }
  int j_index(int s, int k) const { return 3 + s * channels_ + k; }
  int jdj_index(int s, int k) const { return 3 + 2 * channels_ + s * channels_ + k; }
  int l_index(int k) const { return 3 + 4 * channels_ + k; }

  void add_unobserved(State& next, const State& rho, int s, double weight) const {
    for (int k = 0; k < channels_; ++k) {
      next += weight * B::sandwich(ops_.op(j_index(s, k)), rho);
    }
  }

  // [K0, E+, E-, J+..., J-..., J+^dag J+..., J-^dag J-..., L...] where K0 is
  // the unconditional -i H_eff and E = exp(K dt) is the no-jump propagator
  // of the detection scheme for each LO sign: exact for small dimensions,
  // second-order Taylor (keeping the band structure) otherwise. An exact
  // unitary part matters at strong driving, where 1 - i H dt would add a
  // spurious dephasing at rate ~ |H|^2 dt.
  static typename B::OpSet build_ops(const LindbladModel& model, const UnravellingSpec& spec,
                                     double dt, bool exact) {
    const int d = model.dim();
    const auto& ls = model.jump_operators();
    const int m = static_cast<int>(ls.size());
    if (m == 0) throw InvalidArgument("unravelling needs at least one jump operator");
    if (spec.kind == Scheme::AID && m != 1) {
      throw InvalidArgument("AID is defined for a single output channel");
    }
    const CMat id = CMat::Identity(d, d);
    std::vector<CMat> k(2), j(2 * m), jdj(2 * m);
    for (int s = 0; s < 2; ++s) {
      const double sign = s == 0 ? 1.0 : -1.0;
      const cplx beta = spec.kind == Scheme::AID ? sign * spec.lo_amplitude : cplx(0.0);
      CMat h = model.hamiltonian();
      CMat decay = CMat::Zero(d, d);
      for (int c = 0; c < m; ++c) {
        const CMat jc = ls[c] + beta * id;
        if (beta != cplx(0.0)) {
          h += cplx(0.0, -0.5) * (std::conj(beta) * ls[c] - beta * ls[c].adjoint());
        }
        j[s * m + c] = jc;
        jdj[s * m + c] = jc.adjoint() * jc;
        decay += jdj[s * m + c];
      }
      k[s] = -kI * h - 0.5 * decay;
    }
    std::vector<CMat> all{-kI * model.effective_hamiltonian()};
    for (int s = 0; s < 2; ++s) {
      const CMat kd = k[s] * dt;
      all.push_back(exact ? CMat(expm(kd)) : CMat(id + kd + 0.5 * kd * kd));
    }
    all.insert(all.end(), j.begin(), j.end());
    all.insert(all.end(), jdj.begin(), jdj.end());
    all.insert(all.end(), ls.begin(), ls.end());
    return typename B::OpSet(all);
  }

  UnravellingSpec spec_;
  double dt_;
  int channels_;
  typename B::OpSet ops_;
  DyneNoise noise_;
  std::vector<cplx> dw_;
  std::vector<std::pair<int, cplx>> terms_;
};

/// Calls f.template operator()<Backend>() with the backend suited to `dim`.
template <class F>
decltype(auto) dispatch(int dim, F&& f) {
  if (dim == 2) return f.template operator()<SmallBackend>();
  return f.template operator()<SparseBackend>();
}

}  // namespace unravel::trajectories::detail
