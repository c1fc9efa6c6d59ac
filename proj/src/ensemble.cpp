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
#include <fstream>
#include <iomanip>
#include <sstream>

#include "engine.hpp"
#include "unravel/parallel.hpp"
#include "unravel/errors.hpp"
#include "unravel/trajectories.hpp"

namespace unravel::trajectories {

namespace {

constexpr long kChunk = 32;

using unravel::detail::Moments;

long step_count(const TrajectoryConfig& config) {
  return static_cast<long>(std::ceil(config.horizon / config.dt - 1e-12));
}

std::vector<long> sample_steps(long steps, int stride) {
  std::vector<long> out{0};
  for (long i = stride; i <= steps; i += stride) out.push_back(i);
  if (out.back() != steps) out.push_back(steps);
  return out;
}

void check_inputs(const LindbladModel& model, const UnravellingSpec& spec, const DensityMatrix& rho0,
                  const TrajectoryConfig& config, long n_traj) {
  validate(spec);
  validate(config);
  if (rho0.dim() != model.dim()) throw DimensionError("state and model dimensions differ");
  if (n_traj < 2) throw InvalidArgument("an ensemble needs at least 2 trajectories");
}

/// Per-chunk accumulation followed by an in-order merge.
template <class Acc, class Body>
std::vector<Acc> run_chunks(long n_traj, int threads, Acc prototype, Body&& body) {
  const long chunks = (n_traj + kChunk - 1) / kChunk;
  std::vector<Acc> acc(static_cast<std::size_t>(chunks), prototype);
  unravel::detail::parallel_for(chunks, resolve_threads(threads), [&](long c) {
    const long begin = c * kChunk;
    const long end = std::min(n_traj, begin + kChunk);
    for (long i = begin; i < end; ++i) body(acc[static_cast<std::size_t>(c)], i);
  });
  return acc;
}

struct CurveAcc {
  std::vector<Moments> m;
  std::string dump;
};

EnsembleCurve finish(const std::vector<CurveAcc>& chunks, const std::vector<double>& times) {
  std::vector<Moments> total(times.size());
  for (const auto& c : chunks) {
    for (std::size_t k = 0; k < total.size(); ++k) total[k].merge(c.m[k]);
  }
  EnsembleCurve out;
  out.times = times;
  out.n = total.empty() ? 0 : total.front().n;
  for (const auto& m : total) {
    out.mean.push_back(m.mean);
    out.stderr_.push_back(m.stderr_());
  }
  return out;
}

void write_dump(const std::string& path, const std::vector<CurveAcc>& chunks, const char* statistic) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot open dump file '" + path + "'");
  f << "# per-trajectory samples of " << statistic << "\n";
  f << "t,statistic,trajectory\n";
  for (const auto& c : chunks) f << c.dump;
}

void dump_row(std::string& buf, double t, double value, long traj) {
  std::ostringstream os;
  os << std::setprecision(17) << t << ',' << value << ',' << traj << '\n';
  buf += os.str();
}

template <class B>
EnsembleCurve purity_ensemble(const LindbladModel& model, const UnravellingSpec& spec,
                              const DensityMatrix& rho0, const TrajectoryConfig& config, long n_traj,
                              const EnsembleOptions& options) {
  const long steps = step_count(config);
  const auto samples = sample_steps(steps, config.sample_stride);
  std::vector<double> times;
  for (long s : samples) times.push_back(s * config.dt);
  const detail::Engine<B> prototype(model, spec, config.dt);
  const auto start = B::from(rho0.matrix());
  const bool dump = !options.dump_path.empty();
  auto chunks = run_chunks(n_traj, options.threads, CurveAcc{std::vector<Moments>(times.size()), {}},
                           [&](CurveAcc& acc, long i) {
                             detail::Engine<B> engine = prototype;
                             random::Philox4x32 rng(config.seed, static_cast<std::uint64_t>(i));
                             auto rho = start;
                             int sign = 1;
                             std::size_t next = 0;
                             for (long step = 0;; ++step) {
                               if (step == samples[next]) {
                                 const double p = detail::purity_of(rho);
                                 acc.m[next].add(p);
                                 if (dump) dump_row(acc.dump, times[next], p, i);
                                 if (++next == samples.size()) break;
                               }
                               if (engine.step(rho, rng, sign, nullptr) >= 0 && spec.kind == Scheme::AID) {
                                 sign = -sign;
                               }
                             }
                           });
  write_dump(options.dump_path, chunks, "purity");
  return finish(chunks, times);
}

struct StateAcc {
  std::vector<CMat> sum;
  std::vector<double> norm2;
  long n = 0;
};

template <class B>
EnsembleResult mean_state_ensemble(const LindbladModel& model, const UnravellingSpec& spec,
                                   const DensityMatrix& rho0, const TrajectoryConfig& config,
                                   long n_traj, const EnsembleOptions& options) {
  const long steps = step_count(config);
  const auto samples = sample_steps(steps, config.sample_stride);
  std::vector<double> times;
  for (long s : samples) times.push_back(s * config.dt);
  const int d = model.dim();
  const detail::Engine<B> prototype(model, spec, config.dt);
  const auto start = B::from(rho0.matrix());
  StateAcc proto{std::vector<CMat>(times.size(), CMat::Zero(d, d)), std::vector<double>(times.size(), 0.0), 0};
  auto chunks = run_chunks(n_traj, options.threads, proto, [&](StateAcc& acc, long i) {
    detail::Engine<B> engine = prototype;
    random::Philox4x32 rng(config.seed, static_cast<std::uint64_t>(i));
    auto rho = start;
    int sign = 1;
    std::size_t next = 0;
    ++acc.n;
    for (long step = 0;; ++step) {
      if (step == samples[next]) {
        acc.sum[next] += B::to(rho);
        acc.norm2[next] += rho.cwiseAbs2().sum();
        if (++next == samples.size()) break;
      }
      if (engine.step(rho, rng, sign, nullptr) >= 0 && spec.kind == Scheme::AID) sign = -sign;
    }
  });
  EnsembleResult out;
  out.curve.times = times;
  out.curve.n = n_traj;
  const double n = static_cast<double>(n_traj);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CMat sum = CMat::Zero(d, d);
    double norm2 = 0.0;
    for (const auto& c : chunks) {
      sum += c.sum[k];
      norm2 += c.norm2[k];
    }
    const CMat mean = sum / n;
    const double spread = std::max(0.0, norm2 / n - mean.cwiseAbs2().sum());
    out.mean_states.push_back(mean);
    out.mean_state_stderr.push_back(std::sqrt(spread / (n - 1.0)));
    out.curve.mean.push_back(mean.cwiseAbs2().sum());
    out.curve.stderr_.push_back(out.mean_state_stderr.back());
  }
  return out;
}

struct FrozenAcc {
  std::vector<Moments> mixing;
  std::vector<Moments> survival;
  std::string dump;
};

template <class B>
FrozenCurves frozen_ensemble(const LindbladModel& model, const UnravellingSpec& spec,
                             const DensityMatrix& rho0, const TrajectoryConfig& config, long n_traj,
                             const EnsembleOptions& options, Statistic dumped) {
  const FrozenOptions& fo = options.frozen;
  if (!(fo.relax >= 0.0) || !(fo.spacing > 0.0) || fo.freezes < 1 || !(fo.tau_horizon > 0.0) ||
      !(fo.tau_step > 0.0)) {
    throw InvalidArgument("invalid frozen-state options");
  }
  const double dt = config.dt;
  const long relax_steps = static_cast<long>(std::ceil(fo.relax / dt - 1e-12));
  const long spacing_steps = std::max(1L, static_cast<long>(std::ceil(fo.spacing / dt - 1e-12)));
  const long n_tau = static_cast<long>(std::ceil(fo.tau_horizon / fo.tau_step - 1e-12));
  std::vector<double> taus;
  for (long k = 0; k <= n_tau; ++k) taus.push_back(k * fo.tau_step);

  // Deterministic evolution over one tau step: exact on vec(rho) for small
  // dimensions, RK4 substeps otherwise.
  const int d = model.dim();
  const bool exact = d * d <= 64;
  CMat prop;
  if (exact) prop = expm((hilbert::generator_matrix(model) * fo.tau_step).eval());
  const int substeps = std::max(1, static_cast<int>(std::ceil(fo.tau_step / dt - 1e-12)));
  const double h = fo.tau_step / substeps;

  const detail::Engine<B> prototype(model, spec, dt);
  const auto start = B::from(rho0.matrix());
  const bool dump = !options.dump_path.empty();
  FrozenAcc proto{std::vector<Moments>(taus.size()), std::vector<Moments>(taus.size()), {}};
  const long chunks_n = (n_traj + kChunk - 1) / kChunk;
  std::vector<FrozenAcc> chunks(static_cast<std::size_t>(chunks_n), proto);
  unravel::detail::parallel_for(chunks_n, resolve_threads(options.threads), [&](long c) {
    FrozenAcc& acc = chunks[static_cast<std::size_t>(c)];
    std::vector<double> mix(taus.size()), sur(taus.size());
    for (long i = c * kChunk; i < std::min(n_traj, (c + 1) * kChunk); ++i) {
      detail::Engine<B> engine = prototype;
      random::Philox4x32 rng(config.seed, static_cast<std::uint64_t>(i));
      auto rho = start;
      int sign = 1;
      auto advance = [&](long n) {
        for (long s = 0; s < n; ++s) {
          if (engine.step(rho, rng, sign, nullptr) >= 0 && spec.kind == Scheme::AID) sign = -sign;
        }
      };
      std::fill(mix.begin(), mix.end(), 0.0);
      std::fill(sur.begin(), sur.end(), 0.0);
      advance(relax_steps);
      for (int f = 0; f < fo.freezes; ++f) {
        if (f > 0) advance(spacing_steps);
        const auto frozen = rho;
        auto evolved = rho;
        for (std::size_t k = 0; k < taus.size(); ++k) {
          if (k > 0) {
            if (exact) {
              CVec v = Eigen::Map<const CVec>(evolved.data(), d * d);
              v = prop * v;
              evolved = Eigen::Map<const CMat>(v.data(), d, d);
              evolved = 0.5 * (evolved + evolved.adjoint()).eval();
            } else {
              for (int s = 0; s < substeps; ++s) engine.lindblad_step(evolved, h);
            }
          }
          mix[k] += detail::purity_of(evolved);
          sur[k] += detail::overlap_of(frozen, evolved);
        }
      }
      for (std::size_t k = 0; k < taus.size(); ++k) {
        const double mk = mix[k] / fo.freezes;
        const double sk = sur[k] / fo.freezes;
        acc.mixing[k].add(mk);
        acc.survival[k].add(sk);
        if (dump) dump_row(acc.dump, taus[k], dumped == Statistic::Mixing ? mk : sk, i);
      }
    }
  });
  std::vector<CurveAcc> mixing_chunks, survival_chunks;
  for (auto& c : chunks) {
    mixing_chunks.push_back({c.mixing, {}});
    survival_chunks.push_back({c.survival, dumped == Statistic::Mixing ? std::string{} : c.dump});
    if (dumped == Statistic::Mixing) mixing_chunks.back().dump = c.dump;
  }
  if (dump) {
    write_dump(options.dump_path, dumped == Statistic::Mixing ? mixing_chunks : survival_chunks,
               dumped == Statistic::Mixing ? "frozen-state purity" : "frozen-state overlap");
  }
  return {finish(mixing_chunks, taus), finish(survival_chunks, taus)};
}

template <class B>
Estimate late_purity(const LindbladModel& model, const UnravellingSpec& spec, const DensityMatrix& rho0,
                     const TrajectoryConfig& config, long n_traj, double tail_fraction,
                     const EnsembleOptions& options) {
  const long steps = step_count(config);
  if (steps < 1) throw InvalidArgument("late-time purity needs a positive horizon");
  const long tail = std::max(1L, static_cast<long>(std::floor(tail_fraction * steps)));
  const long first = steps - tail + 1;
  const detail::Engine<B> prototype(model, spec, config.dt);
  const auto start = B::from(rho0.matrix());
  auto chunks = run_chunks(n_traj, options.threads, Moments{}, [&](Moments& acc, long i) {
    detail::Engine<B> engine = prototype;
    random::Philox4x32 rng(config.seed, static_cast<std::uint64_t>(i));
    auto rho = start;
    int sign = 1;
    double sum = 0.0;
    long count = 0;
    for (long step = 1; step <= steps; ++step) {
      if (engine.step(rho, rng, sign, nullptr) >= 0 && spec.kind == Scheme::AID) sign = -sign;
      if (step >= first && (step - first) % config.sample_stride == 0) {
        sum += detail::purity_of(rho);
        ++count;
      }
    }
    acc.add(sum / static_cast<double>(count));
  });
  Moments total;
  for (const auto& c : chunks) total.merge(c);
  return {total.mean, total.stderr_(), total.n};
}

}  // namespace

EnsembleResult run_ensemble(const LindbladModel& model, const UnravellingSpec& spec,
                            const DensityMatrix& rho0, const TrajectoryConfig& config, long n_traj,
                            Statistic statistic, const EnsembleOptions& options) {
  check_inputs(model, spec, rho0, config, n_traj);
  return detail::dispatch(model.dim(), [&]<class B>() {
    EnsembleResult out;
    switch (statistic) {
      case Statistic::Purity:
        out.curve = purity_ensemble<B>(model, spec, rho0, config, n_traj, options);
        break;
      case Statistic::MeanState:
        out = mean_state_ensemble<B>(model, spec, rho0, config, n_traj, options);
        break;
      case Statistic::Overlap:
        out.curve = frozen_ensemble<B>(model, spec, rho0, config, n_traj, options, statistic).survival;
        break;
      case Statistic::Mixing:
        out.curve = frozen_ensemble<B>(model, spec, rho0, config, n_traj, options, statistic).mixing;
        break;
    }
    return out;
  });
}

FrozenCurves run_frozen(const LindbladModel& model, const UnravellingSpec& spec,
                        const DensityMatrix& rho0, const TrajectoryConfig& config, long n_traj,
                        const EnsembleOptions& options) {
  check_inputs(model, spec, rho0, config, n_traj);
  return detail::dispatch(model.dim(), [&]<class B>() {
    return frozen_ensemble<B>(model, spec, rho0, config, n_traj, options, Statistic::Overlap);
  });
}

Estimate late_time_purity(const LindbladModel& model, const UnravellingSpec& spec,
                          const DensityMatrix& rho0, const TrajectoryConfig& config, long n_traj,
                          double tail_fraction, const EnsembleOptions& options) {
  check_inputs(model, spec, rho0, config, n_traj);
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw InvalidArgument("tail_fraction must lie in (0, 1]");
  }
  return detail::dispatch(model.dim(), [&]<class B>() {
    return late_purity<B>(model, spec, rho0, config, n_traj, tail_fraction, options);
  });
}

}  // namespace unravel::trajectories
