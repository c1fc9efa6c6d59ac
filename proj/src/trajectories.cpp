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

#include "unravel/trajectories.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <thread>

#include "engine.hpp"
#include "unravel/errors.hpp"

namespace unravel::trajectories {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Direct:
      return "direct";
    case Scheme::HomodyneX:
      return "hom-x";
    case Scheme::HomodyneY:
      return "hom-y";
    case Scheme::Heterodyne:
      return "het";
    case Scheme::AID:
      return "aid";
    case Scheme::GeneralDyne:
      return "general-dyne";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  std::string key;
  for (char c : name) {
    if (c == '_' || c == ' ' || c == '.') c = '-';
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "direct" || key == "counting") return Scheme::Direct;
  if (key == "hom-x" || key == "homodyne-x" || key == "homx") return Scheme::HomodyneX;
  if (key == "hom-y" || key == "homodyne-y" || key == "homy") return Scheme::HomodyneY;
  if (key == "het" || key == "heterodyne") return Scheme::Heterodyne;
  if (key == "aid") return Scheme::AID;
  if (key == "general-dyne" || key == "dyne") return Scheme::GeneralDyne;
  throw InvalidArgument("unknown unravelling scheme '" + name + "'");
}

UnravellingSpec UnravellingSpec::direct(double eta) { return {Scheme::Direct, {}, 0.0, eta}; }
UnravellingSpec UnravellingSpec::homodyne_x(double eta) { return {Scheme::HomodyneX, {1.0, 0.0}, 0.0, eta}; }
UnravellingSpec UnravellingSpec::homodyne_y(double eta) {
  return {Scheme::HomodyneY, {1.0, std::numbers::pi}, 0.0, eta};
}
UnravellingSpec UnravellingSpec::heterodyne(double eta) { return {Scheme::Heterodyne, {0.0, 0.0}, 0.0, eta}; }
UnravellingSpec UnravellingSpec::aid(cplx beta, double eta) { return {Scheme::AID, {}, beta, eta}; }
UnravellingSpec UnravellingSpec::general_dyne(const gaussian::DiskPoint& u, double eta) {
  return {Scheme::GeneralDyne, gaussian::make_disk_point(u.r, u.phi), 0.0, eta};
}

bool UnravellingSpec::diffusive() const { return kind != Scheme::Direct && kind != Scheme::AID; }

cplx UnravellingSpec::upsilon() const {
  switch (kind) {
    case Scheme::HomodyneX:
      return 1.0;
    case Scheme::HomodyneY:
      return -1.0;
    case Scheme::Heterodyne:
      return 0.0;
    case Scheme::GeneralDyne:
      return std::polar(disk.r, disk.phi);
    default:
      throw InvalidArgument("upsilon is only defined for diffusive unravellings");
  }
}

std::string UnravellingSpec::name() const {
  std::ostringstream os;
  os << scheme_name(kind);
  if (kind == Scheme::GeneralDyne) os << "(r=" << disk.r << ",phi=" << disk.phi << ")";
  if (kind == Scheme::AID) os << "(beta=" << lo_amplitude.real() << (lo_amplitude.imag() < 0 ? "" : "+")
                              << lo_amplitude.imag() << "i)";
  return os.str();
}

UnravellingSpec UnravellingSpec::with_eta(double e) const {
  UnravellingSpec out = *this;
  out.eta = e;
  return out;
}

void validate(const UnravellingSpec& spec) {
  if (!(spec.eta >= 0.0 && spec.eta <= 1.0)) throw InvalidArgument("eta must lie in [0, 1]");
  if (spec.kind == Scheme::AID && spec.lo_amplitude == cplx(0.0)) {
    throw InvalidArgument("AID needs a nonzero local-oscillator amplitude");
  }
  if (spec.kind == Scheme::GeneralDyne) gaussian::make_disk_point(spec.disk.r, spec.disk.phi);
}

void validate(const TrajectoryConfig& config) {
  if (!(config.dt > 0.0)) throw InvalidArgument("dt must be > 0");
  if (!(config.horizon >= 0.0)) throw InvalidArgument("horizon must be >= 0");
  if (config.sample_stride < 1) throw InvalidArgument("sample_stride must be >= 1");
}

namespace {

void check_dims(const LindbladModel& model, const DensityMatrix& rho) {
  if (rho.dim() != model.dim()) throw DimensionError("state and model dimensions differ");
}

}  // namespace

DensityMatrix step_diffusive(const LindbladModel& model, const UnravellingSpec& spec,
                             const DensityMatrix& rho, const std::vector<cplx>& noise, double dt) {
  validate(spec);
  check_dims(model, rho);
  if (!spec.diffusive()) throw InvalidArgument("step_diffusive needs a diffusive unravelling");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  if (noise.size() != model.jump_operators().size()) {
    throw DimensionError("one innovation per jump operator is required");
  }
  return detail::dispatch(model.dim(), [&]<class B>() {
    detail::Engine<B> engine(model, spec, dt);
    auto state = B::from(rho.matrix());
    engine.diffusive_step(state, noise.data());
    try {
      return DensityMatrix(B::to(state));
    } catch (const InvariantError& e) {
      throw StepSizeError(std::string("diffusive step: ") + e.what());
    }
  });
}

JumpOutcome step_jump(const LindbladModel& model, const UnravellingSpec& spec,
                      const DensityMatrix& rho, double uniform, double dt, int lo_sign) {
  validate(spec);
  check_dims(model, rho);
  if (spec.diffusive()) throw InvalidArgument("step_jump needs Direct or AID");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  return detail::dispatch(model.dim(), [&]<class B>() {
    detail::Engine<B> engine(model, spec, dt);
    auto state = B::from(rho.matrix());
    const int channel = engine.jump_step(state, uniform, lo_sign);
    try {
      return JumpOutcome{DensityMatrix(B::to(state)), channel >= 0, channel};
    } catch (const InvariantError& e) {
      throw StepSizeError(std::string("jump step: ") + e.what());
    }
  });
}

int aid_update(InnovationRecord& record, double t, bool jumped) {
  if (jumped) {
    record.lo_sign = -record.lo_sign;
    record.lo_signs.push_back(record.lo_sign);
    if (record.jump_times.empty() || record.jump_times.back() != t) record.jump_times.push_back(t);
  }
  return record.lo_sign;
}

Trajectory run_trajectory(const LindbladModel& model, const UnravellingSpec& spec,
                          const DensityMatrix& rho0, const TrajectoryConfig& config,
                          std::uint64_t stream) {
  validate(spec);
  validate(config);
  check_dims(model, rho0);
  Trajectory out;
  out.times.push_back(0.0);
  out.states.push_back(rho0);
  const long steps = static_cast<long>(std::ceil(config.horizon / config.dt - 1e-12));
  if (steps == 0) return out;
  detail::dispatch(model.dim(), [&]<class B>() {
    detail::Engine<B> engine(model, spec, config.dt);
    random::Philox4x32 rng(config.seed, stream);
    auto state = B::from(rho0.matrix());
    InnovationRecord& rec = out.record;
    rec.channels = engine.channels();
    if (config.record_innovations && engine.diffusive()) {
      rec.increments.reserve(static_cast<std::size_t>(steps) * rec.channels);
    }
    std::vector<cplx> dw(rec.channels);
    for (long i = 1; i <= steps; ++i) {
      const double t = i * config.dt;
      const int channel = engine.step(state, rng, rec.lo_sign, dw.data());
      if (engine.diffusive()) {
        if (config.record_innovations) rec.increments.insert(rec.increments.end(), dw.begin(), dw.end());
      } else if (channel >= 0) {
        if (spec.kind == Scheme::AID) {
          aid_update(rec, t, true);
        } else {
          rec.jump_times.push_back(t);
        }
      }
      if (i % config.sample_stride == 0 || i == steps) {
        out.times.push_back(t);
        try {
          out.states.emplace_back(B::to(state));
        } catch (const InvariantError& e) {
          throw StepSizeError(std::string("trajectory left the state space: ") + e.what());
        }
      }
    }
    return 0;
  });
  return out;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("UNRAVEL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace unravel::trajectories
