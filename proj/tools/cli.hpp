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

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "unravel/report.hpp"

namespace unravel::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kUsage = 2,
  kNumeric = 3,
  kUnresolved = 4,
};

/// Runs the command line `args` (without the program name). Reports go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Validation suites shared by `validate` and the acceptance runner.

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  bool passed() const;
  report::Json to_json() const;
};

struct InvarianceOptions {
  double omega = 2.0;
  double gamma = 1.0;
  std::vector<double> etas{0.5, 1.0};
  long n_traj = 5000;
  double dt = 1e-3;
  double horizon = 5.0;
  int stride = 100;
  std::uint64_t seed = 1;
  int threads = 0;
  double tolerance = 0.05;
};

/// Ensemble-mean state of every TLA scheme against unconditional
/// propagation from the ground state; checks the max-over-time trace distance.
SuiteReport invariance_suite(const InvarianceOptions& options);

struct OracleOptions {
  double temperature = 0.5;
  int truncation = 60;
  long n_traj = 100;  // 0 skips the conditional check
  double dt = 2e-3;
  double horizon = 1.0;
  std::uint64_t seed = 1;
  int threads = 0;
  double tolerance = 1e-2;
};

/// Fock-space QBM model against the Gaussian backend: state preparation,
/// unconditional moments and the conditional purity curve.
SuiteReport gaussian_oracle_suite(const OracleOptions& options);

/// Degenerate cases and determinism contracts.
SuiteReport property_suite(int threads = 0);

const std::vector<std::string>& suite_names();

}  // namespace unravel::cli
