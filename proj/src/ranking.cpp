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


#include <algorithm>
#include <cmath>

#include "unravel/errors.hpp"
#include "unravel/measures.hpp"

namespace unravel::measures {

bool Ranking::resolved() const {
  return std::none_of(entries.begin(), entries.end(),
                      [](const RankEntry& e) { return e.tied_with_next; });
}

Ranking rank_results(MeasureKind kind, std::vector<RankEntry> entries, double ci_z) {
  const bool larger = larger_is_better(kind);
  for (auto& e : entries) {
    e.ci_low = e.value - ci_z * e.uncertainty;
    e.ci_high = e.value + ci_z * e.uncertainty;
  }
  std::stable_sort(entries.begin(), entries.end(), [&](const RankEntry& a, const RankEntry& b) {
    return larger ? a.value > b.value : a.value < b.value;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].tied_with_next = false;
    if (i + 1 == entries.size()) break;
    const auto& a = entries[i];
    const auto& b = entries[i + 1];
    entries[i].tied_with_next = std::max(a.ci_low, b.ci_low) <= std::min(a.ci_high, b.ci_high);
  }
  return Ranking{kind, std::move(entries)};
}

Ranking rank_unravellings(const systems::TlaParams& params, MeasureKind kind,
                          const std::vector<trajectories::Scheme>& schemes,
                          const RankOptions& options) {
  systems::validate(params);
  if (schemes.empty()) throw InvalidArgument("rank_unravellings: no schemes given");
  const auto catalog = systems::tla_unravellings(params);
  const bool larger = larger_is_better(kind);
  std::vector<RankEntry> entries;
  for (auto scheme : schemes) {
    auto it = std::find_if(catalog.begin(), catalog.end(),
                           [&](const auto& s) { return s.kind == scheme; });
    if (it == catalog.end())
      throw InvalidArgument("scheme " + trajectories::scheme_name(scheme) +
                            " is not available for the two-level atom");
    std::vector<double> factors{0.0};
    if (scheme == trajectories::Scheme::AID) {
      factors = options.aid_beta_factors;
      if (factors.empty()) throw InvalidArgument("rank_unravellings: empty beta sweep");
    }
    RankEntry best;
    bool have = false;
    for (double f : factors) {
      auto spec = *it;
      if (scheme == trajectories::Scheme::AID) {
        if (!(f > 0.0)) throw InvalidArgument("AID beta factors must be > 0");
        spec.lo_amplitude = f * std::sqrt(params.gamma);
      }
      RankEntry e;
      e.result = evaluate(kind, params, spec, options.mc);
      e.scheme = trajectories::scheme_name(scheme);
      e.value = e.result.value;
      e.uncertainty = e.result.uncertainty;
      e.beta_factor = scheme == trajectories::Scheme::AID ? f : 0.0;
      if (!have || (larger ? e.value > best.value : e.value < best.value)) best = e;
      have = true;
    }
    entries.push_back(std::move(best));
  }
  return rank_results(kind, std::move(entries), options.mc.ci_z);
}

}  // namespace unravel::measures
