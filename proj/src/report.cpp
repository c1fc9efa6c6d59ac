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


#include <array>
#include <charconv>
#include <cmath>

#include "unravel/errors.hpp"
#include "unravel/report.hpp"
#include "unravel/version.hpp"

namespace unravel::report {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace {

Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

}  // namespace

Json to_json(const measures::MeasureResult& r) {
  Json params = Json::object();
  for (const auto& [k, v] : r.params) params[k] = number(v);
  return Json{{"measure", measures::measure_name(r.kind)},
              {"system", r.system},
              {"params", params},
              {"spec", r.spec},
              {"value", number(r.value)},
              {"uncertainty", number(r.uncertainty)},
              {"N", r.n_traj},
              {"dt", number(r.dt)},
              {"seed", r.seed},
              {"theta", number(r.theta)},
              {"backend", r.backend},
              {"version", kVersion}};
}

Json to_json(const measures::Ranking& ranking) {
  Json entries = Json::array();
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    const auto& e = ranking.entries[i];
    Json j{{"rank", i + 1},
           {"scheme", e.scheme},
           {"value", number(e.value)},
           {"uncertainty", number(e.uncertainty)},
           {"ci_low", number(e.ci_low)},
           {"ci_high", number(e.ci_high)},
           {"tied_with_next", e.tied_with_next}};
    if (e.beta_factor > 0.0) j["beta_factor"] = e.beta_factor;
    j["result"] = to_json(e.result);
    entries.push_back(std::move(j));
  }
  return Json{{"measure", measures::measure_name(ranking.kind)},
              {"verdict", ranking.verdict()},
              {"entries", std::move(entries)},
              {"version", kVersion}};
}

CsvWriter::CsvWriter(std::ostream& out, const Header& header,
                     const std::vector<std::string>& columns)
    : out_(out), columns_(columns.size()) {
  if (columns.empty()) throw InvalidArgument("csv: need at least one column");
  for (const auto& [k, v] : header) out_ << "# " << k << ": " << v << '\n';
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw InvalidArgument("csv: wrong number of fields");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].find_first_of(",\n") != std::string::npos)
      throw InvalidArgument("csv: field contains a separator: " + fields[i]);
    out_ << (i ? "," : "") << fields[i];
  }
  out_ << '\n';
}

}  // namespace unravel::report
