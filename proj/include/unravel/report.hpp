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

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "unravel/measures.hpp"

// Serialization of results: JSON records and '#'-commented CSV files.

namespace unravel::report {

using Json = nlohmann::ordered_json;

/// Shortest text that parses back to the same double.
std::string format_number(double x);

/// {measure, system, params, spec, value, uncertainty, N, dt, seed, theta,
///  backend, version}
Json to_json(const measures::MeasureResult& r);
Json to_json(const measures::Ranking& ranking);

using Header = std::vector<std::pair<std::string, std::string>>;

/// Comma-separated rows after '# key: value' header lines. Fields are
/// written verbatim, so they must not contain commas or newlines.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const Header& header, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace unravel::report
