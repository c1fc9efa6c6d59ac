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


#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace unravel;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> data_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    rows.push_back(line);
  }
  return rows;
}

}  // namespace

TEST_CASE("qbm-optimal") {
  const auto one = call({"qbm-optimal", "--temps", "1", "--measure", "tau_sur"});
  REQUIRE(one.code == 0);
  CHECK(one.out.find("T,measure,r_star,phi_star,value,error") != std::string::npos);
  CHECK(data_rows(one.out).size() == 1);

  const auto sweep = call({"qbm-optimal", "--temps", "1:10:2"});
  REQUIRE(sweep.code == 0);
  const auto rows = data_rows(sweep.out);
  REQUIRE(rows.size() == 8);
  for (const auto& row : rows) {
    std::istringstream in(row);
    std::string t, m, r;
    std::getline(in, t, ',');
    std::getline(in, m, ',');
    std::getline(in, r, ',');
    CHECK(std::stod(r) >= 0.98);
  }
}

TEST_CASE("tla-curves is reproducible") {
  const std::vector<std::string> args{"tla-curves", "--n-traj", "4", "--horizon", "0.1",
                                      "--schemes", "direct,aid", "--seed", "9"};
  const auto a = call(args);
  REQUIRE(a.code == 0);
  CHECK(a.out.find("# theta:") != std::string::npos);
  CHECK(data_rows(a.out).size() == 2 * 11);
  CHECK(call(args).out == a.out);
  CHECK(call({"tla-curves", "--schemes", "bogus"}).code == cli::kUsage);
}

TEST_CASE("tla-rank") {
  const auto r = call({"tla-rank", "--measure", "tau_pur", "--n-traj", "10", "--horizon", "5"});
  CHECK((r.code == cli::kUnresolved || r.code == cli::kSuccess));
  const auto j = report::Json::parse(r.out);
  CHECK(j["ranking"]["entries"].size() == 5);
  CHECK(j["command"] == "tla-rank");
  CHECK(call({"tla-rank"}).code == cli::kUsage);
}

TEST_CASE("validate") {
  CHECK(call({"validate", "--suite", "bogus"}).code == cli::kUsage);
  const auto p = call({"validate", "--suite", "properties"});
  CHECK(p.code == 0);
  CHECK(report::Json::parse(p.out)["passed"] == true);
}

TEST_CASE("config file and overrides") {
  const auto dir = std::filesystem::temp_directory_path() / "unravel_cli_test";
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "curves.cfg";
  {
    std::ofstream f(cfg);
    f << "# curves\nn-traj = 3\nhorizon=0.05\nschemes = het\n";
  }
  const auto base = call({"tla-curves", "--config", cfg.string()});
  REQUIRE(base.code == 0);
  CHECK(data_rows(base.out).size() == 6);
  CHECK(base.out.find("# n-traj: 3") != std::string::npos);
  const auto over = call({"tla-curves", "--config", cfg.string(), "--schemes", "het,direct"});
  REQUIRE(over.code == 0);
  CHECK(data_rows(over.out).size() == 12);

  const auto out = dir / "curves.csv";
  REQUIRE(call({"tla-curves", "--config", cfg.string(), "--out", out.string()}).code == 0);
  std::ifstream in(out);
  std::stringstream s;
  s << in.rdbuf();
  CHECK(s.str() == base.out);
  CHECK(call({"tla-curves", "--config", (dir / "missing.cfg").string()}).code == cli::kUsage);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bad arguments") {
  CHECK(call({}).code == cli::kUsage);
  CHECK(call({"nope"}).code == cli::kUsage);
  CHECK(call({"tla-curves", "--dt", "-1"}).code == cli::kUsage);
  CHECK(call({"qbm-optimal", "--temps", "-1"}).code != 0);
}
