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

#include <cmath>
#include <set>

#include "unravel/random.hpp"

using unravel::random::Philox4x32;

TEST_CASE("philox4x32-10 known answers") {
  using Block = Philox4x32::Block;
  CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) ==
        Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                             {0xffffffff, 0xffffffff}) ==
        Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                             {0xa4093822, 0x299f31d0}) ==
        Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are deterministic and distinct") {
  Philox4x32 a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  std::set<std::uint32_t> firsts;
  for (int i = 0; i < 16; ++i) {
    const auto x = a();
    CHECK(x == b());
    firsts.insert(x);
  }
  CHECK(firsts.size() == 16);
  Philox4x32 a2(42, 0);
  CHECK(a2() != c());
  Philox4x32 a3(42, 0);
  CHECK(a3() != d());
}

TEST_CASE("uniform and normal moments") {
  Philox4x32 rng(7, 3);
  constexpr int n = 200000;
  double su = 0.0, suu = 0.0, sz = 0.0, szz = 0.0, sz4 = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
    suu += u * u;
    const auto z = rng.normal_pair();
    sz += z[0] + z[1];
    szz += z[0] * z[0] + z[1] * z[1];
    sz4 += std::pow(z[0], 4);
    sxy += z[0] * z[1];
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(suu / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
  CHECK(std::abs(sz / (2 * n)) < 0.01);
  CHECK(szz / (2 * n) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(sz4 / n == doctest::Approx(3.0).epsilon(0.03));
  CHECK(std::abs(sxy / n) < 0.01);
}
