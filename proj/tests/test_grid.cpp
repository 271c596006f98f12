// Copyright 2026 The flexnr Authors
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

#include <stdexcept>

#include <set>

#include "flexnr/grid.hpp"
#include "flexnr/rng.hpp"

using namespace flexnr;

namespace {

ResourceGrid default_grid(int nt, int nf) {
  return ResourceGrid::make(nt * 0.125, nf * 180.0, 0.125, 180.0);
}

Block make_block(int t0, int f0, int ts, int fs) {
  Block b;
  b.t0 = t0;
  b.f0 = f0;
  b.t_span = ts;
  b.f_span = fs;
  return b;
}

bool coverage_intersects(const Block& a, const Block& b, const ResourceGrid& g) {
  std::set<int> units;
  for (int t = a.t0; t < a.t0 + a.t_span; ++t)
    for (int f = a.f0; f < a.f0 + a.f_span; ++f) units.insert(g.unit_index(t, f));
  for (int t = b.t0; t < b.t0 + b.t_span; ++t)
    for (int f = b.f0; f < b.f0 + b.f_span; ++f)
      if (units.count(g.unit_index(t, f))) return true;
  return false;
}

}  // namespace

TEST_CASE("catalog shapes are internally consistent") {
  REQUIRE(shape_catalog().size() == 4);
  for (const auto& s : shape_catalog()) CHECK_NOTHROW(s.validate());
  CHECK(catalog_shape("shape3e").num_symbols == 6);
  CHECK_THROWS_AS(catalog_shape("nope"), std::invalid_argument);
}

TEST_CASE("catalog footprints on the default basic unit") {
  const ResourceGrid g = default_grid(16, 8);
  const int expected[4][2] = {{4, 1}, {2, 2}, {1, 4}, {1, 4}};
  for (int i = 0; i < 4; ++i) {
    const Footprint fp = shape_footprint(shape_catalog()[i], g, 12);
    CHECK(fp.t_span == expected[i][0]);
    CHECK(fp.f_span == expected[i][1]);
  }
}

TEST_CASE("placement counts on a 16x8 grid") {
  const ResourceGrid g = default_grid(16, 8);
  const auto only1 = enumerate_blocks(g, {catalog_shape("shape1")}, 12);
  CHECK(only1.size() == 104);  // 13 * 8
  const auto all = enumerate_blocks(g, shape_catalog(), 12);
  CHECK(all.size() == 369);  // 104 + 105 + 80 + 80
  for (size_t i = 0; i < all.size(); ++i) CHECK(all[i].id == static_cast<int>(i));
}

TEST_CASE("oversized footprint contributes zero blocks") {
  const ResourceGrid g = default_grid(1, 1);
  CHECK(enumerate_blocks(g, {catalog_shape("shape1")}, 12).empty());
}

TEST_CASE("non-integral footprint is rejected") {
  NumerologyShape odd{"odd", 10.0, 0.25, 100.0, 4.0, 2};
  const ResourceGrid g = default_grid(4, 4);
  CHECK_THROWS_AS(shape_footprint(odd, g, 12), std::invalid_argument);  // f-span would be 0.67
}

TEST_CASE("block count formula holds on all grids up to 8x8") {
  for (int nt = 1; nt <= 8; ++nt) {
    for (int nf = 1; nf <= 8; ++nf) {
      const ResourceGrid g = default_grid(nt, nf);
      size_t expected = 0;
      for (const auto& s : shape_catalog()) {
        const Footprint fp = shape_footprint(s, g, 12);
        if (fp.t_span > nt || fp.f_span > nf) continue;
        expected += static_cast<size_t>(nt - fp.t_span + 1) * (nf - fp.f_span + 1);
      }
      CHECK(enumerate_blocks(g, shape_catalog(), 12).size() == expected);
    }
  }
}

TEST_CASE("coverage fields are consistent") {
  const ResourceGrid g = default_grid(6, 6);
  for (const Block& b : enumerate_blocks(g, shape_catalog(), 12)) {
    CHECK(b.coverage.size() == static_cast<size_t>(b.t_span) * b.f_span);
    for (int u : b.coverage) CHECK(u < g.num_units());
    CHECK(b.end_time_ms == doctest::Approx((b.t0 + b.t_span) * g.unit_time_ms));
  }
}

TEST_CASE("overlap examples") {
  CHECK_FALSE(overlaps(make_block(0, 0, 1, 4), make_block(0, 4, 1, 4)));
  CHECK(overlaps(make_block(0, 0, 4, 1), make_block(3, 0, 1, 4)));  // shared unit (3,0)
  const Block self = make_block(2, 3, 2, 2);
  CHECK(overlaps(self, self));
}

TEST_CASE("overlap equals coverage intersection on random grids") {
  Rng rng(20260808);
  for (int trial = 0; trial < 300; ++trial) {
    const int nt = 2 + static_cast<int>(rng.uniform_int(19));
    const int nf = 2 + static_cast<int>(rng.uniform_int(19));
    const ResourceGrid g = default_grid(nt, nf);
    auto rand_block = [&]() {
      const int ts = 1 + static_cast<int>(rng.uniform_int(nt));
      const int fs = 1 + static_cast<int>(rng.uniform_int(nf));
      const int t0 = static_cast<int>(rng.uniform_int(nt - ts + 1));
      const int f0 = static_cast<int>(rng.uniform_int(nf - fs + 1));
      return make_block(t0, f0, ts, fs);
    };
    const Block a = rand_block();
    const Block b = rand_block();
    CHECK(overlaps(a, b) == coverage_intersects(a, b, g));
    CHECK(overlaps(a, b) == overlaps(b, a));
  }
}

TEST_CASE("all four shapes cover every basic unit on grids >= 4x4") {
  for (int nt = 4; nt <= 6; ++nt) {
    for (int nf = 4; nf <= 6; ++nf) {
      const ResourceGrid g = default_grid(nt, nf);
      std::set<int> covered;
      for (const Block& b : enumerate_blocks(g, shape_catalog(), 12)) {
        covered.insert(b.coverage.begin(), b.coverage.end());
      }
      CHECK(covered.size() == static_cast<size_t>(g.num_units()));
    }
  }
}
