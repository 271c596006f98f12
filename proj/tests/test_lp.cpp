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

#include <sstream>

#include "flexnr/lp.hpp"
#include "flexnr/rng.hpp"
#include "oracles.hpp"

using namespace flexnr;

namespace {

// A one-row '<=' LP with a single column.
LinearProgram single_column_lp(double obj, double rhs) {
  LinearProgram lp;
  lp.num_demand_rows = 0;
  lp.num_unit_rows = 1;
  lp.rhs = {rhs};
  LinearProgram::Column col;
  col.block = 0;
  col.service = 0;
  col.obj = obj;
  col.entries = {{0, 1.0}};
  lp.cols.push_back(col);
  lp.num_services = 1;
  return lp;
}

}  // namespace

TEST_CASE("build_lp row and column counts") {
  SUBCASE("|I|=4 with one latency service gives 5 rows") {
    // 2x2 grid of 0.5 ms x 180 kHz units; shape1 has a 1x1 footprint there.
    const ResourceGrid g = ResourceGrid::make(1.0, 360.0, 0.5, 180.0);
    std::vector<Service> services(2);
    services[0] = {0, ServiceClass::LATENCY, 10.0, 1.0, 20.0, {}};
    services[1] = {1, ServiceClass::CAPACITY, 0.0, 0.0, 20.0, {}};
    const Instance inst = build_instance(g, {catalog_shape("shape1")}, 12, services,
                                         default_profile(), RateConfig{}, 1);
    const LinearProgram lp = build_lp(inst);
    CHECK(lp.num_demand_rows == 1);
    CHECK(lp.num_unit_rows == 4);
    CHECK(lp.num_rows() == 5);
  }
  SUBCASE("no latency services means no demand rows") {
    const ResourceGrid g = ResourceGrid::make(1.0, 360.0, 0.5, 180.0);
    std::vector<Service> services(1);
    services[0] = {0, ServiceClass::CAPACITY, 0.0, 0.0, 20.0, {}};
    const Instance inst = build_instance(g, {catalog_shape("shape1")}, 12, services,
                                         default_profile(), RateConfig{}, 1);
    CHECK(build_lp(inst).num_demand_rows == 0);
  }
  SUBCASE("partition {1,1}: 1 demand row, 2 unit rows, 4 columns") {
    const LinearProgram lp = build_lp(partition_instance({1, 1}));
    CHECK(lp.num_demand_rows == 1);
    CHECK(lp.num_unit_rows == 2);
    CHECK(lp.cols.size() == 4);
  }
}

TEST_CASE("solve_lp on hand-built programs") {
  SUBCASE("single column takes its upper bound") {
    const LPSolution sol = solve_lp(single_column_lp(10.0, 1.0));
    REQUIRE(sol.status == LPStatus::OPTIMAL);
    CHECK(sol.objective == doctest::Approx(10.0));
    CHECK(sol.x[0] == doctest::Approx(1.0));
  }
  SUBCASE("unmeetable demand row is infeasible") {
    LinearProgram lp;
    lp.num_demand_rows = 1;
    lp.num_unit_rows = 0;
    lp.rhs = {2.0};
    LinearProgram::Column col;
    col.block = 0;
    col.service = 0;
    col.obj = 0.0;
    col.entries = {{0, 1.0}};  // at x = 1 delivers only 1 < 2
    lp.cols.push_back(col);
    lp.num_services = 1;
    CHECK(solve_lp(lp).status == LPStatus::INFEASIBLE);
  }
}

TEST_CASE("random LPs match the vertex-enumeration oracle") {
  Rng rng(314159);
  int optimal = 0, infeasible = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(4));  // 2..5 variables
    oracles::DenseLP dense;
    dense.c.resize(n);
    for (double& v : dense.c) v = rng.uniform(-2.0, 8.0);
    const int n_ge = static_cast<int>(rng.uniform_int(3));  // 0..2
    const int n_le = 1 + static_cast<int>(rng.uniform_int(3));
    for (int i = 0; i < n_ge; ++i) {
      std::vector<double> a(n);
      for (double& v : a) v = rng.uniform(0.0, 3.0);
      dense.a_ge.push_back(a);
      dense.b_ge.push_back(rng.uniform(0.0, 0.8 * n));
    }
    for (int i = 0; i < n_le; ++i) {
      std::vector<double> a(n);
      for (double& v : a) v = rng.uniform(0.0, 3.0);
      dense.a_le.push_back(a);
      dense.b_le.push_back(rng.uniform(0.2, 2.0));
    }

    LinearProgram lp;
    lp.num_demand_rows = n_ge;
    lp.num_unit_rows = n_le;
    lp.num_services = 1;
    for (int i = 0; i < n_ge; ++i) lp.rhs.push_back(dense.b_ge[i]);
    for (int i = 0; i < n_le; ++i) lp.rhs.push_back(dense.b_le[i]);
    for (int j = 0; j < n; ++j) {
      LinearProgram::Column col;
      col.block = j;
      col.service = 0;
      col.obj = dense.c[j];
      for (int i = 0; i < n_ge; ++i) {
        if (dense.a_ge[i][j] != 0.0) col.entries.emplace_back(i, dense.a_ge[i][j]);
      }
      for (int i = 0; i < n_le; ++i) {
        if (dense.a_le[i][j] != 0.0) col.entries.emplace_back(n_ge + i, dense.a_le[i][j]);
      }
      lp.cols.push_back(col);
    }

    const auto expected = oracles::vertex_enumeration_opt(dense);
    const LPSolution sol = solve_lp(lp);
    if (expected.has_value()) {
      REQUIRE(sol.status == LPStatus::OPTIMAL);
      CHECK(sol.objective == doctest::Approx(*expected).epsilon(1e-6));
      CHECK(sol.max_constraint_violation <= 1e-7);
      CHECK(sol.max_reduced_cost <= 1e-6);
      ++optimal;
    } else {
      CHECK(sol.status == LPStatus::INFEASIBLE);
      ++infeasible;
    }
  }
  // The generator must exercise both outcomes.
  CHECK(optimal > 20);
  CHECK(infeasible > 5);
}

TEST_CASE("lp_utility maps the LP optimum onto (block, service) pairs") {
  const Instance inst = partition_instance({1, 1});
  const LinearProgram lp = build_lp(inst);
  const LPSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LPStatus::OPTIMAL);
  const UtilityMatrix u = lp_utility(inst, lp, sol);
  CHECK(u.source == UtilitySource::LP);
  // Unit-row audit: per-block mass at most 1.
  for (int b = 0; b < 2; ++b) {
    CHECK(u.at(b, 0) + u.at(b, 1) <= 1.0 + 1e-9);
  }
  // The LP meets demand 1 and packs the other block for capacity: optimum 1.
  CHECK(sol.objective == doctest::Approx(1.0));

  SUBCASE("direct value mapping") {
    LPSolution frac = sol;
    frac.x.assign(lp.cols.size(), 0.5);
    const UtilityMatrix uf = lp_utility(inst, lp, frac);
    CHECK(uf.at(0, 0) == 0.5);
  }
  SUBCASE("non-optimal input is rejected") {
    LPSolution bad = sol;
    bad.status = LPStatus::ITERATION_LIMIT;
    CHECK_THROWS_AS(lp_utility(inst, lp, bad), std::invalid_argument);
  }
}

TEST_CASE("MPS dump carries the full model") {
  const LinearProgram lp = build_lp(partition_instance({1, 1}));
  std::ostringstream os;
  write_mps(lp, os);
  const std::string text = os.str();
  CHECK(text.find("NAME") != std::string::npos);
  CHECK(text.find(" G  D0") != std::string::npos);
  CHECK(text.find(" L  U0") != std::string::npos);
  CHECK(text.find(" L  U1") != std::string::npos);
  CHECK(text.find("BOUNDS") != std::string::npos);
  CHECK(text.find("ENDATA") != std::string::npos);
}
