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

#ifndef FLEXNR_LP_HPP
#define FLEXNR_LP_HPP

#include <iosfwd>
#include <vector>

#include "flexnr/instance.hpp"
#include "flexnr/utility.hpp"

namespace flexnr {

/// Maximization LP over variables in [0, 1]:
///   rows 0 .. num_demand_rows-1      are '>=' rows,
///   rows num_demand_rows .. end      are '<=' rows.
/// Columns are sparse and tagged with the (block, service) pair they encode.
struct LinearProgram {
  struct Column {
    int block = -1;
    int service = -1;
    double obj = 0.0;
    std::vector<std::pair<int, double>> entries;  // (row, coefficient)
  };

  int num_demand_rows = 0;
  int num_unit_rows = 0;
  std::vector<double> rhs;
  std::vector<Column> cols;
  int num_services = 0;  // key stride for (block, service) lookups

  int num_rows() const { return num_demand_rows + num_unit_rows; }
};

enum class LPStatus { OPTIMAL, INFEASIBLE, ITERATION_LIMIT };

struct LPSolution {
  LPStatus status = LPStatus::ITERATION_LIMIT;
  /// Optimum of the solved program. The solver works on a copy whose '<='
  /// rows are relaxed by <= 2e-8 against cycling, so this value is always a
  /// valid upper bound on the exact optimum (tight to ~1e-8 * dual scale).
  double objective = 0.0;
  std::vector<double> x;  // per column, with the relaxation removed
  long long iterations = 0;
  double max_constraint_violation = 0.0;
  double max_reduced_cost = 0.0;  // worst dual-feasibility violation at the end
  /// Shadow prices y of the rows at the final basis (>= rows first). For a
  /// maximization, '<=' rows have y >= 0 up to the dual tolerance.
  std::vector<double> row_duals;
};

/// Relaxation of the block-assignment problem: demand rows
/// sum_b r[b][k] x[b][k] >= q_k for latency services, one '<=1' row per basic
/// unit, objective over capacity pairs. Columns with zero rate are omitted
/// (they contribute to neither the objective nor a demand row).
LinearProgram build_lp(const Instance& inst);

/// Two-phase primal simplex for bounded variables on a dense tableau.
/// Deterministic; Dantzig pricing with Bland's rule engaged after a
/// degeneracy streak. OPTIMAL solutions are vertices of the relaxation.
LPSolution solve_lp(const LinearProgram& lp, double tol = 1e-7, long long max_iters = 200000);

/// u[b][k] = x_LP[b][k]; zero for omitted columns. Rejects non-OPTIMAL input.
UtilityMatrix lp_utility(const Instance& inst, const LinearProgram& lp, const LPSolution& sol);

/// Fixed-format MPS dump for cross-checking against external solvers.
void write_mps(const LinearProgram& lp, std::ostream& os);

}  // namespace flexnr

#endif  // FLEXNR_LP_HPP
