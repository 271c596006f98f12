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

#ifndef FLEXNR_ASSIGN_HPP
#define FLEXNR_ASSIGN_HPP

#include <string>
#include <vector>

#include "flexnr/instance.hpp"
#include "flexnr/lagrangian.hpp"
#include "flexnr/utility.hpp"

namespace flexnr {

/// Initial mutually non-overlapping (block, service) pairs.
struct SeedSet {
  std::vector<std::pair<int, int>> pairs;
};

/// Admits pairs with u >= rho in descending-u order, skipping pairs whose
/// block overlaps or duplicates an already-admitted one. Ties break by
/// (block id, service id). Requires 0 < rho <= 1.
SeedSet seed_from_lp(const Instance& inst, const UtilityMatrix& lp_u, double rho);

/// Greedy block assignment. Phase 1 serves latency services by descending
/// utility until every demand is met or candidates run out (leftover services
/// are flagged unmet); phase 2 fills the remaining blocks for capacity
/// services. Selection order: utility desc, rate desc, block id, service id.
/// Zero-utility or zero-rate pairs are never selected in phase 1; in phase 2
/// zero-utility pairs come after all positive-utility ones, ordered by rate.
Assignment ba(const Instance& inst, const SeedSet& seed, const UtilityMatrix& u);

enum class SolveMode { RATE, LP, LD, LP_PLUS_LD };

SolveMode parse_solve_mode(const std::string& s);
std::string to_string(SolveMode m);

struct PipelineParams {
  std::vector<double> rho_grid;  // empty = the default 0.05..0.95 grid
  SubgradientParams subgradient;

  static std::vector<double> default_rho_grid();
};

struct PipelineDiagnostics {
  SolveMode mode = SolveMode::RATE;
  double rho_selected = -1.0;     // LP arm only
  int subgradient_iterations = 0; // LD arm only
  bool lp_skipped = false;        // LP relaxation infeasible or hit its limit
  std::string winner;             // LP_PLUS_LD: "lp" or "ld"
};

struct PipelineResult {
  Assignment assignment;
  PipelineDiagnostics diag;
};

/// True when `a` strictly beats `b`: feasible beats infeasible, then higher
/// capacity objective, then fewer blocks used.
bool assignment_better(const Assignment& a, const Assignment& b);

/// RATE = BA(empty, r); LP = best over the rho grid of BA(seed(rho), u_LP);
/// LD = BA(empty, u_LD); LP_PLUS_LD = the better of the LP and LD arms.
PipelineResult run_pipeline(const Instance& inst, SolveMode mode,
                            const PipelineParams& params = {});

}  // namespace flexnr

#endif  // FLEXNR_ASSIGN_HPP
