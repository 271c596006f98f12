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

#ifndef FLEXNR_EXACT_HPP
#define FLEXNR_EXACT_HPP

#include <optional>

#include "flexnr/assign.hpp"
#include "flexnr/instance.hpp"

namespace flexnr {

struct ExactResult {
  Assignment assignment;
  double value = 0.0;
  bool feasible = false;  // some demand-feasible assignment exists
  bool proven = false;    // value is the true optimum (or infeasibility is proven)
  long long nodes = 0;
  double wall_time_s = 0.0;
  double bound_gap = 0.0;  // (UB - incumbent) / UB when time-limited, else 0
};

struct BruteForceLimits {
  long long max_nodes = 50'000'000;
};

/// Exhaustive search over per-block decisions (one service or none) with
/// overlap pruning, driven unit by unit. Throws std::runtime_error when the
/// node guard trips; use branch_and_bound for anything non-tiny.
ExactResult brute_force(const Instance& inst, const BruteForceLimits& limits = {});

struct BnBParams {
  double time_limit_s = 300.0;
  /// Feasible warm-start solution; when absent the LP+LD pipeline runs first.
  std::optional<Assignment> incumbent_hint;
};

/// Depth-first branch and bound on the LP relaxation, branching on the
/// fractional (block, service) variable closest to 0.5. On natural
/// termination the result is proven; on timeout it carries the incumbent and
/// the remaining bound gap.
ExactResult branch_and_bound(const Instance& inst, const BnBParams& params = {});

/// (exact - heuristic) / exact for maximization; 0 when both are 0. Throws
/// std::logic_error when heuristic > exact + 1e-6 (a solver bug).
double optimality_gap(double heuristic_value, double exact_value);

}  // namespace flexnr

#endif  // FLEXNR_EXACT_HPP
