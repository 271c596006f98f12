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

#ifndef FLEXNR_LAGRANGIAN_HPP
#define FLEXNR_LAGRANGIAN_HPP

#include <functional>
#include <span>
#include <vector>

#include "flexnr/instance.hpp"
#include "flexnr/utility.hpp"

namespace flexnr {

struct SubgradientParams {
  int max_iters = 200;
  double lambda_stop_tol = 1e-9;  // stop when ||lambda' - lambda||_inf drops below
  bool keep_g_history = true;
  /// Optional per-iteration trace: (h, g, ||s||_inf, pairs assigned).
  std::function<void(int, double, double, int)> on_iteration;
};

/// State of the dual iteration. `u_acc` accumulates the per-iteration binary
/// solutions and is the LD utility; `g_best` is the best (smallest) valid
/// dual bound seen so far.
struct DualState {
  std::vector<double> lambda;
  int iterations = 0;
  double g_best = 0.0;
  bool demand_infeasible = false;  // some latency demand not coverable at all
  UtilityMatrix u_acc;
  std::vector<double> g_history;  // valid upper bounds, one per iteration
};

/// Result of the covering knapsack for one latency service.
struct KnapsackResult {
  std::vector<int> blocks;  // chosen block ids, ascending
  double cost = 0.0;        // sum of alpha over chosen blocks
  double total_rate = 0.0;  // sum of true (unrounded) rates
  bool covered = false;     // total_rate >= q
  bool optimal = false;     // cost is the exact DP minimum
};

/// alpha_b = sum of multipliers over the block's coverage.
double alpha_cost(std::span<const double> lambda, const Block& b);

/// Closed-form subproblem over capacity services: each block goes to the
/// service maximizing r - alpha when that margin is strictly positive.
struct P2Solution {
  std::vector<int> chosen;  // per block: capacity service id or -1
  double value = 0.0;       // sum of positive margins
};
P2Solution solve_p2(const Instance& inst, std::span<const double> lambda);

/// Min-cost covering knapsack, exact by DP after flooring rates to multiples
/// of delta (achieved rate is never overstated). A floored no-cover with the
/// true rates still sufficient triggers a re-solve at delta/10; if rounding
/// keeps blocking, the all-blocks cover is returned with `optimal` unset.
KnapsackResult solve_p3k(const Instance& inst, std::span<const double> lambda, int k,
                         double delta_bits);

/// Default granularity: max(1, q/10000) bits.
double default_knapsack_delta(double demand_bits);

/// Lower bound on the P3[k] optimum (rates ceiled to multiples of delta),
/// suitable for valid dual values. Returns +inf when even all blocks cannot
/// cover q.
double p3_cost_lower_bound(const Instance& inst, std::span<const double> lambda, int k,
                           double delta_bits);

/// g(lambda) = sum_i lambda_i + P2 value - sum_k P3[k] cost. With cost lower
/// bounds this is >= the integer optimum for every lambda >= 0 (weak
/// duality). +inf when any latency demand is uncoverable.
double dual_value(const Instance& inst, std::span<const double> lambda, double p2_value,
                  std::span<const double> p3_costs);

/// Projected subgradient descent on the dual: lambda_i <- max(0, lambda_i -
/// theta_h * s_i) with s_i = 1 - sum_{b,k} a[b][i] x_h[b][k] and theta_h =
/// theta_0 / sqrt(h), theta_0 = max rate / max coverage size.
DualState subgradient_run(const Instance& inst, const SubgradientParams& params = {});

/// The accumulated utility, unnormalized (only the ordering matters).
UtilityMatrix ld_utility(const DualState& state);

}  // namespace flexnr

#endif  // FLEXNR_LAGRANGIAN_HPP
