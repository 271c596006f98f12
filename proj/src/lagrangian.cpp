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

#include "flexnr/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace flexnr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr uint32_t kNoPrev = 0xFFFFFFFFu;

long long covering_target(double demand, double delta) {
  return static_cast<long long>(std::ceil(demand / delta - 1e-9));
}

/// 0/1 min-cost covering DP over integer weights with the accumulated value
/// capped at `target`. Returns the min cost; fills `chosen` with positions
/// into `weights` when `track` is set. Infeasible -> +inf.
double covering_dp(const std::vector<long long>& weights, const std::vector<double>& costs,
                   long long target, bool track, std::vector<int>* chosen) {
  if (target <= 0) return 0.0;
  if (target > 2'000'000) {
    throw std::invalid_argument("knapsack granularity too fine for the DP state space");
  }
  const size_t n = weights.size();
  const size_t states = static_cast<size_t>(target) + 1;
  std::vector<double> dp(states, kInf);
  dp[0] = 0.0;
  std::vector<uint32_t> prev;
  if (track) prev.assign(n * states, kNoPrev);

  for (size_t i = 0; i < n; ++i) {
    const long long w = weights[i];
    if (w <= 0) continue;
    const double c = costs[i];
    for (long long v = target - 1; v >= 0; --v) {
      if (dp[v] == kInf) continue;
      const long long nv = std::min(target, v + w);
      const double cand = dp[v] + c;
      if (cand < dp[nv]) {
        dp[nv] = cand;
        if (track) prev[i * states + nv] = static_cast<uint32_t>(v);
      }
    }
  }
  if (dp[target] == kInf) return kInf;
  if (track) {
    // The largest item index with a surviving write to state v is the final
    // producer of dp[v]; walking indices downward follows the optimal path.
    chosen->clear();
    long long v = target;
    for (size_t i = n; i-- > 0;) {
      const uint32_t p = prev[i * states + v];
      if (p != kNoPrev) {
        chosen->push_back(static_cast<int>(i));
        v = p;
      }
    }
    std::reverse(chosen->begin(), chosen->end());
  }
  return dp[target];
}

}  // namespace

double alpha_cost(std::span<const double> lambda, const Block& b) {
  double a = 0.0;
  for (int u : b.coverage) a += lambda[u];
  return a;
}

P2Solution solve_p2(const Instance& inst, std::span<const double> lambda) {
  P2Solution sol;
  sol.chosen.assign(inst.num_blocks(), -1);
  const std::vector<int> cap = inst.capacity_ids();
  for (int b = 0; b < inst.num_blocks(); ++b) {
    const double alpha = alpha_cost(lambda, inst.blocks[b]);
    double best = 0.0;
    int best_k = -1;
    for (int k : cap) {
      const double margin = inst.rate(b, k) - alpha;
      if (margin > best) {
        best = margin;
        best_k = k;
      }
    }
    if (best_k >= 0) {
      sol.chosen[b] = best_k;
      sol.value += best;
    }
  }
  return sol;
}

double default_knapsack_delta(double demand_bits) {
  return std::max(1.0, demand_bits / 10000.0);
}

KnapsackResult solve_p3k(const Instance& inst, std::span<const double> lambda, int k,
                         double delta_bits) {
  if (k < 0 || k >= inst.num_services() || inst.services[k].cls != ServiceClass::LATENCY) {
    throw std::invalid_argument("solve_p3k requires a latency service id");
  }
  if (delta_bits <= 0.0) throw std::invalid_argument("delta must be > 0");
  const double q = inst.services[k].demand_bits;

  KnapsackResult res;
  if (q <= 0.0) {
    res.covered = true;
    res.optimal = true;
    return res;
  }

  std::vector<int> items;  // block ids with positive rate
  double reachable = 0.0;
  for (int b = 0; b < inst.num_blocks(); ++b) {
    const double r = inst.rate(b, k);
    if (r > 0.0) {
      items.push_back(b);
      reachable += r;
    }
  }
  if (reachable < q - demand_tolerance(q)) {
    return res;  // no-cover: even all blocks fall short
  }

  double delta = delta_bits;
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::vector<long long> w(items.size());
    std::vector<double> costs(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
      w[i] = static_cast<long long>(std::floor(inst.rate(items[i], k) / delta + 1e-12));
      costs[i] = alpha_cost(lambda, inst.blocks[items[i]]);
    }
    std::vector<int> chosen_pos;
    const double cost = covering_dp(w, costs, covering_target(q, delta), true, &chosen_pos);
    if (cost != kInf) {
      double total = 0.0;
      for (int pos : chosen_pos) total += inst.rate(items[pos], k);
      if (total >= q - demand_tolerance(q)) {
        res.cost = cost;
        res.total_rate = total;
        res.covered = true;
        res.optimal = true;
        for (int pos : chosen_pos) res.blocks.push_back(items[pos]);
        return res;
      }
    }
    // Flooring blocked a true cover; refine the granularity and retry.
    delta /= 10.0;
  }

  // Rounding kept blocking: fall back to the trivially covering set.
  res.blocks = items;
  res.total_rate = reachable;
  res.covered = true;
  res.optimal = false;
  for (int b : items) res.cost += alpha_cost(lambda, inst.blocks[b]);
  return res;
}

double p3_cost_lower_bound(const Instance& inst, std::span<const double> lambda, int k,
                           double delta_bits) {
  if (k < 0 || k >= inst.num_services() || inst.services[k].cls != ServiceClass::LATENCY) {
    throw std::invalid_argument("p3_cost_lower_bound requires a latency service id");
  }
  const double q = inst.services[k].demand_bits;
  if (q <= 0.0) return 0.0;

  std::vector<long long> w;
  std::vector<double> costs;
  double reachable = 0.0;
  for (int b = 0; b < inst.num_blocks(); ++b) {
    const double r = inst.rate(b, k);
    if (r > 0.0) {
      w.push_back(static_cast<long long>(std::ceil(r / delta_bits - 1e-12)));
      costs.push_back(alpha_cost(lambda, inst.blocks[b]));
      reachable += r;
    }
  }
  if (reachable < q - demand_tolerance(q)) return kInf;
  return covering_dp(w, costs, covering_target(q, delta_bits), false, nullptr);
}

double dual_value(const Instance& inst, std::span<const double> lambda, double p2_value,
                  std::span<const double> p3_costs) {
  double g = p2_value;
  for (double c : p3_costs) {
    if (c == kInf) return kInf;
    g -= c;
  }
  (void)inst;
  for (double l : lambda) g += l;
  return g;
}

DualState subgradient_run(const Instance& inst, const SubgradientParams& params) {
  const int n_units = inst.grid.num_units();
  const std::vector<int> lat = inst.latency_ids();

  DualState state;
  state.lambda.assign(n_units, 0.0);
  state.u_acc = UtilityMatrix::zeros(UtilitySource::LD, inst.num_blocks(), inst.num_services());
  state.g_best = kInf;

  double max_rate = 0.0;
  size_t max_cov = 1;
  for (int b = 0; b < inst.num_blocks(); ++b) {
    max_cov = std::max(max_cov, inst.blocks[b].coverage.size());
    for (int k = 0; k < inst.num_services(); ++k) max_rate = std::max(max_rate, inst.rate(b, k));
  }
  const double theta0 = max_rate / static_cast<double>(max_cov);

  std::vector<double> usage(n_units);
  for (int h = 1; h <= params.max_iters; ++h) {
    state.iterations = h;
    const P2Solution p2 = solve_p2(inst, state.lambda);

    std::vector<KnapsackResult> covers(lat.size());
    std::vector<double> lb_costs(lat.size(), 0.0);
    bool uncoverable = false;
    for (size_t i = 0; i < lat.size(); ++i) {
      const double delta = default_knapsack_delta(inst.services[lat[i]].demand_bits);
      covers[i] = solve_p3k(inst, state.lambda, lat[i], delta);
      lb_costs[i] = p3_cost_lower_bound(inst, state.lambda, lat[i], delta);
      if (lb_costs[i] == kInf || !covers[i].covered) uncoverable = true;
    }
    if (uncoverable) {
      state.demand_infeasible = true;
      state.g_best = kInf;
      if (params.keep_g_history) state.g_history.push_back(kInf);
      break;
    }

    const double g = dual_value(inst, state.lambda, p2.value, lb_costs);
    state.g_best = std::min(state.g_best, g);
    if (params.keep_g_history) state.g_history.push_back(g);

    // Combined iterate x^(h); may violate the non-overlap rows by design.
    std::fill(usage.begin(), usage.end(), 0.0);
    int assigned = 0;
    for (int b = 0; b < inst.num_blocks(); ++b) {
      const int k = p2.chosen[b];
      if (k < 0) continue;
      state.u_acc.at(b, k) += 1.0;
      ++assigned;
      for (int u : inst.blocks[b].coverage) usage[u] += 1.0;
    }
    for (size_t i = 0; i < lat.size(); ++i) {
      for (int b : covers[i].blocks) {
        state.u_acc.at(b, lat[i]) += 1.0;
        ++assigned;
        for (int u : inst.blocks[b].coverage) usage[u] += 1.0;
      }
    }

    const double theta = theta0 / std::sqrt(static_cast<double>(h));
    double max_diff = 0.0;
    double s_inf = 0.0;
    for (int i = 0; i < n_units; ++i) {
      const double s = 1.0 - usage[i];
      s_inf = std::max(s_inf, std::abs(s));
      const double next = std::max(0.0, state.lambda[i] - theta * s);
      max_diff = std::max(max_diff, std::abs(next - state.lambda[i]));
      state.lambda[i] = next;
    }
    if (params.on_iteration) params.on_iteration(h, g, s_inf, assigned);
    if (max_diff < params.lambda_stop_tol) break;
  }
  return state;
}

UtilityMatrix ld_utility(const DualState& state) {
  if (state.iterations < 1) {
    throw std::invalid_argument("ld_utility requires at least one subgradient iteration");
  }
  return state.u_acc;
}

}  // namespace flexnr
