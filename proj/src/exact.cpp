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

#include "flexnr/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

#include "flexnr/lp.hpp"

namespace flexnr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Best capacity service per block (ties to the lowest id); -1 when no
/// capacity service has positive rate. Any optimal solution can move a
/// capacity-assigned block to this service without loss, so the search
/// only ever considers it.
std::vector<int> best_capacity_service(const Instance& inst) {
  std::vector<int> best(inst.num_blocks(), -1);
  const std::vector<int> cap = inst.capacity_ids();
  for (int b = 0; b < inst.num_blocks(); ++b) {
    double r_best = 0.0;
    for (int k : cap) {
      const double r = inst.rate(b, k);
      if (r > r_best) {
        r_best = r;
        best[b] = k;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Brute force: exhaustive DFS, branching at the first free basic unit.
// ---------------------------------------------------------------------------

class BruteForce {
 public:
  BruteForce(const Instance& inst, long long max_nodes)
      : inst_(inst), max_nodes_(max_nodes), lat_(inst.latency_ids()) {
    const int nu = inst.grid.num_units();
    const int nb = inst.num_blocks();
    bestcap_ = best_capacity_service(inst);
    triggers_.assign(nu, {});
    ub_unit_.assign(nu, 0.0);
    for (int b = 0; b < nb; ++b) {
      bool useful = bestcap_[b] >= 0;
      for (int k : lat_) useful = useful || inst.rate(b, k) > 0.0;
      if (!useful) continue;
      triggers_[inst.blocks[b].coverage.front()].push_back(b);
      if (bestcap_[b] >= 0) {
        const double density = inst.rate(b, bestcap_[b]) / inst.blocks[b].coverage.size();
        for (int u : inst.blocks[b].coverage) ub_unit_[u] = std::max(ub_unit_[u], density);
      }
    }
    unit_free_.assign(nu, 1);
    residual_.assign(inst.num_services(), 0.0);
    rem_rate_.assign(inst.num_services(), 0.0);
    for (int k : lat_) residual_[k] = inst.services[k].demand_bits;
    for (int b = 0; b < nb; ++b) {
      for (int k : lat_) rem_rate_[k] += inst.rate(b, k);
    }
    for (double u : ub_unit_) free_ub_ += u;
  }

  ExactResult run() {
    const auto t0 = Clock::now();
    dfs(0);
    ExactResult res;
    res.nodes = nodes_;
    res.wall_time_s = seconds_since(t0);
    res.proven = true;
    res.feasible = found_;
    if (found_) {
      res.value = best_obj_;
      res.assignment.pairs = best_pairs_;
      std::sort(res.assignment.pairs.begin(), res.assignment.pairs.end());
      res.assignment.objective = best_obj_;
      res.assignment.feasible = true;
    }
    return res;
  }

 private:
  void dfs(int u) {
    if (++nodes_ > max_nodes_) {
      throw std::runtime_error(
          "brute_force: search tree exceeds the node guard; use branch_and_bound");
    }
    while (u < inst_.grid.num_units() && !unit_free_[u]) ++u;
    if (u == inst_.grid.num_units()) {
      for (int k : lat_) {
        if (residual_[k] > demand_tolerance(inst_.services[k].demand_bits)) return;
      }
      if (!found_ || obj_ > best_obj_) {
        found_ = true;
        best_obj_ = obj_;
        best_pairs_ = pairs_;
      }
      return;
    }
    // Bound and demand-reachability pruning.
    if (found_ && obj_ + free_ub_ <= best_obj_ + 1e-9) return;
    for (int k : lat_) {
      if (residual_[k] > rem_rate_[k] + demand_tolerance(inst_.services[k].demand_bits)) return;
    }

    // Blocks triggered at u never appear deeper in this subtree.
    for (int b : triggers_[u]) {
      for (int k : lat_) rem_rate_[k] -= inst_.rate(b, k);
    }

    for (int b : triggers_[u]) {
      if (!alive(b)) continue;
      if (bestcap_[b] >= 0) try_block(u, b, bestcap_[b]);
      for (int k : lat_) {
        if (inst_.rate(b, k) > 0.0 &&
            residual_[k] > demand_tolerance(inst_.services[k].demand_bits)) {
          try_block(u, b, k);
        }
      }
    }

    // Leave unit u unused.
    unit_free_[u] = 0;
    free_ub_ -= ub_unit_[u];
    dfs(u + 1);
    free_ub_ += ub_unit_[u];
    unit_free_[u] = 1;

    for (int b : triggers_[u]) {
      for (int k : lat_) rem_rate_[k] += inst_.rate(b, k);
    }
  }

  bool alive(int b) const {
    for (int v : inst_.blocks[b].coverage) {
      if (!unit_free_[v]) return false;
    }
    return true;
  }

  void try_block(int u, int b, int k) {
    const double r = inst_.rate(b, k);
    double ub_delta = 0.0;
    for (int v : inst_.blocks[b].coverage) {
      unit_free_[v] = 0;
      ub_delta += ub_unit_[v];
    }
    free_ub_ -= ub_delta;
    const bool capacity = inst_.services[k].cls == ServiceClass::CAPACITY;
    if (capacity) {
      obj_ += r;
    } else {
      residual_[k] -= r;
    }
    pairs_.emplace_back(b, k);

    dfs(u + 1);

    pairs_.pop_back();
    if (capacity) {
      obj_ -= r;
    } else {
      residual_[k] += r;
    }
    free_ub_ += ub_delta;
    for (int v : inst_.blocks[b].coverage) unit_free_[v] = 1;
  }

  const Instance& inst_;
  long long max_nodes_;
  std::vector<int> lat_;
  std::vector<int> bestcap_;
  std::vector<std::vector<int>> triggers_;
  std::vector<double> ub_unit_;
  std::vector<char> unit_free_;
  std::vector<double> residual_, rem_rate_;
  std::vector<std::pair<int, int>> pairs_, best_pairs_;
  double obj_ = 0.0, best_obj_ = 0.0, free_ub_ = 0.0;
  bool found_ = false;
  long long nodes_ = 0;
};

// ---------------------------------------------------------------------------
// Branch and bound.
// ---------------------------------------------------------------------------

/// One binary decision variable of the search: assign `block` to `service`.
/// Capacity columns are pre-merged to the block's best capacity service, and
/// blocks with identical coverage are deduplicated per service (keeping the
/// highest rate); both reductions preserve the optimal value.
struct BnbCol {
  int block;
  int service;
  double rate;
  double obj;
  int demand_idx;  // index into the latency list, -1 for capacity columns
};

class BranchAndBound {
 public:
  BranchAndBound(const Instance& inst, const BnBParams& params)
      : inst_(inst), params_(params), lat_(inst.latency_ids()) {
    build_columns();
    const int nu = inst.grid.num_units();
    unit_free_.assign(nu, 1);
    unit_cols_.assign(nu, {});
    for (size_t c = 0; c < cols_.size(); ++c) {
      for (int u : inst.blocks[cols_[c].block].coverage) unit_cols_[u].push_back(c);
    }
    col_state_.assign(cols_.size(), kFree);
    residual_.resize(lat_.size());
    rem_rate_.assign(lat_.size(), 0.0);
    for (size_t i = 0; i < lat_.size(); ++i) residual_[i] = inst.services[lat_[i]].demand_bits;
    for (const auto& col : cols_) {
      if (col.demand_idx >= 0) rem_rate_[col.demand_idx] += col.rate;
    }
  }

  ExactResult run() {
    t0_ = Clock::now();
    ExactResult res;

    // Warm start: the scalable pipeline provides the initial incumbent.
    Assignment hint;
    if (params_.incumbent_hint.has_value()) {
      hint = *params_.incumbent_hint;
    } else {
      hint = run_pipeline(inst_, SolveMode::LP_PLUS_LD).assignment;
    }
    if (hint.feasible && check_assignment(inst_, hint).feasible) {
      have_incumbent_ = true;
      incumbent_obj_ = hint.objective;
      incumbent_pairs_ = hint.pairs;
    }

    const double open_bound = best_first();

    res.nodes = nodes_;
    res.wall_time_s = seconds_since(t0_);
    res.proven = !timed_out_;
    res.feasible = have_incumbent_;
    if (have_incumbent_) {
      res.value = incumbent_obj_;
      res.assignment.pairs = incumbent_pairs_;
      std::sort(res.assignment.pairs.begin(), res.assignment.pairs.end());
      res.assignment.objective = incumbent_obj_;
      res.assignment.feasible = true;
    }
    if (timed_out_) {
      const double ub = std::max(open_bound, have_incumbent_ ? incumbent_obj_ : 0.0);
      res.bound_gap = std::isfinite(ub) && ub > 0.0 ? (ub - res.value) / ub : 1.0;
    }
    return res;
  }

 private:
  enum ColState : char { kFree = 0, kFixed0 = 1, kFixed1 = 2 };

  void build_columns() {
    const std::vector<int> bestcap = best_capacity_service(inst_);
    std::vector<int> demand_idx_of(inst_.num_services(), -1);
    for (size_t i = 0; i < lat_.size(); ++i) demand_idx_of[lat_[i]] = static_cast<int>(i);

    // Group blocks by coverage rectangle; keep one representative per
    // (coverage, service).
    std::map<std::tuple<int, int, int, int>, std::vector<int>> groups;
    for (int b = 0; b < inst_.num_blocks(); ++b) {
      const Block& blk = inst_.blocks[b];
      groups[{blk.t0, blk.f0, blk.t_span, blk.f_span}].push_back(b);
    }
    for (const auto& [key, members] : groups) {
      (void)key;
      int cap_block = -1;
      double cap_rate = 0.0;
      for (int b : members) {
        if (bestcap[b] >= 0 && inst_.rate(b, bestcap[b]) > cap_rate) {
          cap_rate = inst_.rate(b, bestcap[b]);
          cap_block = b;
        }
      }
      if (cap_block >= 0) {
        cols_.push_back({cap_block, bestcap[cap_block], cap_rate, cap_rate, -1});
      }
      for (int k : lat_) {
        int best_b = -1;
        double best_r = 0.0;
        for (int b : members) {
          if (inst_.rate(b, k) > best_r) {
            best_r = inst_.rate(b, k);
            best_b = b;
          }
        }
        if (best_b >= 0) {
          cols_.push_back({best_b, k, best_r, 0.0, demand_idx_of[k]});
        }
      }
    }
  }

  bool time_up() {
    if (timed_out_) return true;
    if ((nodes_ & 0x3) == 0 && seconds_since(t0_) > params_.time_limit_s) timed_out_ = true;
    return timed_out_;
  }

  struct Trail {
    std::vector<std::pair<int, ColState>> col_changes;
    std::vector<int> freed_units;
    std::vector<std::pair<int, double>> residual_changes;  // (demand idx, delta)
    double obj_delta = 0.0;
    int pairs_added = 0;
  };

  void set_state(Trail& tr, int c, ColState st) {
    tr.col_changes.emplace_back(c, col_state_[c]);
    if (col_state_[c] == kFree && st != kFree && cols_[c].demand_idx >= 0) {
      rem_rate_[cols_[c].demand_idx] -= cols_[c].rate;
    }
    col_state_[c] = st;
  }

  void fix_one(Trail& tr, int c) {
    set_state(tr, c, kFixed1);
    const BnbCol& col = cols_[c];
    if (col.demand_idx >= 0) {
      residual_[col.demand_idx] -= col.rate;
      tr.residual_changes.emplace_back(col.demand_idx, col.rate);
    }
    fixed_obj_ += col.obj;
    tr.obj_delta += col.obj;
    pairs_.emplace_back(col.block, col.service);
    ++tr.pairs_added;
    for (int u : inst_.blocks[col.block].coverage) {
      unit_free_[u] = 0;
      tr.freed_units.push_back(u);
      for (int other : unit_cols_[u]) {
        if (col_state_[other] == kFree) set_state(tr, other, kFixed0);
      }
    }
  }

  void undo(const Trail& tr) {
    for (int i = static_cast<int>(tr.col_changes.size()) - 1; i >= 0; --i) {
      const auto& [c, st] = tr.col_changes[i];
      if (st == kFree && col_state_[c] != kFree && cols_[c].demand_idx >= 0) {
        rem_rate_[cols_[c].demand_idx] += cols_[c].rate;
      }
      col_state_[c] = st;
    }
    for (int u : tr.freed_units) unit_free_[u] = 1;
    for (const auto& [di, delta] : tr.residual_changes) residual_[di] += delta;
    fixed_obj_ -= tr.obj_delta;
    pairs_.resize(pairs_.size() - tr.pairs_added);
  }

  struct OpenNode {
    double bound = 0.0;
    int depth = 0;
    long long seq = 0;
    std::vector<int> fix1, fix0;
  };

  // Max-bound first; deeper nodes and older nodes win ties.
  static bool worse(const OpenNode& a, const OpenNode& b) {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq > b.seq;
  }

  /// Best-first loop. Returns the tightest known upper bound on anything
  /// left unexplored (-inf when the tree is exhausted).
  double best_first() {
    std::vector<OpenNode> heap;
    heap.push_back({std::numeric_limits<double>::infinity(), 0, 0, {}, {}});
    long long seq = 1;

    while (!heap.empty()) {
      if (heap.size() > 400'000) {
        timed_out_ = true;  // treated as "not proven" with an honest bound
        return heap.front().bound;
      }
      if (time_up()) return heap.front().bound;
      std::pop_heap(heap.begin(), heap.end(), worse);
      OpenNode node = std::move(heap.back());
      heap.pop_back();
      ++nodes_;

      const double eps = std::max(1e-9, 1e-7 * std::abs(incumbent_obj_));
      if (have_incumbent_ && node.bound <= incumbent_obj_ + eps) {
        return node.bound;  // the heap is bound-ordered: everything is closed
      }

      Trail tr;
      for (int c : node.fix1) fix_one(tr, c);
      for (int c : node.fix0) {
        if (col_state_[c] == kFree) set_state(tr, c, kFixed0);
      }
      // Plunge: keep following the x=1 child, queueing each x=0 sibling, so
      // deep incumbents appear early while the heap keeps the global bound.
      for (int dive = 0; ; ++dive) {
        double child_bound = 0.0;
        int branch_col = -1;
        if (!process_node(node.bound, &child_bound, &branch_col)) break;
        OpenNode zero;
        zero.bound = child_bound;
        zero.depth = node.depth + 1;
        zero.seq = seq++;
        zero.fix1 = node.fix1;
        zero.fix0 = node.fix0;
        zero.fix0.push_back(branch_col);
        heap.push_back(std::move(zero));
        std::push_heap(heap.begin(), heap.end(), worse);
        if (dive >= 64 || time_up()) {
          OpenNode one;
          one.bound = child_bound;
          one.depth = node.depth + 1;
          one.seq = seq++;
          one.fix1 = node.fix1;
          one.fix1.push_back(branch_col);
          one.fix0 = node.fix0;
          heap.push_back(std::move(one));
          std::push_heap(heap.begin(), heap.end(), worse);
          break;
        }
        fix_one(tr, branch_col);
        node.fix1.push_back(branch_col);
        node.depth += 1;
        ++nodes_;
      }
      undo(tr);
    }
    return -std::numeric_limits<double>::infinity();
  }

  /// One evaluation of the node's Lagrangian dual at multipliers lambda:
  /// unit rows are priced into the objective, the capacity part solves in
  /// closed form and each residual demand is covered by an integral min-cost
  /// knapsack over ceiled weights (a valid lower bound on the cover cost).
  /// Valid upper bound for any lambda >= 0. `usage` collects the relaxed
  /// argmax's unit usage for subgradient steps.
  double eval_node_dual(const std::vector<int>& lp_cols,
                        const std::vector<double>& lambda_by_unit,
                        const std::vector<int>& active_demand,
                        const std::vector<double>& active_residual,
                        std::vector<double>* usage) {
    const size_t n_active = active_residual.size();
    double g = fixed_obj_;
    for (double l : lambda_by_unit) g += l;
    if (usage) usage->assign(lambda_by_unit.size(), 0.0);

    std::vector<std::vector<long long>> weights(n_active);
    std::vector<std::vector<double>> costs(n_active);
    std::vector<std::vector<int>> members(n_active);
    std::vector<double> deltas(n_active, 1.0);
    for (size_t i = 0; i < n_active; ++i) {
      deltas[i] = std::max(1.0, active_residual[i] / 10000.0);
    }
    for (int c : lp_cols) {
      const BnbCol& col = cols_[c];
      double alpha = 0.0;
      for (int u : inst_.blocks[col.block].coverage) alpha += lambda_by_unit[u];
      if (col.demand_idx < 0) {
        if (col.obj - alpha > 0.0) {
          g += col.obj - alpha;
          if (usage) {
            for (int u : inst_.blocks[col.block].coverage) (*usage)[u] += 1.0;
          }
        }
      } else {
        const int di = active_demand[col.demand_idx];
        weights[di].push_back(
            static_cast<long long>(std::ceil(col.rate / deltas[di] - 1e-12)));
        costs[di].push_back(alpha);
        members[di].push_back(c);
      }
    }
    for (size_t i = 0; i < n_active; ++i) {
      const long long target =
          static_cast<long long>(std::ceil(active_residual[i] / deltas[i] - 1e-9));
      std::vector<int> chosen;
      const double cover =
          min_cost_cover_dp(weights[i], costs[i], target, usage ? &chosen : nullptr);
      if (cover == std::numeric_limits<double>::infinity()) {
        return -std::numeric_limits<double>::infinity();  // node infeasible
      }
      g -= cover;
      if (usage) {
        for (int pos : chosen) {
          for (int u : inst_.blocks[cols_[members[i][pos]].block].coverage) {
            (*usage)[u] += 1.0;
          }
        }
      }
    }
    return g;
  }

  /// Best Lagrangian bound from the LP duals plus a short projected
  /// subgradient descent (diminishing steps); stops early once the bound
  /// closes on the incumbent.
  double lagrangian_node_bound(const std::vector<int>& lp_cols,
                               std::vector<double> lambda,
                               const std::vector<int>& active_demand,
                               const std::vector<double>& active_residual) {
    std::vector<double> usage;
    double best = eval_node_dual(lp_cols, lambda, active_demand, active_residual, &usage);
    if (best == -std::numeric_limits<double>::infinity()) return best;
    const double closed = incumbent_obj_ + std::max(1e-9, 1e-7 * std::abs(incumbent_obj_));
    if (have_incumbent_ && best <= closed) return best;

    // Step scale from the current gap against the subgradient magnitude.
    const int max_steps = 25;
    for (int h = 1; h <= max_steps; ++h) {
      double s_norm1 = 0.0;
      for (size_t u = 0; u < lambda.size(); ++u) {
        const bool priced = usage.size() == lambda.size();
        if (!priced) break;
        s_norm1 += std::abs(1.0 - usage[u]);
      }
      if (s_norm1 < 1e-12) break;
      const double gap = have_incumbent_ ? std::max(best - incumbent_obj_, 1e-6) : best * 0.01;
      const double theta = gap / s_norm1 / std::sqrt(static_cast<double>(h));
      for (size_t u = 0; u < lambda.size(); ++u) {
        lambda[u] = std::max(0.0, lambda[u] - theta * (1.0 - usage[u]));
      }
      const double g =
          eval_node_dual(lp_cols, lambda, active_demand, active_residual, &usage);
      if (g == -std::numeric_limits<double>::infinity()) return g;
      best = std::min(best, g);
      if (have_incumbent_ && best <= closed) break;
    }
    return best;
  }

  /// 0/1 min-cost covering DP with the accumulated weight capped at target;
  /// optionally backtracks the chosen item positions.
  static double min_cost_cover_dp(const std::vector<long long>& w,
                                  const std::vector<double>& cost, long long target,
                                  std::vector<int>* chosen) {
    if (target <= 0) {
      if (chosen) chosen->clear();
      return 0.0;
    }
    const size_t states = static_cast<size_t>(target) + 1;
    std::vector<double> dp(states, std::numeric_limits<double>::infinity());
    dp[0] = 0.0;
    std::vector<uint32_t> prev;
    if (chosen) prev.assign(w.size() * states, 0xFFFFFFFFu);
    for (size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0) continue;
      for (long long v = target - 1; v >= 0; --v) {
        if (dp[v] == std::numeric_limits<double>::infinity()) continue;
        const long long nv = std::min(target, v + w[i]);
        const double cand = dp[v] + cost[i];
        if (cand < dp[nv]) {
          dp[nv] = cand;
          if (chosen) prev[i * states + nv] = static_cast<uint32_t>(v);
        }
      }
    }
    if (dp[target] == std::numeric_limits<double>::infinity()) return dp[target];
    if (chosen) {
      chosen->clear();
      long long v = target;
      for (size_t i = w.size(); i-- > 0;) {
        const uint32_t p = prev[i * states + v];
        if (p != 0xFFFFFFFFu) {
          chosen->push_back(static_cast<int>(i));
          v = p;
        }
      }
    }
    return dp[target];
  }

  /// Evaluates the current (already applied) node. Returns true when the
  /// node must be branched, filling the child bound and branching column.
  bool process_node(double parent_bound, double* child_bound, int* branch_col_out) {
    // Reachability: residual demand must be coverable by free columns.
    for (size_t i = 0; i < lat_.size(); ++i) {
      if (residual_[i] > rem_rate_[i] + demand_tolerance(inst_.services[lat_[i]].demand_bits)) {
        return false;
      }
    }

    // Node LP over free columns and free units. Besides the demand rows, each
    // active latency service gets a valid minimum-block-count row
    //   sum_b x[b][k] >= (smallest n with top-n free rates summing to the
    //   residual), which prices in that demands consume whole blocks.
    LinearProgram lp;
    lp.num_services = inst_.num_services();
    std::vector<int> active_demand(lat_.size(), -1);
    std::vector<std::vector<double>> free_rates(lat_.size());
    int n_active = 0;
    for (size_t i = 0; i < lat_.size(); ++i) {
      if (residual_[i] > demand_tolerance(inst_.services[lat_[i]].demand_bits)) {
        active_demand[i] = n_active++;
      }
    }
    for (size_t c = 0; c < cols_.size(); ++c) {
      if (col_state_[c] != kFree || cols_[c].demand_idx < 0) continue;
      if (active_demand[cols_[c].demand_idx] < 0) continue;
      free_rates[cols_[c].demand_idx].push_back(cols_[c].rate);
    }
    int nrows = 2 * n_active;  // demand row + count row per active service
    lp.num_demand_rows = nrows;
    std::vector<int> unit_row(inst_.grid.num_units(), -1);
    std::vector<int> lp_cols;
    for (size_t c = 0; c < cols_.size(); ++c) {
      if (col_state_[c] != kFree) continue;
      if (cols_[c].demand_idx >= 0 && active_demand[cols_[c].demand_idx] < 0) continue;
      lp_cols.push_back(static_cast<int>(c));
      for (int u : inst_.blocks[cols_[c].block].coverage) {
        if (unit_row[u] < 0) unit_row[u] = nrows++;
      }
    }
    lp.num_unit_rows = nrows - lp.num_demand_rows;
    lp.rhs.assign(nrows, 1.0);
    for (size_t i = 0; i < lat_.size(); ++i) {
      if (active_demand[i] < 0) continue;
      lp.rhs[active_demand[i]] = residual_[i];
      auto& rates = free_rates[i];
      std::sort(rates.begin(), rates.end(), std::greater<>());
      double acc = 0.0;
      int count = 0;
      for (double r : rates) {
        if (acc >= residual_[i] - demand_tolerance(residual_[i])) break;
        acc += r;
        ++count;
      }
      lp.rhs[n_active + active_demand[i]] = std::max(1, count);
    }
    for (int c : lp_cols) {
      LinearProgram::Column col;
      col.block = cols_[c].block;
      col.service = cols_[c].service;
      col.obj = cols_[c].obj;
      if (cols_[c].demand_idx >= 0) {
        col.entries.emplace_back(active_demand[cols_[c].demand_idx], cols_[c].rate);
        col.entries.emplace_back(n_active + active_demand[cols_[c].demand_idx], 1.0);
      }
      for (int u : inst_.blocks[cols_[c].block].coverage) {
        col.entries.emplace_back(unit_row[u], 1.0);
      }
      lp.cols.push_back(std::move(col));
    }

    // Stalled node relaxations are cut off early; the parent bound stays valid.
    const LPSolution sol = solve_lp(lp, 1e-7, 20000);
    if (sol.status == LPStatus::INFEASIBLE) return false;

    int branch_col = -1;
    double bound = std::numeric_limits<double>::infinity();
    if (sol.status == LPStatus::OPTIMAL) {
      bound = fixed_obj_ + sol.objective;
      const double eps = std::max(1e-9, 1e-7 * std::abs(incumbent_obj_));
      if (have_incumbent_ && bound <= incumbent_obj_ + eps) return false;

      // Tighten with the Lagrangian dual at the LP's unit prices: the
      // integral knapsack covers price whole-block demand consumption that
      // the LP relaxation smooths over.
      std::vector<double> lambda(inst_.grid.num_units(), 0.0);
      for (int u = 0; u < inst_.grid.num_units(); ++u) {
        if (unit_row[u] >= 0) lambda[u] = std::max(0.0, sol.row_duals[unit_row[u]]);
      }
      std::vector<double> active_residual(n_active, 0.0);
      for (size_t i = 0; i < lat_.size(); ++i) {
        if (active_demand[i] >= 0) active_residual[active_demand[i]] = residual_[i];
      }
      const double g = lagrangian_node_bound(lp_cols, lambda, active_demand, active_residual);
      if (g == -std::numeric_limits<double>::infinity()) return false;
      bound = std::min(bound, g);
      if (have_incumbent_ && bound <= incumbent_obj_ + eps) return false;
      try_rounding(lp_cols, sol);
      if (have_incumbent_ && bound <= incumbent_obj_ + eps) return false;

      // Fractional variable closest to 1/2.
      double best_dist = 0.5 - 1e-6;
      for (size_t j = 0; j < lp_cols.size(); ++j) {
        const double dist = std::abs(sol.x[j] - 0.5);
        if (dist < best_dist) {
          best_dist = dist;
          branch_col = lp_cols[j];
        }
      }
      if (branch_col < 0) {
        // Integral optimum: verify exactly, then close the node.
        if (try_incumbent(lp_cols, sol)) return false;
        for (size_t j = 0; j < lp_cols.size(); ++j) {
          if (sol.x[j] > 0.5) {
            branch_col = lp_cols[j];
            break;
          }
        }
        if (branch_col < 0) return false;  // all-zero node, nothing to explore
      }
    } else {
      // Iteration limit: inherit the parent's bound (still valid) and branch
      // on the first free column.
      std::fprintf(stderr, "bnb: node LP iteration limit (rows=%d cols=%zu iters=%lld)\n",
                   lp.num_rows(), lp.cols.size(), sol.iterations);
      bound = parent_bound;
      if (!lp_cols.empty()) branch_col = lp_cols.front();
      if (branch_col < 0) return false;
    }

    *child_bound = bound;
    *branch_col_out = branch_col;
    return true;
  }

  /// BA-style rounding of a fractional node solution: admit columns by
  /// descending x (then rate), skipping conflicts; capacity columns with
  /// x = 0 still fill leftover units. Updates the incumbent when the rounded
  /// assignment covers every residual demand.
  void try_rounding(const std::vector<int>& lp_cols, const LPSolution& sol) {
    std::vector<int> order(lp_cols.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (sol.x[a] != sol.x[b]) return sol.x[a] > sol.x[b];
      if (cols_[lp_cols[a]].rate != cols_[lp_cols[b]].rate) {
        return cols_[lp_cols[a]].rate > cols_[lp_cols[b]].rate;
      }
      return lp_cols[a] < lp_cols[b];
    });
    std::vector<char> used(inst_.grid.num_units(), 0);
    std::vector<double> res = residual_;
    double obj = fixed_obj_;
    std::vector<std::pair<int, int>> extra;
    for (int oi : order) {
      const BnbCol& col = cols_[lp_cols[oi]];
      if (col.demand_idx >= 0 &&
          res[col.demand_idx] <= demand_tolerance(inst_.services[col.service].demand_bits)) {
        continue;  // demand already met, do not waste the block
      }
      bool clash = false;
      for (int u : inst_.blocks[col.block].coverage) {
        if (used[u]) {
          clash = true;
          break;
        }
      }
      if (clash) continue;
      for (int u : inst_.blocks[col.block].coverage) used[u] = 1;
      extra.emplace_back(col.block, col.service);
      obj += col.obj;
      if (col.demand_idx >= 0) res[col.demand_idx] -= col.rate;
    }
    for (size_t i = 0; i < lat_.size(); ++i) {
      if (res[i] > demand_tolerance(inst_.services[lat_[i]].demand_bits)) return;
    }
    if (!have_incumbent_ || obj > incumbent_obj_) {
      have_incumbent_ = true;
      incumbent_obj_ = obj;
      incumbent_pairs_ = pairs_;
      incumbent_pairs_.insert(incumbent_pairs_.end(), extra.begin(), extra.end());
    }
  }

  bool try_incumbent(const std::vector<int>& lp_cols, const LPSolution& sol) {
    std::vector<std::pair<int, int>> cand = pairs_;
    double obj = fixed_obj_;
    std::vector<double> res = residual_;
    for (size_t j = 0; j < lp_cols.size(); ++j) {
      if (sol.x[j] > 0.5) {
        const BnbCol& col = cols_[lp_cols[j]];
        cand.emplace_back(col.block, col.service);
        obj += col.obj;
        if (col.demand_idx >= 0) res[col.demand_idx] -= col.rate;
      }
    }
    for (size_t i = 0; i < lat_.size(); ++i) {
      if (res[i] > demand_tolerance(inst_.services[lat_[i]].demand_bits)) return false;
    }
    if (!have_incumbent_ || obj > incumbent_obj_) {
      have_incumbent_ = true;
      incumbent_obj_ = obj;
      incumbent_pairs_ = cand;
    }
    return true;
  }

  const Instance& inst_;
  BnBParams params_;
  std::vector<int> lat_;
  std::vector<BnbCol> cols_;
  std::vector<std::vector<int>> unit_cols_;
  std::vector<char> unit_free_;
  std::vector<ColState> col_state_;
  std::vector<double> residual_, rem_rate_;
  std::vector<std::pair<int, int>> pairs_, incumbent_pairs_;
  double fixed_obj_ = 0.0, incumbent_obj_ = 0.0;
  bool have_incumbent_ = false, timed_out_ = false;
  long long nodes_ = 0;
  Clock::time_point t0_;
};

}  // namespace

ExactResult brute_force(const Instance& inst, const BruteForceLimits& limits) {
  BruteForce bf(inst, limits.max_nodes);
  return bf.run();
}

ExactResult branch_and_bound(const Instance& inst, const BnBParams& params) {
  BranchAndBound bnb(inst, params);
  return bnb.run();
}

double optimality_gap(double heuristic_value, double exact_value) {
  if (heuristic_value > exact_value + 1e-6) {
    throw std::logic_error("heuristic exceeds the exact optimum: bound violation");
  }
  if (exact_value <= 0.0) return 0.0;
  return std::max(0.0, (exact_value - heuristic_value) / exact_value);
}

}  // namespace flexnr
