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

#include "flexnr/assign.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flexnr/lp.hpp"

namespace flexnr {

namespace {

struct Candidate {
  double u;
  double r;
  int block;
  int service;
};

// Selection order everywhere: utility desc, rate desc, block asc, service asc.
bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.u != b.u) return a.u > b.u;
  if (a.r != b.r) return a.r > b.r;
  if (a.block != b.block) return a.block < b.block;
  return a.service < b.service;
}

class GreedyState {
 public:
  explicit GreedyState(const Instance& inst)
      : inst_(inst),
        unit_used_(inst.grid.num_units(), 0),
        block_gone_(inst.num_blocks(), 0),
        delivered_(inst.num_services(), 0.0) {}

  bool block_free(int b) const {
    if (block_gone_[b]) return false;
    for (int u : inst_.blocks[b].coverage) {
      if (unit_used_[u]) return false;
    }
    return true;
  }

  void admit(int b, int k) {
    block_gone_[b] = 1;
    for (int u : inst_.blocks[b].coverage) unit_used_[u] = 1;
    delivered_[k] += inst_.rate(b, k);
    pairs_.emplace_back(b, k);
  }

  double delivered(int k) const { return delivered_[k]; }
  std::vector<std::pair<int, int>>& pairs() { return pairs_; }

 private:
  const Instance& inst_;
  std::vector<char> unit_used_;
  std::vector<char> block_gone_;
  std::vector<double> delivered_;
  std::vector<std::pair<int, int>> pairs_;
};

}  // namespace

SeedSet seed_from_lp(const Instance& inst, const UtilityMatrix& lp_u, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in (0, 1]");
  lp_u.check_dims(inst);

  std::vector<Candidate> cands;
  for (int b = 0; b < inst.num_blocks(); ++b) {
    for (int k = 0; k < inst.num_services(); ++k) {
      const double u = lp_u.at(b, k);
      if (u >= rho) cands.push_back({u, 0.0, b, k});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.u != b.u) return a.u > b.u;
    if (a.block != b.block) return a.block < b.block;
    return a.service < b.service;
  });

  SeedSet seed;
  std::vector<char> unit_used(inst.grid.num_units(), 0);
  std::vector<char> block_used(inst.num_blocks(), 0);
  for (const auto& c : cands) {
    if (block_used[c.block]) continue;
    bool clash = false;
    for (int u : inst.blocks[c.block].coverage) {
      if (unit_used[u]) {
        clash = true;
        break;
      }
    }
    if (clash) continue;
    block_used[c.block] = 1;
    for (int u : inst.blocks[c.block].coverage) unit_used[u] = 1;
    seed.pairs.emplace_back(c.block, c.service);
  }
  return seed;
}

Assignment ba(const Instance& inst, const SeedSet& seed, const UtilityMatrix& u) {
  u.check_dims(inst);
  GreedyState state(inst);

  // Admit the seed; it must be conflict-free by construction.
  for (const auto& [b, k] : seed.pairs) {
    if (b < 0 || b >= inst.num_blocks() || k < 0 || k >= inst.num_services()) {
      throw std::invalid_argument("seed pair refers to unknown ids");
    }
    if (!state.block_free(b)) throw std::invalid_argument("seed set violates non-overlap");
    state.admit(b, k);
  }

  std::vector<char> retired(inst.num_services(), 0);
  int active_latency = 0;
  for (const auto& s : inst.services) {
    if (s.cls != ServiceClass::LATENCY) continue;
    if (state.delivered(s.id) >= s.demand_bits - demand_tolerance(s.demand_bits)) {
      retired[s.id] = 1;
    } else {
      ++active_latency;
    }
  }

  // Phase 1: latency services, positive utility and positive rate only.
  std::vector<Candidate> phase1;
  for (int b = 0; b < inst.num_blocks(); ++b) {
    for (const auto& s : inst.services) {
      if (s.cls != ServiceClass::LATENCY) continue;
      const double uu = u.at(b, s.id);
      const double r = inst.rate(b, s.id);
      if (uu > 0.0 && r > 0.0) phase1.push_back({uu, r, b, s.id});
    }
  }
  std::sort(phase1.begin(), phase1.end(), candidate_before);

  for (const auto& c : phase1) {
    if (active_latency == 0) break;
    if (retired[c.service] || !state.block_free(c.block)) continue;
    state.admit(c.block, c.service);
    const Service& s = inst.services[c.service];
    if (state.delivered(s.id) >= s.demand_bits - demand_tolerance(s.demand_bits)) {
      retired[s.id] = 1;
      --active_latency;
    }
  }

  // Phase 2: capacity services; zero-utility pairs trail, ordered by rate.
  std::vector<Candidate> phase2;
  for (int b = 0; b < inst.num_blocks(); ++b) {
    for (const auto& s : inst.services) {
      if (s.cls != ServiceClass::CAPACITY) continue;
      const double uu = u.at(b, s.id);
      const double r = inst.rate(b, s.id);
      if (uu > 0.0 || r > 0.0) phase2.push_back({uu, r, b, s.id});
    }
  }
  std::sort(phase2.begin(), phase2.end(), candidate_before);
  for (const auto& c : phase2) {
    if (!state.block_free(c.block)) continue;
    state.admit(c.block, c.service);
  }

  Assignment out;
  out.pairs = std::move(state.pairs());
  std::sort(out.pairs.begin(), out.pairs.end());
  for (const auto& [b, k] : out.pairs) {
    if (inst.services[k].cls == ServiceClass::CAPACITY) out.objective += inst.rate(b, k);
  }
  for (const auto& s : inst.services) {
    if (s.cls != ServiceClass::LATENCY) continue;
    if (state.delivered(s.id) < s.demand_bits - demand_tolerance(s.demand_bits)) {
      out.unmet.push_back(s.id);
    }
  }
  out.feasible = out.unmet.empty();
  return out;
}

SolveMode parse_solve_mode(const std::string& s) {
  if (s == "rate") return SolveMode::RATE;
  if (s == "lp") return SolveMode::LP;
  if (s == "ld") return SolveMode::LD;
  if (s == "lp+ld") return SolveMode::LP_PLUS_LD;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

std::string to_string(SolveMode m) {
  switch (m) {
    case SolveMode::RATE: return "rate";
    case SolveMode::LP: return "lp";
    case SolveMode::LD: return "ld";
    case SolveMode::LP_PLUS_LD: return "lp+ld";
  }
  return "?";
}

std::vector<double> PipelineParams::default_rho_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  return grid;
}

bool assignment_better(const Assignment& a, const Assignment& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.objective != b.objective) return a.objective > b.objective;
  return a.pairs.size() < b.pairs.size();
}

namespace {

Assignment empty_unmet(const Instance& inst) {
  Assignment a;
  for (const auto& s : inst.services) {
    if (s.cls == ServiceClass::LATENCY && s.demand_bits > 0.0) a.unmet.push_back(s.id);
  }
  a.feasible = a.unmet.empty();
  return a;
}

PipelineResult run_lp_arm(const Instance& inst, const std::vector<double>& rho_grid) {
  PipelineResult res;
  res.diag.mode = SolveMode::LP;
  const LinearProgram lp = build_lp(inst);
  const LPSolution sol = solve_lp(lp);
  if (sol.status != LPStatus::OPTIMAL) {
    res.diag.lp_skipped = true;
    res.assignment = empty_unmet(inst);
    return res;
  }
  const UtilityMatrix u = lp_utility(inst, lp, sol);
  bool have = false;
  for (double rho : rho_grid) {
    Assignment cand = ba(inst, seed_from_lp(inst, u, rho), u);
    if (!have || assignment_better(cand, res.assignment)) {
      res.assignment = std::move(cand);
      res.diag.rho_selected = rho;
      have = true;
    }
  }
  return res;
}

PipelineResult run_ld_arm(const Instance& inst, const SubgradientParams& sparams) {
  PipelineResult res;
  res.diag.mode = SolveMode::LD;
  const DualState state = subgradient_run(inst, sparams);
  res.diag.subgradient_iterations = state.iterations;
  res.assignment = ba(inst, SeedSet{}, ld_utility(state));
  return res;
}

}  // namespace

PipelineResult run_pipeline(const Instance& inst, SolveMode mode, const PipelineParams& params) {
  const std::vector<double> rho_grid =
      params.rho_grid.empty() ? PipelineParams::default_rho_grid() : params.rho_grid;

  switch (mode) {
    case SolveMode::RATE: {
      PipelineResult res;
      res.diag.mode = SolveMode::RATE;
      res.assignment = ba(inst, SeedSet{}, rate_utility(inst));
      return res;
    }
    case SolveMode::LP:
      return run_lp_arm(inst, rho_grid);
    case SolveMode::LD:
      return run_ld_arm(inst, params.subgradient);
    case SolveMode::LP_PLUS_LD: {
      PipelineResult lp_arm = run_lp_arm(inst, rho_grid);
      PipelineResult ld_arm = run_ld_arm(inst, params.subgradient);
      PipelineResult res;
      res.diag.mode = SolveMode::LP_PLUS_LD;
      res.diag.rho_selected = lp_arm.diag.rho_selected;
      res.diag.subgradient_iterations = ld_arm.diag.subgradient_iterations;
      res.diag.lp_skipped = lp_arm.diag.lp_skipped;
      // The LD arm replaces the LP arm only when strictly better.
      if (!lp_arm.diag.lp_skipped && !assignment_better(ld_arm.assignment, lp_arm.assignment)) {
        res.assignment = std::move(lp_arm.assignment);
        res.diag.winner = "lp";
      } else {
        res.assignment = std::move(ld_arm.assignment);
        res.diag.winner = "ld";
      }
      return res;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace flexnr
