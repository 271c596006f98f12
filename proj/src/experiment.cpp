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

#include "flexnr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace flexnr {

std::string shape_token(const NumerologyShape& s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%gms-%gkHz", s.tti_ms, s.scs_khz);
  return buf;
}

ExperimentMode parse_experiment_mode(const std::string& token,
                                     const std::vector<NumerologyShape>& shapes) {
  ExperimentMode m;
  m.label = token;
  if (token == "exact") {
    m.kind = ExperimentMode::Kind::EXACT;
    return m;
  }
  if (token.rfind("fixed:", 0) == 0) {
    m.kind = ExperimentMode::Kind::FIXED;
    const std::string name = token.substr(6);
    for (size_t i = 0; i < shapes.size(); ++i) {
      if (shapes[i].id == name || shape_token(shapes[i]) == name) {
        m.fixed_shape_index = static_cast<int>(i);
        return m;
      }
    }
    throw std::invalid_argument("no enabled shape matches '" + name + "'");
  }
  m.kind = ExperimentMode::Kind::PIPELINE;
  m.pipeline_mode = parse_solve_mode(token);
  return m;
}

namespace {

double rate_kbps_of(const Instance& inst, double objective_bits) {
  const int ncap = static_cast<int>(inst.capacity_ids().size());
  if (ncap == 0) return 0.0;
  return objective_bits / inst.horizon_ms() / ncap;  // bits/ms = kbps
}

struct TaskResult {
  std::vector<RunRow> rows;
};

void run_grid_point(const SimParams& base, const std::string& sweep, double value, uint64_t seed,
                    const ExperimentOptions& opts, TaskResult& out) {
  SimParams p = base;
  if (sweep == "tau") {
    p.tau_ms = value;
  } else if (sweep == "demand") {
    p.demand_kbps = value;
  } else {
    throw std::invalid_argument("sweep must be 'tau' or 'demand'");
  }
  const Instance inst = random_instance(p, seed);

  // Pipeline arms first; the best feasible one warm-starts the exact solver.
  std::vector<RunRow> rows;
  Assignment best_heuristic;
  bool have_heuristic = false;
  std::vector<double> heuristic_obj(opts.modes.size(), -1.0);

  for (size_t mi = 0; mi < opts.modes.size(); ++mi) {
    const ExperimentMode& mode = opts.modes[mi];
    RunRow row;
    row.sweep = sweep;
    row.value = value;
    row.seed = seed;
    row.mode = mode.label;
    try {
      switch (mode.kind) {
        case ExperimentMode::Kind::PIPELINE: {
          const PipelineResult res = run_pipeline(inst, mode.pipeline_mode, opts.pipeline);
          row.status = res.assignment.feasible ? "feasible" : "unmet";
          row.objective_bits = res.assignment.objective;
          row.rate_kbps = rate_kbps_of(inst, res.assignment.objective);
          if (res.assignment.feasible) {
            heuristic_obj[mi] = res.assignment.objective;
            if (!have_heuristic || assignment_better(res.assignment, best_heuristic)) {
              best_heuristic = res.assignment;
              have_heuristic = true;
            }
          }
          break;
        }
        case ExperimentMode::Kind::EXACT: {
          BnBParams bp;
          bp.time_limit_s = opts.exact_time_limit_s;
          if (have_heuristic) bp.incumbent_hint = best_heuristic;
          const ExactResult res = branch_and_bound(inst, bp);
          row.status = res.feasible ? "feasible" : "unmet";
          row.objective_bits = res.value;
          row.rate_kbps = rate_kbps_of(inst, res.value);
          row.has_exact_fields = true;
          row.proven = res.proven;
          row.nodes = res.nodes;
          if (res.feasible) {
            row.has_gap = true;
            row.gap = 0.0;
          }
          break;
        }
        case ExperimentMode::Kind::FIXED: {
          const Instance restricted = restrict_to_shape(inst, mode.fixed_shape_index);
          BnBParams bp;
          bp.time_limit_s = opts.exact_time_limit_s;
          const ExactResult res = branch_and_bound(restricted, bp);
          row.status = res.feasible ? "feasible" : "unmet";
          row.objective_bits = res.value;
          row.rate_kbps = rate_kbps_of(restricted, res.value);
          row.has_exact_fields = true;
          row.proven = res.proven;
          row.nodes = res.nodes;
          break;
        }
      }
    } catch (const std::exception& e) {
      row.status = "error";
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }

  // Gaps of the heuristic arms against the exact arm of this grid point.
  const RunRow* exact_row = nullptr;
  for (size_t mi = 0; mi < opts.modes.size(); ++mi) {
    if (opts.modes[mi].kind == ExperimentMode::Kind::EXACT && rows[mi].status == "feasible") {
      exact_row = &rows[mi];
      break;
    }
  }
  if (exact_row != nullptr) {
    for (size_t mi = 0; mi < opts.modes.size(); ++mi) {
      if (opts.modes[mi].kind != ExperimentMode::Kind::PIPELINE) continue;
      if (rows[mi].status != "feasible") continue;
      rows[mi].has_gap = true;
      rows[mi].gap = optimality_gap(rows[mi].objective_bits, exact_row->objective_bits);
    }
  }
  out.rows = std::move(rows);
}

}  // namespace

std::vector<RunRow> run_experiment(const SimParams& base, const std::string& sweep,
                                   const std::vector<double>& values,
                                   const std::vector<uint64_t>& seeds,
                                   const ExperimentOptions& opts) {
  struct Task {
    double value;
    uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double v : values) {
    for (uint64_t s : seeds) tasks.push_back({v, s});
  }
  std::vector<TaskResult> results(tasks.size());

  const int nthreads = std::max(1, std::min<int>(opts.threads, static_cast<int>(tasks.size())));
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      run_grid_point(base, sweep, tasks[i].value, tasks[i].seed, opts, results[i]);
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<RunRow> rows;
  for (const auto& r : results) {
    for (const auto& row : r.rows) rows.push_back(row);
  }
  return rows;
}

double mean_rate_kbps(const std::vector<RunRow>& rows, double value, const std::string& mode) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.value != value || r.mode != mode) continue;
    sum += r.status == "feasible" ? r.rate_kbps : 0.0;
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

bool mean_gap(const std::vector<RunRow>& rows, double value, const std::string& mode, double* out) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.value != value || r.mode != mode || !r.has_gap) continue;
    sum += r.gap;
    ++n;
  }
  if (n == 0) return false;
  *out = sum / n;
  return true;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

}  // namespace

void write_experiment_csv(const std::vector<RunRow>& rows, std::ostream& os) {
  os << "sweep,value,seed,mode,status,objective_bits,rate_kbps,gap,proven,nodes,note\n";
  for (const auto& r : rows) {
    os << r.sweep << "," << fmt(r.value) << "," << r.seed << "," << r.mode << "," << r.status << ","
       << fmt(r.objective_bits) << "," << fmt(r.rate_kbps) << ","
       << (r.has_gap ? fmt(r.gap) : std::string()) << ","
       << (r.has_exact_fields ? (r.proven ? "1" : "0") : std::string()) << ","
       << (r.has_exact_fields ? std::to_string(r.nodes) : std::string()) << "," << r.note << "\n";
  }
  // Aggregation rows, in first-appearance order of (value, mode).
  std::vector<std::pair<double, std::string>> groups;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.value, r.mode);
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  for (const auto& [value, mode] : groups) {
    const RunRow* any = nullptr;
    for (const auto& r : rows) {
      if (r.value == value && r.mode == mode) {
        any = &r;
        break;
      }
    }
    double g = 0.0;
    const bool has_g = mean_gap(rows, value, mode, &g);
    os << any->sweep << "," << fmt(value) << ",mean," << mode << ",aggregate,,"
       << fmt(mean_rate_kbps(rows, value, mode)) << "," << (has_g ? fmt(g) : std::string())
       << ",,,\n";
  }
}

}  // namespace flexnr
