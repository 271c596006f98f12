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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flexnr/experiment.hpp"
#include "flexnr/json_io.hpp"
#include "flexnr/lp.hpp"

namespace {

using namespace flexnr;

// Exit codes: 0 feasible, 1 error, 2 demand unmet / infeasible.
constexpr int kExitFeasible = 0;
constexpr int kExitError = 1;
constexpr int kExitUnmet = 2;

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

SimParams params_from_config(const std::string& config_path) {
  if (config_path.empty()) {
    SimParams p;
    p.derive_units();
    return p;
  }
  return load_sim_params(config_path);
}

int cmd_generate(const std::string& config_path, uint64_t seed, const std::string& out_path) {
  const SimParams params = params_from_config(config_path);
  const Instance inst = random_instance(params, seed);
  save_instance(inst, out_path);

  int n_lat = 0, n_cap = 0;
  for (const auto& s : inst.services) {
    (s.cls == ServiceClass::LATENCY ? n_lat : n_cap)++;
  }
  std::printf("|B|=%d |I|=%d |K_l|=%d |K_c|=%d\n", inst.num_blocks(), inst.grid.num_units(),
              n_lat, n_cap);
  for (const auto& s : inst.services) {
    if (s.cls != ServiceClass::LATENCY) continue;
    bool any = false;
    for (int b = 0; b < inst.num_blocks() && !any; ++b) any = inst.rate(b, s.id) > 0.0;
    if (!any) {
      std::fprintf(stderr,
                   "warning: all rates masked for latency service %d (deadline %g ms); "
                   "no enabled shape ends in time\n",
                   s.id, s.latency_ms);
    }
  }
  return kExitFeasible;
}

int cmd_solve(const std::string& instance_path, const std::string& mode_str,
              double time_limit_s, const std::string& rho_grid_csv, int max_subgradient_iters,
              const std::string& out_path, const std::string& trace_path,
              const std::string& mps_path) {
  const Instance inst = load_instance(instance_path);

  std::ofstream trace;
  PipelineParams pparams;
  pparams.subgradient.max_iters = max_subgradient_iters;
  if (!rho_grid_csv.empty()) pparams.rho_grid = parse_double_list(rho_grid_csv);
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw std::runtime_error("cannot open trace file '" + trace_path + "'");
    trace << "h,g,s_inf,assigned\n";
    pparams.subgradient.on_iteration = [&trace](int h, double g, double s_inf, int assigned) {
      trace << h << "," << g << "," << s_inf << "," << assigned << "\n";
    };
  }

  if (!mps_path.empty()) {
    std::ofstream mps(mps_path);
    if (!mps) throw std::runtime_error("cannot open MPS file '" + mps_path + "'");
    write_mps(build_lp(inst), mps);
  }

  ResultDoc doc;
  doc.mode = mode_str;
  const int ncap = static_cast<int>(inst.capacity_ids().size());

  if (mode_str == "exact" || mode_str.rfind("fixed:", 0) == 0) {
    const ExperimentMode mode = parse_experiment_mode(mode_str, inst.shapes);
    BnBParams bp;
    bp.time_limit_s = time_limit_s;
    ExactResult res;
    if (mode.kind == ExperimentMode::Kind::FIXED) {
      const Instance restricted = restrict_to_shape(inst, mode.fixed_shape_index);
      res = branch_and_bound(restricted, bp);
      res.assignment = remap_assignment(restricted, inst, res.assignment);
    } else {
      res = branch_and_bound(inst, bp);
    }
    doc.assignment = res.assignment;
    doc.has_exact = true;
    doc.proven = res.proven;
    doc.nodes = res.nodes;
    doc.bound_gap = res.bound_gap;
    std::fprintf(stderr, "exact: value=%.6g proven=%d nodes=%lld time=%.2fs\n", res.value,
                 res.proven ? 1 : 0, res.nodes, res.wall_time_s);
  } else {
    const SolveMode mode = parse_solve_mode(mode_str);
    const PipelineResult res = run_pipeline(inst, mode, pparams);
    doc.assignment = res.assignment;
    doc.rho_selected = res.diag.rho_selected;
    doc.subgradient_iterations = res.diag.subgradient_iterations;
    doc.lp_skipped = res.diag.lp_skipped;
    doc.winner = res.diag.winner;
  }

  // Canonicalize through the feasibility audit before writing out.
  const CheckReport rep = check_assignment(inst, doc.assignment);
  doc.assignment.objective = rep.objective;
  doc.assignment.unmet = rep.unmet;
  doc.assignment.feasible = rep.feasible;
  if (!rep.no_overlap) throw std::logic_error("solver produced overlapping blocks");
  doc.rate_kbps_per_user = ncap > 0 ? rep.objective / inst.horizon_ms() / ncap : 0.0;
  if (!out_path.empty()) save_result(doc, out_path);
  std::printf("mode=%s feasible=%d objective_bits=%.10g rate_kbps_per_user=%.10g\n",
              doc.mode.c_str(), doc.assignment.feasible ? 1 : 0, doc.assignment.objective,
              doc.rate_kbps_per_user);
  return doc.assignment.feasible ? kExitFeasible : kExitUnmet;
}

int cmd_experiment(const std::string& config_path, const std::string& sweep,
                   const std::string& values_csv, int num_seeds, const std::string& modes_csv,
                   double time_limit_s, int max_subgradient_iters, int threads,
                   const std::string& out_path) {
  const SimParams base = params_from_config(config_path);

  std::vector<double> values = parse_double_list(values_csv);
  if (values.empty()) {
    values = sweep == "tau" ? std::vector<double>{0.25, 0.5, 1.0, 1.5, 2.0}
                            : std::vector<double>{16, 32, 64, 128, 256, 512};
  }
  std::vector<uint64_t> seeds;
  for (int s = 1; s <= num_seeds; ++s) seeds.push_back(static_cast<uint64_t>(s));

  ExperimentOptions opts;
  opts.exact_time_limit_s = time_limit_s;
  opts.threads = threads;
  opts.pipeline.subgradient.max_iters = max_subgradient_iters;
  std::string modes = modes_csv;
  if (modes.empty()) {
    modes = sweep == "tau" ? "lp+ld,fixed:shape1,fixed:shape2,fixed:shape3,exact"
                           : "rate,lp,ld,lp+ld,exact";
  }
  std::stringstream ss(modes);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) opts.modes.push_back(parse_experiment_mode(token, base.shapes));
  }

  const std::vector<RunRow> rows = run_experiment(base, sweep, values, seeds, opts);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  write_experiment_csv(rows, out);

  int errors = 0;
  for (const auto& r : rows) {
    if (r.status == "error") {
      ++errors;
      std::fprintf(stderr, "row error: value=%g seed=%llu mode=%s: %s\n", r.value,
                   static_cast<unsigned long long>(r.seed), r.mode.c_str(), r.note.c_str());
    }
  }
  std::printf("experiment: %zu rows (%d errors) -> %s\n", rows.size(), errors, out_path.c_str());
  return kExitFeasible;
}

int cmd_validate(const std::string& instance_path, const std::string& result_path) {
  const Instance inst = load_instance(instance_path);
  const ResultDoc doc = load_result(result_path);
  const CheckReport rep = check_assignment(inst, doc.assignment);

  bool ok = rep.no_overlap;
  if (std::abs(rep.objective - doc.assignment.objective) >
      1e-6 * std::max(1.0, std::abs(rep.objective))) {
    std::fprintf(stderr, "objective mismatch: recomputed %.10g, recorded %.10g\n", rep.objective,
                 doc.assignment.objective);
    ok = false;
  }
  if (rep.feasible != doc.assignment.feasible) {
    std::fprintf(stderr, "feasibility mismatch: recomputed %d, recorded %d\n", rep.feasible,
                 doc.assignment.feasible);
    ok = false;
  }
  if (!rep.no_overlap) std::fprintf(stderr, "non-overlap violated\n");
  std::printf("validate: %s (feasible=%d, objective_bits=%.10g)\n", ok ? "ok" : "MISMATCH",
              rep.feasible ? 1 : 0, rep.objective);
  if (!ok) return kExitError;
  return rep.feasible ? kExitFeasible : kExitUnmet;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flexnr: 2-D radio resource allocation with flexible numerology"};
  app.require_subcommand(1);

  std::string config_path, instance_path, result_path, out_path, mode_str = "lp+ld";
  std::string values_csv, modes_csv, rho_grid_csv, trace_path, mps_path, sweep = "demand";
  uint64_t seed = 1;
  int num_seeds = 20, max_subgradient_iters = 200, threads = 1;
  double time_limit_s = 300.0;

  auto* gen = app.add_subcommand("generate", "Generate a random instance file");
  gen->add_option("--config", config_path, "Config JSON (defaults when omitted)");
  gen->add_option("--seed", seed, "Master seed");
  gen->add_option("--out", out_path, "Output instance path")->required();

  auto* solve = app.add_subcommand("solve", "Solve an instance file");
  solve->add_option("--instance", instance_path, "Instance JSON")->required();
  solve->add_option("--mode", mode_str, "rate|lp|ld|lp+ld|exact|fixed:<shape>");
  solve->add_option("--time-limit", time_limit_s, "Exact solver time limit (s)");
  solve->add_option("--rho-grid", rho_grid_csv, "Comma-separated LP seed thresholds");
  solve->add_option("--max-subgradient-iters", max_subgradient_iters, "LD iteration cap");
  solve->add_option("--out", out_path, "Result JSON path");
  solve->add_option("--trace", trace_path, "Subgradient trace CSV path");
  solve->add_option("--mps", mps_path, "Dump the LP relaxation in MPS format");

  auto* exp = app.add_subcommand("experiment", "Sweep tau or demand over seeds");
  exp->add_option("--config", config_path, "Config JSON (defaults when omitted)");
  exp->add_option("--sweep", sweep, "tau|demand")->required();
  exp->add_option("--values", values_csv, "Comma-separated sweep values (default: table values)");
  exp->add_option("--seeds", num_seeds, "Number of seeds (1..N)");
  exp->add_option("--modes", modes_csv, "Comma-separated solver arms");
  exp->add_option("--time-limit", time_limit_s, "Exact time limit per instance (s)");
  exp->add_option("--max-subgradient-iters", max_subgradient_iters, "LD iteration cap");
  exp->add_option("--threads", threads, "Worker threads");
  exp->add_option("--out", out_path, "Output CSV path")->required();

  auto* val = app.add_subcommand("validate", "Re-check a result file against its instance");
  val->add_option("--instance", instance_path, "Instance JSON")->required();
  val->add_option("--result", result_path, "Result JSON")->required();

  auto* defaults = app.add_subcommand("print-defaults", "Emit the default config JSON");
  defaults->add_option("--out", out_path, "Write to a file instead of stdout");

  auto* rates = app.add_subcommand("export-rates", "Dump the rate matrix as CSV");
  rates->add_option("--instance", instance_path, "Instance JSON")->required();
  rates->add_option("--out", out_path, "Output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(config_path, seed, out_path);
    if (solve->parsed()) {
      return cmd_solve(instance_path, mode_str, time_limit_s, rho_grid_csv,
                       max_subgradient_iters, out_path, trace_path, mps_path);
    }
    if (exp->parsed()) {
      return cmd_experiment(config_path, sweep, values_csv, num_seeds, modes_csv, time_limit_s,
                            max_subgradient_iters, threads, out_path);
    }
    if (val->parsed()) return cmd_validate(instance_path, result_path);
    if (defaults->parsed()) {
      SimParams p;
      p.derive_units();
      const std::string text = sim_params_to_json(p).dump(2) + "\n";
      if (out_path.empty()) {
        std::cout << text;
      } else {
        write_text_file(out_path, text);
      }
      return kExitFeasible;
    }
    if (rates->parsed()) {
      const Instance inst = load_instance(instance_path);
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot open '" + out_path + "'");
      write_rate_csv(inst, out);
      return kExitFeasible;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
