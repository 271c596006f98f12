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

#ifndef FLEXNR_EXPERIMENT_HPP
#define FLEXNR_EXPERIMENT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "flexnr/assign.hpp"
#include "flexnr/exact.hpp"
#include "flexnr/instance.hpp"

namespace flexnr {

/// One solver arm of an experiment. `fixed:<shape>` restricts the candidate
/// set to a single shape and solves to optimality; `exact` is the flexible
/// optimum; the rest are pipeline modes.
struct ExperimentMode {
  enum class Kind { PIPELINE, EXACT, FIXED };
  Kind kind = Kind::PIPELINE;
  SolveMode pipeline_mode = SolveMode::RATE;
  int fixed_shape_index = -1;
  std::string label;
};

/// "TTI-SCS" token for a shape, e.g. "0.25ms-30kHz".
std::string shape_token(const NumerologyShape& s);

/// Accepts pipeline names, "exact", "fixed:<TTI-SCS>" and "fixed:<shape id>".
/// A TTI-SCS token matches the first enabled shape with those parameters.
ExperimentMode parse_experiment_mode(const std::string& token,
                                     const std::vector<NumerologyShape>& shapes);

struct RunRow {
  std::string sweep;
  double value = 0.0;
  uint64_t seed = 0;
  std::string mode;
  std::string status;  // feasible | unmet | error
  double objective_bits = 0.0;
  double rate_kbps = 0.0;  // objective / horizon / |K^c|
  bool has_gap = false;
  double gap = 0.0;
  bool has_exact_fields = false;
  bool proven = false;
  long long nodes = 0;
  std::string note;  // error text for status=error
};

struct ExperimentOptions {
  std::vector<ExperimentMode> modes;
  PipelineParams pipeline;
  double exact_time_limit_s = 300.0;
  int threads = 1;
};

/// Runs every (value, seed) grid point with every mode. `sweep` is "tau" or
/// "demand". Gaps are reported against the exact arm of the same grid point
/// when one is requested. Grid points run in a worker pool; row order is
/// deterministic (values, then seeds, then modes).
std::vector<RunRow> run_experiment(const SimParams& base, const std::string& sweep,
                                   const std::vector<double>& values,
                                   const std::vector<uint64_t>& seeds,
                                   const ExperimentOptions& opts);

/// Per-row lines followed by one aggregation row (seed column = "mean") per
/// (value, mode): mean rate with non-feasible runs counted as 0 kbps, and the
/// mean gap over rows where a gap is defined.
void write_experiment_csv(const std::vector<RunRow>& rows, std::ostream& os);

/// Mean rate (non-feasible counted as 0) of one (value, mode) group.
double mean_rate_kbps(const std::vector<RunRow>& rows, double value, const std::string& mode);

/// Mean gap over rows of one (value, mode) group where the gap is defined;
/// returns false when no row defines a gap.
bool mean_gap(const std::vector<RunRow>& rows, double value, const std::string& mode, double* out);

}  // namespace flexnr

#endif  // FLEXNR_EXPERIMENT_HPP
