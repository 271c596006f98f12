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

#ifndef FLEXNR_JSON_IO_HPP
#define FLEXNR_JSON_IO_HPP

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "flexnr/exact.hpp"
#include "flexnr/instance.hpp"

namespace flexnr {

using Json = nlohmann::json;

// Instance files ------------------------------------------------------------
// Blocks are not serialized; they are re-enumerated deterministically from
// the grid and shapes on load. Channel gains are stored verbatim so a loaded
// instance reproduces its rate matrix bit for bit.

Json instance_to_json(const Instance& inst);
Instance instance_from_json(const Json& j);
void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

// Solver result files --------------------------------------------------------

struct ResultDoc {
  std::string mode;
  Assignment assignment;
  double rate_kbps_per_user = 0.0;
  // pipeline diagnostics
  double rho_selected = -1.0;
  int subgradient_iterations = 0;
  bool lp_skipped = false;
  std::string winner;
  // exact diagnostics
  bool has_exact = false;
  bool proven = false;
  long long nodes = 0;
  double bound_gap = 0.0;
};

Json result_to_json(const ResultDoc& doc);
ResultDoc result_from_json(const Json& j);
void save_result(const ResultDoc& doc, const std::string& path);
ResultDoc load_result(const std::string& path);

// Run configuration ----------------------------------------------------------
// A config file is a JSON object with any subset of the SimParams fields;
// missing fields take the simulation-table defaults.

SimParams sim_params_from_json(const Json& j);
Json sim_params_to_json(const SimParams& p);
SimParams load_sim_params(const std::string& path);

// Rate matrix CSV for inspection: header block_id,shape,t0,f0,end_ms then one
// rate column per service.
void write_rate_csv(const Instance& inst, std::ostream& os);

/// Reads a whole file; throws std::runtime_error with the path on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace flexnr

#endif  // FLEXNR_JSON_IO_HPP
