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

#ifndef FLEXNR_INSTANCE_HPP
#define FLEXNR_INSTANCE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "flexnr/channel.hpp"
#include "flexnr/grid.hpp"

namespace flexnr {

/// Tolerance used everywhere a demand sum is compared against q_k.
inline double demand_tolerance(double q) { return 1e-9 * std::max(1.0, q); }

enum class ServiceClass { LATENCY, CAPACITY };

struct Service {
  int id = -1;
  ServiceClass cls = ServiceClass::CAPACITY;
  double demand_bits = 0.0;  // latency class only
  double latency_ms = 0.0;   // latency class only
  double snr_db = 0.0;
  ChannelRealization channel;  // freq_gains may be empty before build
};

/// The assembled problem: grid, candidate blocks, services and the
/// latency-masked rate matrix r[b][k].
struct Instance {
  ResourceGrid grid;
  std::vector<NumerologyShape> shapes;
  int subcarriers_per_block = 12;
  MultipathProfile profile;
  RateConfig rate_config;
  std::vector<Block> blocks;
  std::vector<Service> services;
  std::vector<double> rates;  // row-major: rates[b * |K| + k]
  bool has_rate_override = false;
  std::vector<double> rate_override;  // same layout, pre-mask rates
  uint64_t seed = 0;

  int num_blocks() const { return static_cast<int>(blocks.size()); }
  int num_services() const { return static_cast<int>(services.size()); }
  double rate(int b, int k) const { return rates[static_cast<size_t>(b) * services.size() + k]; }

  std::vector<int> latency_ids() const;
  std::vector<int> capacity_ids() const;

  /// Horizon in ms (the grid's total time).
  double horizon_ms() const { return grid.total_time_ms; }
};

/// A set of (block, service) pairs with its objective over capacity
/// services. `unmet` lists latency services with residual demand.
struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // sorted by (block, service)
  double objective = 0.0;
  bool feasible = false;
  std::vector<int> unmet;
};

/// Everything a feasibility audit of an assignment reports.
struct CheckReport {
  bool no_overlap = true;
  bool block_unique = true;
  std::vector<int> conflicted_units;
  std::vector<int> unmet;              // latency service ids
  std::vector<double> delivered_bits;  // per service
  double objective = 0.0;
  bool feasible = false;
};

/// Simulation-table parameters for random instances.
struct SimParams {
  double total_time_ms = 2.0;
  double total_bw_khz = 2000.0;
  double unit_time_ms = 0.0;  // 0 = derive from enabled shapes
  double unit_bw_khz = 0.0;   // 0 = derive from enabled shapes
  int subcarriers_per_block = 12;
  std::vector<NumerologyShape> shapes = shape_catalog();
  MultipathProfile profile = default_profile();
  RateConfig rate_config;
  int n_latency = 5;
  int n_capacity = 5;
  double demand_kbps = 128.0;
  double tau_ms = 2.0;
  double snr_db_min = 5.0;
  double snr_db_max = 30.0;

  /// Basic unit = smallest TTI x bandwidth of one block at the smallest SCS.
  void derive_units();
  ResourceGrid make_grid() const;
};

/// Computes rates (channel model, then latency masking) for the given
/// services; services without realized channels get one from sub_seed(seed, k).
Instance build_instance(const ResourceGrid& grid, const std::vector<NumerologyShape>& shapes,
                        int subcarriers_per_block, std::vector<Service> services,
                        const MultipathProfile& profile, const RateConfig& cfg, uint64_t seed);

/// Draws SNRs and channels per the simulation table. Demands are
/// demand_kbps * horizon_ms bits (traffic accumulated over the horizon).
Instance random_instance(const SimParams& params, uint64_t seed);

/// Hardness-reduction instance from an integer set: n unit blocks in one TTI,
/// one latency service with demand sum(d)/2 and one capacity service, with
/// r[b][0] = r[b][1] = d_b. The exact optimum reaches sum(d)/2 with the
/// demand met iff the set admits an equal-sum partition.
Instance partition_instance(const std::vector<long long>& d);

/// Same instance with the candidate set restricted to a single shape;
/// channels and services are reused, rates recomputed.
Instance restrict_to_shape(const Instance& inst, int shape_index);

/// Rewrites block ids of an assignment produced on `from` (e.g. a restricted
/// instance) into the ids of `to`, matching blocks by (shape id, t0, f0).
/// Throws when a block has no counterpart.
Assignment remap_assignment(const Instance& from, const Instance& to, const Assignment& a);

/// Recomputes overlap, demand satisfaction and the capacity objective of an
/// assignment. Throws std::invalid_argument on unknown block/service ids.
CheckReport check_assignment(const Instance& inst, const Assignment& a);

}  // namespace flexnr

#endif  // FLEXNR_INSTANCE_HPP
