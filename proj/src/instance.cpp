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

#include "flexnr/instance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "flexnr/rng.hpp"

namespace flexnr {

std::vector<int> Instance::latency_ids() const {
  std::vector<int> out;
  for (const auto& s : services) {
    if (s.cls == ServiceClass::LATENCY) out.push_back(s.id);
  }
  return out;
}

std::vector<int> Instance::capacity_ids() const {
  std::vector<int> out;
  for (const auto& s : services) {
    if (s.cls == ServiceClass::CAPACITY) out.push_back(s.id);
  }
  return out;
}

void SimParams::derive_units() {
  if (unit_time_ms > 0.0 && unit_bw_khz > 0.0) return;
  if (shapes.empty()) throw std::invalid_argument("no shapes enabled");
  double min_tti = shapes.front().tti_ms;
  double min_scs = shapes.front().scs_khz;
  for (const auto& s : shapes) {
    min_tti = std::min(min_tti, s.tti_ms);
    min_scs = std::min(min_scs, s.scs_khz);
  }
  if (unit_time_ms <= 0.0) unit_time_ms = min_tti;
  if (unit_bw_khz <= 0.0) unit_bw_khz = min_scs * subcarriers_per_block;
}

ResourceGrid SimParams::make_grid() const {
  SimParams p = *this;
  p.derive_units();
  return ResourceGrid::make(p.total_time_ms, p.total_bw_khz, p.unit_time_ms, p.unit_bw_khz);
}

namespace {

void validate_services(const std::vector<Service>& services) {
  for (size_t k = 0; k < services.size(); ++k) {
    if (services[k].id != static_cast<int>(k)) {
      throw std::invalid_argument("service ids must be dense 0..|K|-1");
    }
    if (services[k].cls == ServiceClass::LATENCY) {
      if (services[k].demand_bits <= 0.0 || services[k].latency_ms <= 0.0) {
        throw std::invalid_argument("latency service needs demand > 0 and deadline > 0");
      }
    }
  }
}

void fill_rates(Instance& inst) {
  const int nb = inst.num_blocks();
  const int nk = inst.num_services();
  inst.rates.assign(static_cast<size_t>(nb) * nk, 0.0);
  if (inst.has_rate_override) {
    if (inst.rate_override.size() != inst.rates.size()) {
      throw std::invalid_argument("rate override has wrong dimensions");
    }
    inst.rates = inst.rate_override;
  } else {
    for (int b = 0; b < nb; ++b) {
      for (int k = 0; k < nk; ++k) {
        inst.rates[static_cast<size_t>(b) * nk + k] =
            block_rate(inst.blocks[b], inst.services[k].snr_db, inst.services[k].channel,
                       inst.rate_config, inst.grid);
      }
    }
  }
  // Latency masking: a block ending after the deadline is infeasible for the
  // service, modeled as zero rate. Applies to overridden rates as well.
  for (int k = 0; k < nk; ++k) {
    if (inst.services[k].cls != ServiceClass::LATENCY) continue;
    for (int b = 0; b < nb; ++b) {
      if (inst.blocks[b].end_time_ms > inst.services[k].latency_ms) {
        inst.rates[static_cast<size_t>(b) * nk + k] = 0.0;
      }
    }
  }
  for (double r : inst.rates) {
    if (r < 0.0 || !std::isfinite(r)) throw std::invalid_argument("rates must be finite and >= 0");
  }
}

}  // namespace

Instance build_instance(const ResourceGrid& grid, const std::vector<NumerologyShape>& shapes,
                        int subcarriers_per_block, std::vector<Service> services,
                        const MultipathProfile& profile, const RateConfig& cfg, uint64_t seed) {
  validate_services(services);
  int min_symbols = 14;
  for (const auto& s : shapes) min_symbols = std::min(min_symbols, s.num_symbols);
  cfg.validate(min_symbols);

  Instance inst;
  inst.grid = grid;
  inst.shapes = shapes;
  inst.subcarriers_per_block = subcarriers_per_block;
  inst.profile = profile;
  inst.rate_config = cfg;
  inst.seed = seed;
  inst.blocks = enumerate_blocks(grid, shapes, subcarriers_per_block);
  inst.services = std::move(services);
  for (auto& s : inst.services) {
    if (s.channel.freq_gains.empty()) {
      s.channel = realize_channel(profile, grid.n_freq, grid.unit_bw_khz,
                                  sub_seed(seed, 1000 + static_cast<uint64_t>(s.id)));
    } else if (static_cast<int>(s.channel.freq_gains.size()) < grid.n_freq) {
      throw std::invalid_argument("service channel does not cover the grid bandwidth");
    }
  }
  fill_rates(inst);
  return inst;
}

Instance random_instance(const SimParams& params, uint64_t seed) {
  SimParams p = params;
  p.derive_units();
  const ResourceGrid grid = p.make_grid();

  std::vector<Service> services;
  const int total = p.n_latency + p.n_capacity;
  for (int k = 0; k < total; ++k) {
    Service s;
    s.id = k;
    s.cls = k < p.n_latency ? ServiceClass::LATENCY : ServiceClass::CAPACITY;
    Rng rng(sub_seed(seed, static_cast<uint64_t>(k)));
    s.snr_db = rng.uniform(p.snr_db_min, p.snr_db_max);
    if (s.cls == ServiceClass::LATENCY) {
      s.demand_bits = p.demand_kbps * p.total_time_ms;  // kbps * ms = bits
      s.latency_ms = p.tau_ms;
    }
    services.push_back(std::move(s));
  }
  Instance inst = build_instance(grid, p.shapes, p.subcarriers_per_block, std::move(services),
                                 p.profile, p.rate_config, seed);
  return inst;
}

Instance partition_instance(const std::vector<long long>& d) {
  if (d.size() < 2) throw std::invalid_argument("partition instance needs n >= 2 integers");
  long long total = 0;
  for (long long v : d) {
    if (v <= 0) throw std::invalid_argument("partition integers must be positive");
    total += v;
  }
  if (total % 2 != 0) throw std::invalid_argument("partition instance needs an even total");

  // One TTI of shape1 and a 1x1 footprint per integer.
  const NumerologyShape shape = catalog_shape("shape1");
  const ResourceGrid grid = ResourceGrid::make(shape.tti_ms, 180.0 * static_cast<double>(d.size()),
                                               shape.tti_ms, 180.0);

  std::vector<Service> services(2);
  services[0].id = 0;
  services[0].cls = ServiceClass::LATENCY;
  services[0].demand_bits = static_cast<double>(total) / 2.0;
  services[0].latency_ms = shape.tti_ms;
  services[0].snr_db = 0.0;
  services[1].id = 1;
  services[1].cls = ServiceClass::CAPACITY;
  services[1].snr_db = 0.0;

  Instance inst;
  inst.grid = grid;
  inst.shapes = {shape};
  inst.subcarriers_per_block = 12;
  inst.profile = {{0.0}, {0.0}};  // single tap; irrelevant under the override
  inst.rate_config = RateConfig{};
  inst.seed = 0;
  inst.blocks = enumerate_blocks(grid, inst.shapes, inst.subcarriers_per_block);
  inst.services = std::move(services);
  for (auto& s : inst.services) {
    s.channel = realize_channel(inst.profile, grid.n_freq, grid.unit_bw_khz, 0);
  }
  inst.has_rate_override = true;
  inst.rate_override.assign(static_cast<size_t>(inst.num_blocks()) * 2, 0.0);
  for (int b = 0; b < inst.num_blocks(); ++b) {
    inst.rate_override[static_cast<size_t>(b) * 2 + 0] = static_cast<double>(d[b]);
    inst.rate_override[static_cast<size_t>(b) * 2 + 1] = static_cast<double>(d[b]);
  }
  fill_rates(inst);
  return inst;
}

Instance restrict_to_shape(const Instance& inst, int shape_index) {
  if (shape_index < 0 || shape_index >= static_cast<int>(inst.shapes.size())) {
    throw std::invalid_argument("shape index out of range");
  }
  if (inst.has_rate_override) {
    throw std::invalid_argument("cannot restrict an instance with an explicit rate matrix");
  }
  return build_instance(inst.grid, {inst.shapes[shape_index]}, inst.subcarriers_per_block,
                        inst.services, inst.profile, inst.rate_config, inst.seed);
}

Assignment remap_assignment(const Instance& from, const Instance& to, const Assignment& a) {
  std::map<std::tuple<std::string, int, int>, int> index;
  for (const Block& b : to.blocks) index[{b.shape.id, b.t0, b.f0}] = b.id;
  Assignment out = a;
  for (auto& [b, k] : out.pairs) {
    const Block& blk = from.blocks[b];
    const auto it = index.find({blk.shape.id, blk.t0, blk.f0});
    if (it == index.end()) {
      throw std::invalid_argument("block " + std::to_string(b) + " has no counterpart");
    }
    b = it->second;
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

CheckReport check_assignment(const Instance& inst, const Assignment& a) {
  const int nb = inst.num_blocks();
  const int nk = inst.num_services();
  CheckReport rep;
  rep.delivered_bits.assign(nk, 0.0);

  std::vector<int> unit_hits(inst.grid.num_units(), 0);
  std::vector<char> block_used(nb, 0);
  for (const auto& [b, k] : a.pairs) {
    if (b < 0 || b >= nb || k < 0 || k >= nk) {
      throw std::invalid_argument("assignment refers to unknown block or service id");
    }
    if (block_used[b]) rep.block_unique = false;
    block_used[b] = 1;
    for (int u : inst.blocks[b].coverage) {
      if (++unit_hits[u] == 2) rep.conflicted_units.push_back(u);
    }
    rep.delivered_bits[k] += inst.rate(b, k);
    if (inst.services[k].cls == ServiceClass::CAPACITY) rep.objective += inst.rate(b, k);
  }
  rep.no_overlap = rep.conflicted_units.empty() && rep.block_unique;

  for (const auto& s : inst.services) {
    if (s.cls != ServiceClass::LATENCY) continue;
    if (rep.delivered_bits[s.id] < s.demand_bits - demand_tolerance(s.demand_bits)) {
      rep.unmet.push_back(s.id);
    }
  }
  rep.feasible = rep.no_overlap && rep.unmet.empty();
  return rep;
}

}  // namespace flexnr
