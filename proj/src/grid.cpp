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

#include "flexnr/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace flexnr {

void NumerologyShape::validate() const {
  if (scs_khz <= 0 || tti_ms <= 0 || symbol_us <= 0 || cp_us < 0 || num_symbols <= 0) {
    throw std::invalid_argument("shape '" + id + "': all fields must be positive");
  }
  const double span_us = num_symbols * (symbol_us + cp_us);
  if (span_us > tti_ms * 1000.0 * 1.01) {
    throw std::invalid_argument("shape '" + id + "': symbols do not fit the TTI");
  }
  const double product = symbol_us * scs_khz;  // should be ~1000 (us * kHz)
  if (std::abs(product - 1000.0) > 10.0) {
    throw std::invalid_argument("shape '" + id + "': symbol duration inconsistent with SCS");
  }
}

const std::vector<NumerologyShape>& shape_catalog() {
  static const std::vector<NumerologyShape> catalog = {
      {"shape1", 15.0, 0.5, 66.7, 4.7, 7},
      {"shape2", 30.0, 0.25, 33.3, 2.3, 7},
      {"shape3", 60.0, 0.125, 16.7, 1.2, 7},
      {"shape3e", 60.0, 0.125, 16.7, 4.17, 6},
  };
  return catalog;
}

const NumerologyShape& catalog_shape(const std::string& id) {
  for (const auto& s : shape_catalog()) {
    if (s.id == id) return s;
  }
  throw std::invalid_argument("unknown catalog shape '" + id + "'");
}

ResourceGrid ResourceGrid::make(double total_time_ms, double total_bw_khz,
                                double unit_time_ms, double unit_bw_khz) {
  if (total_time_ms <= 0 || total_bw_khz <= 0 || unit_time_ms <= 0 || unit_bw_khz <= 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  ResourceGrid g;
  g.total_time_ms = total_time_ms;
  g.total_bw_khz = total_bw_khz;
  g.unit_time_ms = unit_time_ms;
  g.unit_bw_khz = unit_bw_khz;
  g.n_time = static_cast<int>(std::floor(total_time_ms / unit_time_ms + 1e-9));
  g.n_freq = static_cast<int>(std::floor(total_bw_khz / unit_bw_khz + 1e-9));
  if (g.n_time < 1 || g.n_freq < 1) {
    throw std::invalid_argument("grid smaller than one basic unit");
  }
  return g;
}

namespace {

int round_to_int_or_throw(double x, const std::string& what) {
  const double r = std::round(x);
  if (r < 1.0 || std::abs(x - r) > 1e-6 * std::max(1.0, r)) {
    throw std::invalid_argument(what + " is not an integer multiple of basic units (" +
                                std::to_string(x) + ")");
  }
  return static_cast<int>(r);
}

}  // namespace

Footprint shape_footprint(const NumerologyShape& shape, const ResourceGrid& grid,
                          int subcarriers_per_block) {
  shape.validate();
  if (subcarriers_per_block < 1) {
    throw std::invalid_argument("subcarriers_per_block must be >= 1");
  }
  Footprint fp;
  fp.t_span = round_to_int_or_throw(shape.tti_ms / grid.unit_time_ms,
                                    "shape '" + shape.id + "' TTI span");
  fp.f_span = round_to_int_or_throw(shape.scs_khz * subcarriers_per_block / grid.unit_bw_khz,
                                    "shape '" + shape.id + "' bandwidth span");
  return fp;
}

std::vector<Block> enumerate_blocks(const ResourceGrid& grid,
                                    const std::vector<NumerologyShape>& shapes,
                                    int subcarriers_per_block) {
  std::vector<Block> blocks;
  int next_id = 0;
  for (size_t si = 0; si < shapes.size(); ++si) {
    const Footprint fp = shape_footprint(shapes[si], grid, subcarriers_per_block);
    if (fp.t_span > grid.n_time || fp.f_span > grid.n_freq) continue;  // no placements
    for (int t0 = 0; t0 + fp.t_span <= grid.n_time; ++t0) {
      for (int f0 = 0; f0 + fp.f_span <= grid.n_freq; ++f0) {
        Block b;
        b.id = next_id++;
        b.shape_index = static_cast<int>(si);
        b.shape = shapes[si];
        b.t0 = t0;
        b.f0 = f0;
        b.t_span = fp.t_span;
        b.f_span = fp.f_span;
        b.end_time_ms = (t0 + fp.t_span) * grid.unit_time_ms;
        b.coverage.reserve(static_cast<size_t>(fp.t_span) * fp.f_span);
        for (int t = t0; t < t0 + fp.t_span; ++t) {
          for (int f = f0; f < f0 + fp.f_span; ++f) {
            b.coverage.push_back(grid.unit_index(t, f));
          }
        }
        blocks.push_back(std::move(b));
      }
    }
  }
  return blocks;
}

bool overlaps(const Block& a, const Block& b) {
  const bool time_hit = a.t0 < b.t0 + b.t_span && b.t0 < a.t0 + a.t_span;
  const bool freq_hit = a.f0 < b.f0 + b.f_span && b.f0 < a.f0 + a.f_span;
  return time_hit && freq_hit;
}

}  // namespace flexnr
