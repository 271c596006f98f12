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

#ifndef FLEXNR_GRID_HPP
#define FLEXNR_GRID_HPP

#include <string>
#include <vector>

namespace flexnr {

/// One block template: an OFDM parameterization (SCS, CP, symbol count)
/// together with the TTI it spans. The built-in catalog carries the four
/// candidate shapes used for benchmarking.
struct NumerologyShape {
  std::string id;
  double scs_khz = 0.0;
  double tti_ms = 0.0;
  double symbol_us = 0.0;
  double cp_us = 0.0;
  int num_symbols = 0;

  /// Throws std::invalid_argument when the template is inconsistent:
  /// symbols must fit the TTI and symbol duration must match the SCS,
  /// both within 1% slack.
  void validate() const;
};

/// The four built-in shapes:
/// shape1  15 kHz / 0.5 ms,  shape2  30 kHz / 0.25 ms,
/// shape3  60 kHz / 0.125 ms (normal CP),  shape3e  60 kHz / 0.125 ms (extended CP).
const std::vector<NumerologyShape>& shape_catalog();

/// Looks up a catalog shape by id ("shape1".."shape3e"); throws on unknown id.
const NumerologyShape& catalog_shape(const std::string& id);

/// Time-frequency grid of basic units. Units are indexed row-major:
/// unit(t, f) = t * n_freq + f, i.e. frequency-major within each time unit.
struct ResourceGrid {
  double total_time_ms = 0.0;
  double total_bw_khz = 0.0;
  double unit_time_ms = 0.0;
  double unit_bw_khz = 0.0;
  int n_time = 0;
  int n_freq = 0;

  static ResourceGrid make(double total_time_ms, double total_bw_khz,
                           double unit_time_ms, double unit_bw_khz);

  int num_units() const { return n_time * n_freq; }
  int unit_index(int t, int f) const { return t * n_freq + f; }
};

/// A concrete rectangular placement of a shape on the grid.
struct Block {
  int id = -1;
  int shape_index = -1;        // position in the instance's shape list
  NumerologyShape shape;
  int t0 = 0;
  int f0 = 0;
  int t_span = 0;
  int f_span = 0;
  std::vector<int> coverage;   // basic-unit indices, ascending
  double end_time_ms = 0.0;    // (t0 + t_span) * unit_time_ms
};

/// Footprint of a shape in basic units for a given grid.
struct Footprint {
  int t_span = 0;
  int f_span = 0;
};

/// Computes the footprint; throws std::invalid_argument when the shape does
/// not divide evenly into basic units (within 1e-6 relative).
Footprint shape_footprint(const NumerologyShape& shape, const ResourceGrid& grid,
                          int subcarriers_per_block);

/// Places every shape at every feasible position of the grid. Shapes whose
/// footprint exceeds the grid contribute zero blocks. Block ids are dense,
/// in (shape order, t0, f0) enumeration order.
std::vector<Block> enumerate_blocks(const ResourceGrid& grid,
                                    const std::vector<NumerologyShape>& shapes,
                                    int subcarriers_per_block);

/// True iff the two blocks share at least one basic unit. Rectangle-interval
/// test; equivalent to intersecting the coverage sets.
bool overlaps(const Block& a, const Block& b);

}  // namespace flexnr

#endif  // FLEXNR_GRID_HPP
