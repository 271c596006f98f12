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

#ifndef FLEXNR_UTILITY_HPP
#define FLEXNR_UTILITY_HPP

#include <stdexcept>
#include <vector>

#include "flexnr/instance.hpp"

namespace flexnr {

enum class UtilitySource { RATE, LP, LD };

/// Nonnegative scores per (block, service) pair; only the ordering matters
/// to the greedy assignment.
struct UtilityMatrix {
  UtilitySource source = UtilitySource::RATE;
  int num_blocks = 0;
  int num_services = 0;
  std::vector<double> values;  // row-major [b * |K| + k]

  static UtilityMatrix zeros(UtilitySource src, int nb, int nk) {
    UtilityMatrix u;
    u.source = src;
    u.num_blocks = nb;
    u.num_services = nk;
    u.values.assign(static_cast<size_t>(nb) * nk, 0.0);
    return u;
  }

  double at(int b, int k) const { return values[static_cast<size_t>(b) * num_services + k]; }
  double& at(int b, int k) { return values[static_cast<size_t>(b) * num_services + k]; }

  void check_dims(const Instance& inst) const {
    if (num_blocks != inst.num_blocks() || num_services != inst.num_services()) {
      throw std::invalid_argument("utility matrix dimensions do not match the instance");
    }
  }
};

/// The throughput matrix itself as utility.
inline UtilityMatrix rate_utility(const Instance& inst) {
  UtilityMatrix u = UtilityMatrix::zeros(UtilitySource::RATE, inst.num_blocks(), inst.num_services());
  u.values = inst.rates;
  return u;
}

}  // namespace flexnr

#endif  // FLEXNR_UTILITY_HPP
