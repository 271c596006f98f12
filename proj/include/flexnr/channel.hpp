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

#ifndef FLEXNR_CHANNEL_HPP
#define FLEXNR_CHANNEL_HPP

#include <cstdint>
#include <vector>

#include "flexnr/grid.hpp"

namespace flexnr {

/// Tapped-delay-line power-delay profile. Delays in microseconds,
/// relative tap powers in dB (linear powers are normalized to sum 1).
struct MultipathProfile {
  std::vector<double> tap_delays_us;
  std::vector<double> tap_powers_db;

  void validate() const;

  /// Linear tap powers scaled so that they sum to 1.
  std::vector<double> linear_powers() const;
};

/// Nine-tap Extended Vehicular A profile (max excess delay 2.51 us).
const MultipathProfile& default_profile();

/// One frequency-selective realization: a linear power gain per basic
/// frequency unit. Ensemble mean gain is 1 by construction of the taps;
/// individual realizations fluctuate.
struct ChannelRealization {
  std::vector<double> freq_gains;
  uint64_t seed = 0;
  MultipathProfile profile;
};

/// Knobs of the per-block rate model.
struct RateConfig {
  int overhead_symbols = 2;               // control symbols per TTI
  double guardband_fraction = 1.0 / 12.0; // fractional rate loss per block
  double ici_penalty = 1.0;               // linear noise inflation, >= 1 (1 = off)

  void validate(int min_num_symbols) const;
};

/// Draws i.i.d. circular-Gaussian tap coefficients weighted by the profile
/// powers and evaluates |H(f)|^2 at each frequency unit's center frequency.
/// Deterministic for a fixed seed.
ChannelRealization realize_channel(const MultipathProfile& profile, int n_freq,
                                   double unit_bw_khz, uint64_t seed);

/// Fraction of multipath power arriving after the cyclic prefix: the energy
/// that turns into inter-symbol interference. Step function of cp_us with
/// steps exactly at the tap delays; 0 when the CP covers the delay spread.
double isi_fraction(const MultipathProfile& profile, double cp_us);

/// Bits carried by block `b` for a link at `snr_db` over realization `ch`.
///
///   r = (1 - guardband) * sum_u n_sc * (num_symbols - overhead) * t_ttis
///                       * log2(1 + sinr_u)
///   sinr_u = (1 - beta) * g_u / (1 + beta * g_u + (ici_penalty - 1))
///
/// with g_u the linear SNR scaled by the unit's channel gain and beta the
/// ISI fraction for the block's CP.
double block_rate(const Block& b, double snr_db, const ChannelRealization& ch,
                  const RateConfig& cfg, const ResourceGrid& grid);

}  // namespace flexnr

#endif  // FLEXNR_CHANNEL_HPP
