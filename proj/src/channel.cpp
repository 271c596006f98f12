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

#include "flexnr/channel.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "flexnr/rng.hpp"

namespace flexnr {

void MultipathProfile::validate() const {
  if (tap_delays_us.empty() || tap_delays_us.size() != tap_powers_db.size()) {
    throw std::invalid_argument("profile: need equal, nonempty delay/power lists");
  }
  if (tap_delays_us.front() != 0.0) {
    throw std::invalid_argument("profile: first tap delay must be 0");
  }
  for (size_t i = 1; i < tap_delays_us.size(); ++i) {
    if (tap_delays_us[i] < tap_delays_us[i - 1]) {
      throw std::invalid_argument("profile: tap delays must be nondecreasing");
    }
  }
}

std::vector<double> MultipathProfile::linear_powers() const {
  validate();
  std::vector<double> p(tap_powers_db.size());
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    p[i] = std::pow(10.0, tap_powers_db[i] / 10.0);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

const MultipathProfile& default_profile() {
  static const MultipathProfile eva = {
      {0.0, 0.03, 0.15, 0.31, 0.37, 0.71, 1.09, 1.73, 2.51},
      {0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9},
  };
  return eva;
}

void RateConfig::validate(int min_num_symbols) const {
  if (overhead_symbols < 0 || overhead_symbols >= min_num_symbols) {
    throw std::invalid_argument("overhead_symbols must be in [0, min num_symbols)");
  }
  if (guardband_fraction < 0.0 || guardband_fraction >= 1.0) {
    throw std::invalid_argument("guardband_fraction must be in [0, 1)");
  }
  if (ici_penalty < 1.0) {
    throw std::invalid_argument("ici_penalty must be >= 1");
  }
}

ChannelRealization realize_channel(const MultipathProfile& profile, int n_freq,
                                   double unit_bw_khz, uint64_t seed) {
  if (n_freq < 1) throw std::invalid_argument("n_freq must be >= 1");
  const std::vector<double> powers = profile.linear_powers();

  Rng rng(seed);
  std::vector<std::complex<double>> taps(powers.size());
  for (size_t j = 0; j < powers.size(); ++j) {
    // Circular Gaussian with E|h|^2 = p_j.
    const double sigma = std::sqrt(powers[j] / 2.0);
    const double re = sigma * rng.gauss();
    const double im = sigma * rng.gauss();
    taps[j] = {re, im};
  }

  ChannelRealization ch;
  ch.seed = seed;
  ch.profile = profile;
  ch.freq_gains.resize(n_freq);
  for (int u = 0; u < n_freq; ++u) {
    const double f_khz = (u + 0.5) * unit_bw_khz;
    std::complex<double> h = 0.0;
    for (size_t j = 0; j < taps.size(); ++j) {
      // phase = 2*pi * f[Hz] * delay[s] = 2*pi * f[kHz] * delay[us] * 1e-3
      const double phase = -2.0 * M_PI * f_khz * profile.tap_delays_us[j] * 1e-3;
      h += taps[j] * std::polar(1.0, phase);
    }
    ch.freq_gains[u] = std::max(std::norm(h), 1e-12);
  }
  return ch;
}

double isi_fraction(const MultipathProfile& profile, double cp_us) {
  if (cp_us < 0.0) throw std::invalid_argument("cp_us must be >= 0");
  const std::vector<double> powers = profile.linear_powers();
  double beta = 0.0;
  for (size_t j = 0; j < powers.size(); ++j) {
    if (profile.tap_delays_us[j] > cp_us) beta += powers[j];
  }
  return beta;
}

double block_rate(const Block& b, double snr_db, const ChannelRealization& ch,
                  const RateConfig& cfg, const ResourceGrid& grid) {
  if (b.f0 + b.f_span > static_cast<int>(ch.freq_gains.size())) {
    throw std::invalid_argument("block exceeds the channel's frequency range");
  }
  const double beta = isi_fraction(ch.profile, b.shape.cp_us);
  const double snr_lin = std::pow(10.0, snr_db / 10.0);
  const double n_sc_per_unit = grid.unit_bw_khz / b.shape.scs_khz;
  const double t_span_ttis = b.t_span * grid.unit_time_ms / b.shape.tti_ms;
  const double symbols = b.shape.num_symbols - cfg.overhead_symbols;

  double sum = 0.0;
  for (int f = b.f0; f < b.f0 + b.f_span; ++f) {
    const double g = snr_lin * ch.freq_gains[f];
    const double sinr = (1.0 - beta) * g / (1.0 + beta * g + (cfg.ici_penalty - 1.0));
    sum += n_sc_per_unit * symbols * t_span_ttis * std::log2(1.0 + sinr);
  }
  return (1.0 - cfg.guardband_fraction) * sum;
}

}  // namespace flexnr
