// SPDX-License-Identifier: Apache-2.0
//
// risce - wideband cascaded channel estimation for RIS-assisted mmWave MIMO-OFDM
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RISCE_CONFIG_HPP
#define RISCE_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace risce
{

inline constexpr double kSpeedOfLight = 299792458.0;

/// Grid density per dimension, in points per resolution cell (elevation, azimuth, delay).
struct GridRates
{
    double phi = 2.0;
    double psi = 2.0;
    double tau = 2.0;

    bool operator==(const GridRates &) const = default;
};

/// Carrier, array, pilot and estimator constants shared by every module.
///
/// Defaults reproduce the 28 GHz / 600 MHz / 512-subcarrier system with a 64-antenna BS
/// and a 16 x 16 RIS. `pilot_subcarriers` is always the resolved index set; use
/// `default_pilot_subcarriers` to regenerate it after changing the pilot count.
struct SystemConfig
{
    double carrier_freq_hz = 28e9;
    double bandwidth_hz = 600e6;
    int num_subcarriers = 512;
    std::vector<int> pilot_subcarriers;
    int num_pilot_symbols = 16;
    int num_bs_antennas = 64;
    int ris_nx = 16;
    int ris_ny = 16;
    double element_spacing_m = 0.0;
    double noise_variance = 1.0;
    double false_alarm_rate = 0.01;
    double max_delay_s = 32.0 / 600e6;
    GridRates coarse_rates{2.0, 2.0, 2.0};
    GridRates precise_rates{4.0, 4.0, 4.0};
    int single_refine_iters = 5;
    int cyclic_refine_iters = 5;
    int num_paths = 5;
    int max_paths = 0; // 0 selects 2 * num_paths
    std::uint64_t rng_seed = 1;

    double subcarrier_spacing() const { return bandwidth_hz / num_subcarriers; }
    double wavelength() const { return kSpeedOfLight / carrier_freq_hz; }
    double delay_period() const { return 1.0 / subcarrier_spacing(); }
    int num_ris_elements() const { return ris_nx * ris_ny; }
    int num_pilot_subcarriers() const { return static_cast<int>(pilot_subcarriers.size()); }
    std::size_t observation_length() const
    {
        return pilot_subcarriers.size() * static_cast<std::size_t>(num_pilot_symbols) *
               static_cast<std::size_t>(num_bs_antennas);
    }
    int path_cap() const { return max_paths > 0 ? max_paths : 2 * num_paths; }

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const;

    bool operator==(const SystemConfig &) const = default;
};

/// L pilot indices, equispaced with the largest stride that keeps delays in
/// [0, max_delay) unambiguous (stride <= N_c / L and stride * delta_f * max_delay <= 1).
std::vector<int> default_pilot_subcarriers(int num_subcarriers, int num_pilots, double bandwidth_hz,
                                           double max_delay_s);

/// Full-scale system: f_c = 28 GHz, W = 600 MHz, N_c = 512, N_b = 64, N_r = 16 x 16,
/// M = 16, L = 12, d = lambda_c / 2, P = 5.
SystemConfig full_scale_config();

/// Reduced-scale system for desk experiments: N_b = 8, N_r = 4 x 4, N_c = 64, L = 8, M = 8, P = 3.
SystemConfig desk_config();

/// Re-derives the pilot set for a new pilot count under the current bandwidth/delay window.
void set_pilot_count(SystemConfig &cfg, int num_pilots);

} // namespace risce

#endif
