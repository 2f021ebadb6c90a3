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

#include "risce/config.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace risce
{

namespace
{

void require(bool cond, const char *field, const std::string &what)
{
    if (!cond)
        throw std::invalid_argument(std::string(field) + ": " + what);
}

void require_rates(const GridRates &r, const char *field)
{
    require(r.phi > 0.0 && r.psi > 0.0 && r.tau > 0.0, field, "all grid rates must be positive");
}

} // namespace

void SystemConfig::validate() const
{
    require(std::isfinite(carrier_freq_hz) && carrier_freq_hz > 0.0, "carrier_freq_hz", "must be positive");
    require(std::isfinite(bandwidth_hz) && bandwidth_hz > 0.0, "bandwidth_hz", "must be positive");
    require(num_subcarriers >= 1, "num_subcarriers", "must be >= 1");
    require(!pilot_subcarriers.empty(), "pilot_subcarriers", "must not be empty");
    std::vector<int> sorted = pilot_subcarriers;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "pilot_subcarriers",
            "indices must be distinct");
    require(sorted.front() >= 0 && sorted.back() < num_subcarriers, "pilot_subcarriers",
            "indices must lie in [0, num_subcarriers)");
    require(num_pilot_symbols >= 1, "num_pilot_symbols", "must be >= 1");
    require(num_bs_antennas >= 1, "num_bs_antennas", "must be >= 1");
    require(ris_nx >= 1, "ris_nx", "must be >= 1");
    require(ris_ny >= 1, "ris_ny", "must be >= 1");
    require(std::isfinite(element_spacing_m) && element_spacing_m > 0.0, "element_spacing_m", "must be positive");
    require(std::isfinite(noise_variance) && noise_variance > 0.0, "noise_variance", "must be positive");
    require(false_alarm_rate > 0.0 && false_alarm_rate < 1.0, "false_alarm_rate", "must lie in (0, 1)");
    require(max_delay_s > 0.0 && max_delay_s <= delay_period() * (1.0 + 1e-12), "max_delay_s",
            "must lie in (0, 1/delta_f]");
    require_rates(coarse_rates, "coarse_rates");
    require_rates(precise_rates, "precise_rates");
    require(precise_rates.phi >= coarse_rates.phi && precise_rates.psi >= coarse_rates.psi &&
                precise_rates.tau >= coarse_rates.tau,
            "precise_rates", "must not be coarser than coarse_rates");
    require(single_refine_iters >= 0, "single_refine_iters", "must be >= 0");
    require(cyclic_refine_iters >= 0, "cyclic_refine_iters", "must be >= 0");
    require(num_paths >= 1, "num_paths", "must be >= 1");
    require(max_paths >= 0, "max_paths", "must be >= 0");
}

std::vector<int> default_pilot_subcarriers(int num_subcarriers, int num_pilots, double bandwidth_hz,
                                           double max_delay_s)
{
    if (num_pilots < 1 || num_pilots > num_subcarriers)
        throw std::invalid_argument("num_pilot_subcarriers: must lie in [1, num_subcarriers]");
    if (!(bandwidth_hz > 0.0) || !(max_delay_s > 0.0))
        throw std::invalid_argument("num_pilot_subcarriers: bandwidth and max delay must be positive");

    const double delta_f = bandwidth_hz / num_subcarriers;
    const int even_stride = num_subcarriers / num_pilots;
    const int alias_stride = static_cast<int>(std::floor(1.0 / (max_delay_s * delta_f) + 1e-9));
    const int stride = std::max(1, std::min(even_stride, alias_stride));

    std::vector<int> out(static_cast<std::size_t>(num_pilots));
    for (int i = 0; i < num_pilots; ++i)
        out[static_cast<std::size_t>(i)] = i * stride;
    return out;
}

void set_pilot_count(SystemConfig &cfg, int num_pilots)
{
    cfg.pilot_subcarriers =
        default_pilot_subcarriers(cfg.num_subcarriers, num_pilots, cfg.bandwidth_hz, cfg.max_delay_s);
}

SystemConfig full_scale_config()
{
    SystemConfig cfg;
    cfg.element_spacing_m = 0.5 * cfg.wavelength();
    cfg.max_delay_s = 32.0 / cfg.bandwidth_hz;
    set_pilot_count(cfg, 12);
    return cfg;
}

SystemConfig desk_config()
{
    SystemConfig cfg = full_scale_config();
    cfg.num_subcarriers = 64;
    cfg.num_bs_antennas = 8;
    cfg.ris_nx = 4;
    cfg.ris_ny = 4;
    cfg.num_pilot_symbols = 8;
    cfg.num_paths = 3;
    set_pilot_count(cfg, 8);
    return cfg;
}

} // namespace risce
