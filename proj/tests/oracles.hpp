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

// Independent scalar re-implementations used as test oracles. Nothing here calls into risce
// except for reading plain configuration fields.

#ifndef RISCE_TESTS_ORACLES_HPP
#define RISCE_TESTS_ORACLES_HPP

#include "risce/config.hpp"
#include "risce/signal_model.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle
{

using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

inline double varpi(int r, double phi, double psi, const risce::SystemConfig &c)
{
    const double lambda = 299792458.0 / c.carrier_freq_hz;
    const int i = r / c.ris_ny;
    const int j = r % c.ris_ny;
    return c.element_spacing_m / lambda * (i * std::sin(phi) * std::sin(psi) + j * std::sin(phi) * std::cos(psi));
}

inline cd ris_entry(int r, double f, double phi, double psi, const risce::SystemConfig &c)
{
    return std::polar(1.0, -2.0 * pi * (1.0 + f / c.carrier_freq_hz) * varpi(r, phi, psi, c));
}

inline cd bs_entry(int b, double f, double theta, const risce::SystemConfig &c)
{
    const double lambda = 299792458.0 / c.carrier_freq_hz;
    return std::polar(1.0, -2.0 * pi * (1.0 + f / c.carrier_freq_hz) * b * c.element_spacing_m * std::sin(theta) /
                               lambda);
}

/// One observation entry of a unit-gain path, summed term by term.
inline cd atom_entry(int kpos, int m, int b, double phi, double psi, double tau, const Eigen::MatrixXd &rho,
                     const risce::LinkGeometry &g, const risce::SystemConfig &c)
{
    const int k = c.pilot_subcarriers[static_cast<std::size_t>(kpos)];
    const double df = c.bandwidth_hz / c.num_subcarriers;
    const double f = k * df;
    cd z = 0.0;
    for (int r = 0; r < c.ris_nx * c.ris_ny; ++r)
        z += ris_entry(r, f, g.ris_elev_aod, g.ris_azim_aod, c) * std::polar(1.0, rho(m, r)) *
             ris_entry(r, f, phi, psi, c);
    return z * bs_entry(b, f, g.bs_aoa, c) * std::polar(1.0, -2.0 * pi * f * tau);
}

inline std::vector<cd> atom(double phi, double psi, double tau, const Eigen::MatrixXd &rho,
                            const risce::LinkGeometry &g, const risce::SystemConfig &c)
{
    std::vector<cd> out;
    for (int kpos = 0; kpos < static_cast<int>(c.pilot_subcarriers.size()); ++kpos)
        for (int m = 0; m < c.num_pilot_symbols; ++m)
            for (int b = 0; b < c.num_bs_antennas; ++b)
                out.push_back(atom_entry(kpos, m, b, phi, psi, tau, rho, g, c));
    return out;
}

/// Solves A x = rhs by Gaussian elimination with partial pivoting (complex, dense, small).
inline std::vector<cd> gauss_solve(std::vector<std::vector<cd>> a, std::vector<cd> rhs)
{
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col)
    {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col]))
                piv = r;
        std::swap(a[col], a[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (std::size_t r = col + 1; r < n; ++r)
        {
            const cd f = a[r][col] / a[col][col];
            for (std::size_t c2 = col; c2 < n; ++c2)
                a[r][c2] -= f * a[col][c2];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<cd> x(n);
    for (std::size_t i = n; i-- > 0;)
    {
        cd s = rhs[i];
        for (std::size_t j = i + 1; j < n; ++j)
            s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

inline double rel_err(double a, double b, double floor = 1e-300)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

} // namespace oracle

namespace fixtures
{

/// N_b = 4, N_r = 2 x 2, L = 4, M = 4 on a 64-subcarrier, 600 MHz band.
inline risce::SystemConfig tiny_config()
{
    risce::SystemConfig c = risce::desk_config();
    c.num_bs_antennas = 4;
    c.ris_nx = 2;
    c.ris_ny = 2;
    c.num_pilot_symbols = 4;
    risce::set_pilot_count(c, 4);
    c.num_paths = 1;
    return c;
}

inline risce::LinkGeometry geometry(std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    return {u(rng), u(rng), u(rng)};
}

inline risce::CVector random_cvector(std::size_t n, std::mt19937_64 &rng)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    risce::CVector v(static_cast<Eigen::Index>(n));
    for (auto &x : v)
        x = {nd(rng), nd(rng)};
    return v;
}

} // namespace fixtures

#endif
