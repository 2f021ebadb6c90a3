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

#ifndef RISCE_SIGNAL_MODEL_HPP
#define RISCE_SIGNAL_MODEL_HPP

#include "risce/config.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace risce
{

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// One user-RIS path as seen through the cascaded channel.
struct PathParams
{
    cplx gain{0.0, 0.0};
    double elevation = 0.0; // phi, [-pi/2, pi/2)
    double azimuth = 0.0;   // psi, [-pi/2, pi/2)
    double delay = 0.0;     // tau, [0, max_delay)

    bool operator==(const PathParams &) const = default;
};

/// Fixed LoS geometry of the RIS-BS link; known at the receiver.
struct LinkGeometry
{
    double bs_aoa = 0.0;       // theta_b
    double ris_elev_aod = 0.0; // phi_r
    double ris_azim_aod = 0.0; // psi_r

    bool operator==(const LinkGeometry &) const = default;
};

struct ChannelRealization
{
    std::vector<PathParams> paths;
    LinkGeometry geometry;

    bool operator==(const ChannelRealization &) const = default;
};

/// Per-symbol RIS phase shifts rho_{m,r} in [0, 2 pi); row m is the diagonal of Omega_m.
class RisTrainingProfile
{
  public:
    RisTrainingProfile() = default;
    explicit RisTrainingProfile(Eigen::MatrixXd phases);

    /// i.i.d. uniform phases on [0, 2 pi).
    static RisTrainingProfile random(int num_symbols, int num_elements, std::mt19937_64 &rng);
    /// All-zero phases (Omega_m = I).
    static RisTrainingProfile identity(int num_symbols, int num_elements);

    const Eigen::MatrixXd &phases() const { return phases_; }
    int num_symbols() const { return static_cast<int>(phases_.rows()); }
    int num_elements() const { return static_cast<int>(phases_.cols()); }

  private:
    Eigen::MatrixXd phases_;
};

/// Stacked pilot vector; flat index = (k_pos * M + m) * N_b + b.
struct PilotObservation
{
    CVector y;
    std::vector<int> pilot_subcarriers;
    int num_pilot_symbols = 0;
    int num_bs_antennas = 0;
    double noise_variance = 0.0;

    int num_pilots() const { return static_cast<int>(pilot_subcarriers.size()); }
    std::size_t index(int k_pos, int m, int b) const
    {
        return (static_cast<std::size_t>(k_pos) * static_cast<std::size_t>(num_pilot_symbols) +
                static_cast<std::size_t>(m)) *
                   static_cast<std::size_t>(num_bs_antennas) +
               static_cast<std::size_t>(b);
    }
};

struct NoiseSpec
{
    bool enabled = false;
    std::uint64_t seed = 0;
};

/// varpi_r(phi, psi): normalized phase of RIS element r for a plane wave at (phi, psi).
double normalized_ris_angle(int r, double phi, double psi, const SystemConfig &cfg);

/// RIS steering vector a_R(f, phi, psi) at baseband offset f.
CVector ris_steering(double freq_offset_hz, double phi, double psi, const SystemConfig &cfg);

/// BS steering vector a_B(f, theta).
CVector bs_steering(double freq_offset_hz, double theta, const SystemConfig &cfg);

/// A_bar_k: M x N_r matrix whose row m is a_R(k df, phi_r, psi_r)^T Omega_m.
/// Throws std::invalid_argument when `subcarrier` is not a pilot.
CMatrix training_matrix(int subcarrier, const RisTrainingProfile &profile, const LinkGeometry &geometry,
                        const SystemConfig &cfg);

/// Atom value together with first and second partials in (phi, psi, tau).
/// Second-order partials are ordered (phi phi, phi psi, phi tau, psi psi, psi tau, tau tau).
struct AtomJet
{
    CVector value;
    std::array<CVector, 3> first;
    std::array<CVector, 6> second;
};

/// Reduced RIS response z_{k,m}(phi, psi) = [A_bar_k a_R(k df, phi, psi)]_m with its angle partials.
struct RisResponseJet
{
    CMatrix value; // L x M
    CMatrix d_phi;
    CMatrix d_psi;
};

/// Precomputed per-subcarrier quantities for one (config, profile, geometry) triple.
///
/// Every atom is a product z_{k,m}(phi, psi) * [a_B(k df)]_b * exp(-j 2 pi k df tau); the class
/// caches A_bar_k and a_B(k df) so atoms and their derivatives cost O(L M N_r + L M N_b).
class ObservationModel
{
  public:
    ObservationModel(const SystemConfig &cfg, const RisTrainingProfile &profile, const LinkGeometry &geometry);

    const SystemConfig &config() const { return cfg_; }
    const LinkGeometry &geometry() const { return geometry_; }
    int num_pilots() const { return static_cast<int>(cfg_.pilot_subcarriers.size()); }
    int num_symbols() const { return cfg_.num_pilot_symbols; }
    int num_antennas() const { return cfg_.num_bs_antennas; }
    std::size_t length() const { return cfg_.observation_length(); }
    std::size_t index(int k_pos, int m, int b) const
    {
        return (static_cast<std::size_t>(k_pos) * static_cast<std::size_t>(cfg_.num_pilot_symbols) +
                static_cast<std::size_t>(m)) *
                   static_cast<std::size_t>(cfg_.num_bs_antennas) +
               static_cast<std::size_t>(b);
    }

    double pilot_frequency(int k_pos) const { return frequencies_[static_cast<std::size_t>(k_pos)]; }
    const CMatrix &training(int k_pos) const { return training_[static_cast<std::size_t>(k_pos)]; }
    const CVector &bs_response(int k_pos) const { return bs_[static_cast<std::size_t>(k_pos)]; }

    /// exp(-j 2 pi f_k tau)
    cplx delay_phase(int k_pos, double tau) const;

    /// z_{k,m}(phi, psi) as an L x M matrix.
    CMatrix ris_response(double phi, double psi) const;
    RisResponseJet ris_response_jet(double phi, double psi) const;

    CVector atom(double phi, double psi, double tau) const;
    AtomJet atom_jet(double phi, double psi, double tau) const;

    /// Expands an L x M response with delay tau into a full-length atom.
    CVector expand(const CMatrix &response, double tau) const;

    /// u_{k,m} = sum_b conj([a_B(k df)]_b) y_{k,m,b}; the sufficient statistic for atom correlations.
    CMatrix project_bs(const CVector &y) const;

  private:
    SystemConfig cfg_;
    LinkGeometry geometry_;
    std::vector<double> frequencies_;
    std::vector<CMatrix> training_;
    std::vector<CVector> bs_;
};

/// f(phi, psi, tau) of length L M N_b.
CVector atom(double phi, double psi, double tau, const RisTrainingProfile &profile, const LinkGeometry &geometry,
             const SystemConfig &cfg);

/// y = sum_p g_p f(phi_p, psi_p, tau_p) + v with v ~ CN(0, sigma_v^2 I); `noise_variance` is the one in cfg.
PilotObservation synthesize_pilots(const ChannelRealization &channel, const RisTrainingProfile &profile,
                                   const SystemConfig &cfg, const NoiseSpec &noise);

/// Noise-free superposition sum_p g_p f_p on a prepared model.
CVector noiseless_observation(const std::vector<PathParams> &paths, const ObservationModel &model);

/// Draws P paths (angles U[-pi/2, pi/2), delays U[0, min(32/W, tau_max)), gains CN(0, 1)) and a
/// fixed link geometry (all three angles U[-pi/2, pi/2)).
ChannelRealization sample_channel(const SystemConfig &cfg, int num_paths, std::mt19937_64 &rng);

/// sigma_v^2 = sigma_t^2 10^{-snr/10}, sigma_t^2 = ||noiseless y||^2 / (L M N_b).
double snr_to_noise_variance(double snr_db, const ChannelRealization &channel, const RisTrainingProfile &profile,
                             const SystemConfig &cfg);

/// Average per-entry power of the noise-free observation.
double signal_power(const ChannelRealization &channel, const RisTrainingProfile &profile, const SystemConfig &cfg);

} // namespace risce

#endif
