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

#include "risce/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace risce
{

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t pilot_position(const SystemConfig &cfg, int subcarrier)
{
    const auto it = std::find(cfg.pilot_subcarriers.begin(), cfg.pilot_subcarriers.end(), subcarrier);
    if (it == cfg.pilot_subcarriers.end())
        throw std::invalid_argument("subcarrier " + std::to_string(subcarrier) + " is not a pilot subcarrier");
    return static_cast<std::size_t>(it - cfg.pilot_subcarriers.begin());
}

double squint(double freq_offset_hz, const SystemConfig &cfg) { return 1.0 + freq_offset_hz / cfg.carrier_freq_hz; }

// Steering entries and their partials for one subcarrier.
struct SteeringJet
{
    CVector a, a_phi, a_psi, a_phiphi, a_phipsi, a_psipsi;
};

SteeringJet steering_jet(double freq_offset_hz, double phi, double psi, const SystemConfig &cfg, bool second)
{
    const int nr = cfg.num_ris_elements();
    const int ny = cfg.ris_ny;
    const double c = cfg.element_spacing_m / cfg.wavelength();
    const cplx alpha(0.0, -kTwoPi * squint(freq_offset_hz, cfg));
    const double sphi = std::sin(phi), cphi = std::cos(phi);
    const double spsi = std::sin(psi), cpsi = std::cos(psi);

    SteeringJet jet;
    jet.a = ris_steering(freq_offset_hz, phi, psi, cfg);
    jet.a_phi.resize(nr);
    jet.a_psi.resize(nr);
    if (second)
    {
        jet.a_phiphi.resize(nr);
        jet.a_phipsi.resize(nr);
        jet.a_psipsi.resize(nr);
    }
    for (int r = 0; r < nr; ++r)
    {
        const double i = static_cast<double>(r / ny);
        const double j = static_cast<double>(r % ny);
        const double s = i * spsi + j * cpsi;  // d/dpsi -> s1
        const double s1 = i * cpsi - j * spsi; // d/dpsi -> -s
        const double w = c * sphi * s;
        const double w_phi = c * cphi * s;
        const double w_psi = c * sphi * s1;
        const cplx a = jet.a[r];
        jet.a_phi[r] = alpha * w_phi * a;
        jet.a_psi[r] = alpha * w_psi * a;
        if (second)
        {
            const double w_phipsi = c * cphi * s1;
            jet.a_phiphi[r] = (alpha * alpha * w_phi * w_phi - alpha * w) * a;
            jet.a_phipsi[r] = (alpha * alpha * w_phi * w_psi + alpha * w_phipsi) * a;
            jet.a_psipsi[r] = (alpha * alpha * w_psi * w_psi - alpha * w) * a;
        }
    }
    return jet;
}

} // namespace

RisTrainingProfile::RisTrainingProfile(Eigen::MatrixXd phases) : phases_(std::move(phases))
{
    if (phases_.rows() < 1 || phases_.cols() < 1)
        throw std::invalid_argument("RisTrainingProfile: needs at least one symbol and one element");
    for (Eigen::Index m = 0; m < phases_.rows(); ++m)
        for (Eigen::Index r = 0; r < phases_.cols(); ++r)
        {
            const double v = phases_(m, r);
            if (!(v >= 0.0 && v < kTwoPi))
                throw std::invalid_argument("RisTrainingProfile: phase outside [0, 2pi) at (" + std::to_string(m) +
                                            ", " + std::to_string(r) + ")");
        }
}

RisTrainingProfile RisTrainingProfile::random(int num_symbols, int num_elements, std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> uni(0.0, kTwoPi);
    Eigen::MatrixXd phases(num_symbols, num_elements);
    for (int m = 0; m < num_symbols; ++m)
        for (int r = 0; r < num_elements; ++r)
            phases(m, r) = uni(rng);
    return RisTrainingProfile(std::move(phases));
}

RisTrainingProfile RisTrainingProfile::identity(int num_symbols, int num_elements)
{
    return RisTrainingProfile(Eigen::MatrixXd::Zero(num_symbols, num_elements));
}

double normalized_ris_angle(int r, double phi, double psi, const SystemConfig &cfg)
{
    if (r < 0 || r >= cfg.num_ris_elements())
        throw std::out_of_range("normalized_ris_angle: element index " + std::to_string(r) + " out of range");
    const int ny = cfg.ris_ny;
    const double j = static_cast<double>(r % ny);
    const double i = static_cast<double>((r - r % ny) / ny);
    const double sphi = std::sin(phi);
    return cfg.element_spacing_m / cfg.wavelength() * (i * sphi * std::sin(psi) + j * sphi * std::cos(psi));
}

CVector ris_steering(double freq_offset_hz, double phi, double psi, const SystemConfig &cfg)
{
    const int nr = cfg.num_ris_elements();
    const double scale = -kTwoPi * squint(freq_offset_hz, cfg);
    CVector a(nr);
    for (int r = 0; r < nr; ++r)
        a[r] = std::polar(1.0, scale * normalized_ris_angle(r, phi, psi, cfg));
    return a;
}

CVector bs_steering(double freq_offset_hz, double theta, const SystemConfig &cfg)
{
    const int nb = cfg.num_bs_antennas;
    const double scale =
        -kTwoPi * squint(freq_offset_hz, cfg) * cfg.element_spacing_m * std::sin(theta) / cfg.wavelength();
    CVector a(nb);
    for (int b = 0; b < nb; ++b)
        a[b] = std::polar(1.0, scale * b);
    return a;
}

CMatrix training_matrix(int subcarrier, const RisTrainingProfile &profile, const LinkGeometry &geometry,
                        const SystemConfig &cfg)
{
    pilot_position(cfg, subcarrier);
    if (profile.num_elements() != cfg.num_ris_elements())
        throw std::invalid_argument("training_matrix: profile has wrong number of RIS elements");
    const double f = subcarrier * cfg.subcarrier_spacing();
    const CVector aod = ris_steering(f, geometry.ris_elev_aod, geometry.ris_azim_aod, cfg);
    const int m_count = profile.num_symbols();
    const int nr = profile.num_elements();
    CMatrix a_bar(m_count, nr);
    for (int m = 0; m < m_count; ++m)
        for (int r = 0; r < nr; ++r)
            a_bar(m, r) = aod[r] * std::polar(1.0, profile.phases()(m, r));
    return a_bar;
}

ObservationModel::ObservationModel(const SystemConfig &cfg, const RisTrainingProfile &profile,
                                   const LinkGeometry &geometry)
    : cfg_(cfg), geometry_(geometry)
{
    if (profile.num_symbols() != cfg.num_pilot_symbols)
        throw std::invalid_argument("ObservationModel: profile rows must equal num_pilot_symbols");
    if (profile.num_elements() != cfg.num_ris_elements())
        throw std::invalid_argument("ObservationModel: profile columns must equal N_x * N_y");
    const double df = cfg.subcarrier_spacing();
    for (int k : cfg.pilot_subcarriers)
    {
        const double f = k * df;
        frequencies_.push_back(f);
        training_.push_back(training_matrix(k, profile, geometry, cfg));
        bs_.push_back(bs_steering(f, geometry.bs_aoa, cfg));
    }
}

cplx ObservationModel::delay_phase(int k_pos, double tau) const
{
    return std::polar(1.0, -kTwoPi * pilot_frequency(k_pos) * tau);
}

CMatrix ObservationModel::ris_response(double phi, double psi) const
{
    const int l_count = num_pilots();
    CMatrix z(l_count, cfg_.num_pilot_symbols);
    for (int k = 0; k < l_count; ++k)
        z.row(k) = (training(k) * ris_steering(pilot_frequency(k), phi, psi, cfg_)).transpose();
    return z;
}

RisResponseJet ObservationModel::ris_response_jet(double phi, double psi) const
{
    const int l_count = num_pilots();
    const int m_count = cfg_.num_pilot_symbols;
    RisResponseJet out{CMatrix(l_count, m_count), CMatrix(l_count, m_count), CMatrix(l_count, m_count)};
    for (int k = 0; k < l_count; ++k)
    {
        const SteeringJet s = steering_jet(pilot_frequency(k), phi, psi, cfg_, false);
        out.value.row(k) = (training(k) * s.a).transpose();
        out.d_phi.row(k) = (training(k) * s.a_phi).transpose();
        out.d_psi.row(k) = (training(k) * s.a_psi).transpose();
    }
    return out;
}

CVector ObservationModel::expand(const CMatrix &response, double tau) const
{
    const int l_count = num_pilots();
    const int m_count = cfg_.num_pilot_symbols;
    const int nb = cfg_.num_bs_antennas;
    CVector f(static_cast<Eigen::Index>(length()));
    for (int k = 0; k < l_count; ++k)
    {
        const cplx e = delay_phase(k, tau);
        const CVector &ab = bs_response(k);
        for (int m = 0; m < m_count; ++m)
            for (int b = 0; b < nb; ++b)
                f[static_cast<Eigen::Index>(index(k, m, b))] = response(k, m) * ab[b] * e;
    }
    return f;
}

CVector ObservationModel::atom(double phi, double psi, double tau) const
{
    return expand(ris_response(phi, psi), tau);
}

AtomJet ObservationModel::atom_jet(double phi, double psi, double tau) const
{
    const int l_count = num_pilots();
    const int m_count = cfg_.num_pilot_symbols;
    const int nb = cfg_.num_bs_antennas;
    const auto n = static_cast<Eigen::Index>(length());

    AtomJet jet;
    jet.value.resize(n);
    for (auto &v : jet.first)
        v.resize(n);
    for (auto &v : jet.second)
        v.resize(n);

    for (int k = 0; k < l_count; ++k)
    {
        const SteeringJet s = steering_jet(pilot_frequency(k), phi, psi, cfg_, true);
        const CMatrix &a_bar = training(k);
        const CVector z = a_bar * s.a;
        const CVector z_phi = a_bar * s.a_phi;
        const CVector z_psi = a_bar * s.a_psi;
        const CVector z_phiphi = a_bar * s.a_phiphi;
        const CVector z_phipsi = a_bar * s.a_phipsi;
        const CVector z_psipsi = a_bar * s.a_psipsi;
        const cplx e = delay_phase(k, tau);
        const cplx dt(0.0, -kTwoPi * pilot_frequency(k)); // d/dtau of the delay phase, relative
        const CVector &ab = bs_response(k);
        for (int m = 0; m < m_count; ++m)
            for (int b = 0; b < nb; ++b)
            {
                const auto idx = static_cast<Eigen::Index>(index(k, m, b));
                const cplx w = ab[b] * e;
                jet.value[idx] = z[m] * ab[b] * e;
                jet.first[0][idx] = z_phi[m] * w;
                jet.first[1][idx] = z_psi[m] * w;
                jet.first[2][idx] = dt * z[m] * w;
                jet.second[0][idx] = z_phiphi[m] * w;
                jet.second[1][idx] = z_phipsi[m] * w;
                jet.second[2][idx] = dt * z_phi[m] * w;
                jet.second[3][idx] = z_psipsi[m] * w;
                jet.second[4][idx] = dt * z_psi[m] * w;
                jet.second[5][idx] = dt * dt * z[m] * w;
            }
    }
    return jet;
}

CMatrix ObservationModel::project_bs(const CVector &y) const
{
    if (static_cast<std::size_t>(y.size()) != length())
        throw std::invalid_argument("project_bs: observation length mismatch");
    const int l_count = num_pilots();
    const int m_count = cfg_.num_pilot_symbols;
    const int nb = cfg_.num_bs_antennas;
    CMatrix u(l_count, m_count);
    for (int k = 0; k < l_count; ++k)
    {
        const CVector &ab = bs_response(k);
        for (int m = 0; m < m_count; ++m)
        {
            cplx acc = 0.0;
            for (int b = 0; b < nb; ++b)
                acc += std::conj(ab[b]) * y[static_cast<Eigen::Index>(index(k, m, b))];
            u(k, m) = acc;
        }
    }
    return u;
}

CVector atom(double phi, double psi, double tau, const RisTrainingProfile &profile, const LinkGeometry &geometry,
             const SystemConfig &cfg)
{
    return ObservationModel(cfg, profile, geometry).atom(phi, psi, tau);
}

CVector noiseless_observation(const std::vector<PathParams> &paths, const ObservationModel &model)
{
    CVector y = CVector::Zero(static_cast<Eigen::Index>(model.length()));
    for (const auto &p : paths)
        y += p.gain * model.atom(p.elevation, p.azimuth, p.delay);
    return y;
}

PilotObservation synthesize_pilots(const ChannelRealization &channel, const RisTrainingProfile &profile,
                                   const SystemConfig &cfg, const NoiseSpec &noise)
{
    if (channel.paths.empty())
        throw std::invalid_argument("synthesize_pilots: channel has no paths");
    for (const auto &p : channel.paths)
        if (!(p.delay >= 0.0 && p.delay < cfg.delay_period()))
            throw std::invalid_argument("synthesize_pilots: path delay outside [0, 1/delta_f)");

    const ObservationModel model(cfg, profile, channel.geometry);
    PilotObservation obs;
    obs.y = noiseless_observation(channel.paths, model);
    obs.pilot_subcarriers = cfg.pilot_subcarriers;
    obs.num_pilot_symbols = cfg.num_pilot_symbols;
    obs.num_bs_antennas = cfg.num_bs_antennas;
    obs.noise_variance = cfg.noise_variance;

    if (noise.enabled)
    {
        std::mt19937_64 rng(noise.seed);
        std::normal_distribution<double> normal(0.0, std::sqrt(cfg.noise_variance / 2.0));
        for (Eigen::Index i = 0; i < obs.y.size(); ++i)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            obs.y[i] += cplx(re, im);
        }
    }
    return obs;
}

ChannelRealization sample_channel(const SystemConfig &cfg, int num_paths, std::mt19937_64 &rng)
{
    if (num_paths < 1)
        throw std::invalid_argument("sample_channel: need at least one path");
    constexpr double half_pi = std::numbers::pi / 2.0;
    std::uniform_real_distribution<double> angle(-half_pi, half_pi);
    std::uniform_real_distribution<double> delay(0.0, std::min(32.0 / cfg.bandwidth_hz, cfg.max_delay_s));
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));

    ChannelRealization ch;
    ch.geometry.bs_aoa = angle(rng);
    ch.geometry.ris_elev_aod = angle(rng);
    ch.geometry.ris_azim_aod = angle(rng);
    ch.paths.resize(static_cast<std::size_t>(num_paths));
    for (auto &p : ch.paths)
    {
        const double re = normal(rng);
        const double im = normal(rng);
        p.gain = cplx(re, im);
        p.elevation = angle(rng);
        p.azimuth = angle(rng);
        p.delay = delay(rng);
    }
    return ch;
}

double signal_power(const ChannelRealization &channel, const RisTrainingProfile &profile, const SystemConfig &cfg)
{
    const ObservationModel model(cfg, profile, channel.geometry);
    return noiseless_observation(channel.paths, model).squaredNorm() / static_cast<double>(model.length());
}

double snr_to_noise_variance(double snr_db, const ChannelRealization &channel, const RisTrainingProfile &profile,
                             const SystemConfig &cfg)
{
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("snr_to_noise_variance: SNR must be finite");
    const double power = signal_power(channel, profile, cfg);
    if (!(power > 0.0))
        throw std::domain_error("snr_to_noise_variance: signal has zero power");
    return power * std::pow(10.0, -snr_db / 10.0);
}

} // namespace risce
