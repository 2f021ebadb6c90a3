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

#include "risce/crlb.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace risce
{

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx unit_phase(cplx g) { return std::polar(1.0, std::arg(g)); }

struct ScaledInverse
{
    Eigen::MatrixXd inverse;
    double condition = std::numeric_limits<double>::infinity();
    bool ok = false;
};

// Invert a symmetric PSD matrix through its unit-diagonal rescaling.
ScaledInverse scaled_inverse(const Eigen::MatrixXd &m)
{
    ScaledInverse out;
    const Eigen::Index n = m.rows();
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (!(m(i, i) > 0.0) || !std::isfinite(m(i, i)))
            return out;
        d[i] = 1.0 / std::sqrt(m(i, i));
    }
    const Eigen::MatrixXd s = d.asDiagonal() * m * d.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    out.condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (!(out.condition <= kFimConditionLimit))
        return out;
    const Eigen::MatrixXd s_inv =
        eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    out.inverse = d.asDiagonal() * s_inv * d.asDiagonal();
    out.ok = true;
    return out;
}

} // namespace

Eigen::VectorXd to_param_vector(const std::vector<PathParams> &paths)
{
    Eigen::VectorXd xi(5 * static_cast<Eigen::Index>(paths.size()));
    for (std::size_t p = 0; p < paths.size(); ++p)
    {
        const auto o = 5 * static_cast<Eigen::Index>(p);
        xi[o + 0] = std::abs(paths[p].gain);
        xi[o + 1] = std::arg(paths[p].gain);
        xi[o + 2] = paths[p].elevation;
        xi[o + 3] = paths[p].azimuth;
        xi[o + 4] = paths[p].delay;
    }
    return xi;
}

std::vector<PathParams> from_param_vector(const Eigen::VectorXd &xi)
{
    if (xi.size() % 5 != 0)
        throw std::invalid_argument("from_param_vector: length must be a multiple of 5");
    std::vector<PathParams> paths(static_cast<std::size_t>(xi.size() / 5));
    for (std::size_t p = 0; p < paths.size(); ++p)
    {
        const auto o = 5 * static_cast<Eigen::Index>(p);
        paths[p].gain = std::polar(xi[o + 0], xi[o + 1]);
        paths[p].elevation = xi[o + 2];
        paths[p].azimuth = xi[o + 3];
        paths[p].delay = xi[o + 4];
    }
    return paths;
}

SteeringPartials steering_derivatives(double phi, double psi, int k_pos, int m, int b, const ObservationModel &model)
{
    const SystemConfig &cfg = model.config();
    const int ny = cfg.ris_ny;
    const double c = cfg.element_spacing_m / cfg.wavelength();
    const double f = model.pilot_frequency(k_pos);
    const cplx alpha(0.0, -kTwoPi * (1.0 + f / cfg.carrier_freq_hz));
    const CVector a = ris_steering(f, phi, psi, cfg);

    // a_check_{k,m,b} = [a_B]_b a_R^T(phi_r, psi_r) Omega_m, i.e. row m of A_bar_k scaled by [a_B]_b
    const cplx ab = model.bs_response(k_pos)[b];
    const auto row = model.training(k_pos).row(m);

    SteeringPartials out{0.0, 0.0, 0.0};
    for (int r = 0; r < cfg.num_ris_elements(); ++r)
    {
        const double i = static_cast<double>(r / ny);
        const double j = static_cast<double>(r % ny);
        const double w_phi = c * std::cos(phi) * (i * std::sin(psi) + j * std::cos(psi));
        const double w_psi = c * std::sin(phi) * (i * std::cos(psi) - j * std::sin(psi));
        const cplx lead = ab * row[r];
        out.value += lead * a[r];
        out.d_phi += lead * a[r] * (alpha * w_phi);
        out.d_psi += lead * a[r] * (alpha * w_psi);
    }
    return out;
}

FimBlock fim_block(const PathParams &path, const ObservationModel &model, double noise_variance)
{
    if (!(noise_variance > 0.0))
        throw std::invalid_argument("fim_block: noise variance must be positive");

    const RisResponseJet jet = model.ris_response_jet(path.elevation, path.azimuth);
    Eigen::Matrix3cd b_sum = Eigen::Matrix3cd::Zero();   // B_p
    Eigen::Matrix3cd b_check = Eigen::Matrix3cd::Zero(); // B_check_p, weighted by k
    double c_sum = 0.0;                                  // C_p, weighted by k^2

    const auto &pilots = model.config().pilot_subcarriers;
    for (int k = 0; k < model.num_pilots(); ++k)
    {
        const double bs_power = model.bs_response(k).squaredNorm();
        const double kk = pilots[static_cast<std::size_t>(k)];
        for (int m = 0; m < model.num_symbols(); ++m)
        {
            const Eigen::Vector3cd x(jet.value(k, m), jet.d_phi(k, m), jet.d_psi(k, m));
            const Eigen::Matrix3cd d = bs_power * (x.conjugate() * x.transpose());
            b_sum += d;
            b_check += kk * d;
            c_sum += kk * kk * bs_power * std::norm(x[0]);
        }
    }

    const double a = std::abs(path.gain);
    const double a2 = a * a;
    const double kappa = kTwoPi * model.config().subcarrier_spacing();

    Matrix5d f;
    f(0, 0) = std::real(b_sum(0, 0));
    f(0, 1) = -a * std::imag(b_sum(0, 0));
    f(0, 2) = a * std::real(b_sum(0, 1));
    f(0, 3) = a * std::real(b_sum(0, 2));
    f(0, 4) = kappa * a * std::imag(b_check(0, 0));
    f(1, 1) = a2 * std::real(b_sum(0, 0));
    f(1, 2) = a2 * std::imag(b_sum(0, 1));
    f(1, 3) = a2 * std::imag(b_sum(0, 2));
    f(1, 4) = -kappa * a2 * std::real(b_check(0, 0));
    f(2, 2) = a2 * std::real(b_sum(1, 1));
    f(2, 3) = a2 * std::real(b_sum(1, 2));
    f(2, 4) = kappa * a2 * std::imag(b_check(1, 0));
    f(3, 3) = a2 * std::real(b_sum(2, 2));
    f(3, 4) = kappa * a2 * std::imag(b_check(2, 0));
    f(4, 4) = kappa * kappa * a2 * c_sum;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < i; ++j)
            f(i, j) = f(j, i);

    FimBlock block;
    block.matrix = (2.0 / noise_variance) * f;
    const ScaledInverse inv = scaled_inverse(block.matrix);
    block.condition = inv.condition;
    block.singular = !inv.ok;
    return block;
}

bool FisherInformation::all_available() const
{
    for (bool ok : path_available)
        if (!ok)
            return false;
    return true;
}

FisherInformation assemble_fim(const std::vector<PathParams> &paths, const ObservationModel &model,
                               double noise_variance, FimMode mode)
{
    if (!(noise_variance > 0.0))
        throw std::invalid_argument("assemble_fim: noise variance must be positive");
    const auto n = 5 * static_cast<Eigen::Index>(paths.size());
    FisherInformation info;
    info.mode = mode;
    info.fim = Eigen::MatrixXd::Zero(n, n);
    info.inverse = Eigen::MatrixXd::Zero(n, n);
    for (const auto &p : paths)
        info.blocks.push_back(fim_block(p, model, noise_variance));

    if (mode == FimMode::BlockDiagonal)
    {
        for (std::size_t p = 0; p < paths.size(); ++p)
        {
            const auto o = 5 * static_cast<Eigen::Index>(p);
            info.fim.block<5, 5>(o, o) = info.blocks[p].matrix;
            const ScaledInverse inv = scaled_inverse(info.blocks[p].matrix);
            info.path_available.push_back(inv.ok);
            if (inv.ok)
                info.inverse.block<5, 5>(o, o) = inv.inverse;
        }
    }
    else
    {
        const CMatrix j = csi_jacobian(paths, model);
        info.fim = (2.0 / noise_variance) * (j.adjoint() * j).real();
        const ScaledInverse inv = scaled_inverse(info.fim);
        info.path_available.assign(paths.size(), inv.ok);
        if (inv.ok)
            info.inverse = inv.inverse;
    }
    return info;
}

cplx csi_value(int k_pos, int m, int b, const std::vector<PathParams> &paths, const ObservationModel &model)
{
    cplx h = 0.0;
    const cplx ab = model.bs_response(k_pos)[b];
    for (const auto &p : paths)
    {
        const CVector a = ris_steering(model.pilot_frequency(k_pos), p.elevation, p.azimuth, model.config());
        const CVector z_all = model.training(k_pos) * a;
        const cplx z = z_all[m];
        h += p.gain * (z * ab * model.delay_phase(k_pos, p.delay));
    }
    return h;
}

Eigen::VectorXcd csi_gradient(int k_pos, int m, int b, const std::vector<PathParams> &paths,
                              const ObservationModel &model)
{
    Eigen::VectorXcd d(5 * static_cast<Eigen::Index>(paths.size()));
    const double f = model.pilot_frequency(k_pos);
    for (std::size_t p = 0; p < paths.size(); ++p)
    {
        const PathParams &pp = paths[p];
        const SteeringPartials s = steering_derivatives(pp.elevation, pp.azimuth, k_pos, m, b, model);
        const cplx e = model.delay_phase(k_pos, pp.delay);
        const cplx unit = unit_phase(pp.gain);
        const double mag = std::abs(pp.gain);
        const auto o = 5 * static_cast<Eigen::Index>(p);
        d[o + 0] = unit * s.value * e;
        d[o + 1] = cplx(0.0, 1.0) * mag * unit * s.value * e;
        d[o + 2] = mag * unit * e * s.d_phi;
        d[o + 3] = mag * unit * e * s.d_psi;
        d[o + 4] = cplx(0.0, -kTwoPi * f) * mag * unit * s.value * e;
    }
    return d;
}

CMatrix csi_jacobian(const std::vector<PathParams> &paths, const ObservationModel &model)
{
    const auto n = static_cast<Eigen::Index>(model.length());
    CMatrix j(n, 5 * static_cast<Eigen::Index>(paths.size()));
    for (std::size_t p = 0; p < paths.size(); ++p)
    {
        const PathParams &pp = paths[p];
        const RisResponseJet jet = model.ris_response_jet(pp.elevation, pp.azimuth);
        const cplx unit = unit_phase(pp.gain);
        const double mag = std::abs(pp.gain);
        const auto o = 5 * static_cast<Eigen::Index>(p);
        for (int k = 0; k < model.num_pilots(); ++k)
        {
            const cplx e = model.delay_phase(k, pp.delay);
            const cplx dt(0.0, -kTwoPi * model.pilot_frequency(k));
            const CVector &ab = model.bs_response(k);
            for (int m = 0; m < model.num_symbols(); ++m)
                for (int b = 0; b < model.num_antennas(); ++b)
                {
                    const auto row = static_cast<Eigen::Index>(model.index(k, m, b));
                    const cplx base = unit * ab[b] * e;
                    j(row, o + 0) = base * jet.value(k, m);
                    j(row, o + 1) = cplx(0.0, 1.0) * mag * base * jet.value(k, m);
                    j(row, o + 2) = mag * base * jet.d_phi(k, m);
                    j(row, o + 3) = mag * base * jet.d_psi(k, m);
                    j(row, o + 4) = dt * mag * base * jet.value(k, m);
                }
        }
    }
    return j;
}

std::optional<double> csi_lower_bound(int k_pos, int m, int b, const std::vector<PathParams> &paths,
                                      const FisherInformation &info, const ObservationModel &model)
{
    if (!info.all_available())
        return std::nullopt;
    const Eigen::VectorXcd d = csi_gradient(k_pos, m, b, paths, model);
    const cplx q = d.dot(info.inverse.cast<cplx>() * d);
    return std::real(q);
}

CrlbReport compute_crlb(const std::vector<PathParams> &paths, const ObservationModel &model, double noise_variance,
                        FimMode mode)
{
    CrlbReport report;
    report.noise_variance = noise_variance;
    report.mode = mode;
    const FisherInformation info = assemble_fim(paths, model, noise_variance, mode);
    for (std::size_t p = 0; p < paths.size(); ++p)
    {
        report.block_conditions.push_back(info.blocks[p].condition);
        report.flagged.push_back(!info.path_available[p]);
        if (info.path_available[p])
        {
            const auto o = 5 * static_cast<Eigen::Index>(p);
            report.variance_bounds.emplace_back(info.inverse.block<5, 5>(o, o).diagonal());
        }
        else
        {
            report.variance_bounds.emplace_back(std::nullopt);
        }
    }

    const CMatrix j = csi_jacobian(paths, model);
    const CVector h = noiseless_observation(paths, model);
    report.channel_power = h.squaredNorm();
    report.csi_bounds.assign(static_cast<std::size_t>(h.size()), std::numeric_limits<double>::quiet_NaN());
    if (info.all_available())
    {
        const Eigen::MatrixXcd s = info.inverse.cast<cplx>();
        double total = 0.0;
        for (Eigen::Index i = 0; i < j.rows(); ++i)
        {
            const Eigen::VectorXcd d = j.row(i).transpose();
            const double lb = std::real(d.dot(s * d));
            report.csi_bounds[static_cast<std::size_t>(i)] = lb;
            total += lb;
        }
        if (report.channel_power > 0.0)
            report.aggregate = total / report.channel_power;
    }
    return report;
}

double aggregate_channel_bound(const std::vector<PathParams> &paths, const ObservationModel &model,
                               double noise_variance, FimMode mode)
{
    const CVector h = noiseless_observation(paths, model);
    const double power = h.squaredNorm();
    if (!(power > 0.0))
        throw std::domain_error("aggregate_channel_bound: zero channel power");
    const FisherInformation info = assemble_fim(paths, model, noise_variance, mode);
    if (!info.all_available())
        throw std::domain_error("aggregate_channel_bound: singular Fisher block");
    const CMatrix j = csi_jacobian(paths, model);
    const CMatrix q = j.adjoint() * j;
    const double total = (info.inverse.cast<cplx>().cwiseProduct(q)).sum().real();
    return total / power;
}

} // namespace risce
