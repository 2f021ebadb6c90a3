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

#include "risce/nomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace risce
{

namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2.0;

std::vector<double> uniform_points(double start, double step, std::size_t count)
{
    std::vector<double> pts(count);
    for (std::size_t i = 0; i < count; ++i)
        pts[i] = start + static_cast<double>(i) * step;
    return pts;
}

std::size_t angle_count(double rate, int elements)
{
    return static_cast<std::size_t>(std::max(1L, std::lround(rate * elements)));
}

double wrap_delay(double tau, double period)
{
    double t = std::fmod(tau, period);
    if (t < 0.0)
        t += period;
    if (t >= period)
        t = 0.0;
    return t;
}

// The atom sees the angles only through sin(phi) * (sin(psi), cos(psi)), so
// (phi, psi) ~ (pi - phi, psi) ~ (-phi, psi + pi).
void fold_angles(double &phi, double &psi)
{
    static const double upper = std::nextafter(kHalfPi, 0.0);
    if (!std::isfinite(phi))
        phi = 0.0;
    if (!std::isfinite(psi))
        psi = 0.0;
    phi = std::remainder(phi, 2.0 * kPi);
    if (phi > kHalfPi)
        phi = kPi - phi;
    else if (phi < -kHalfPi)
        phi = -kPi - phi;
    const double turns = std::floor((psi + kHalfPi) / kPi);
    psi -= turns * kPi;
    if (psi >= kHalfPi || psi < -kHalfPi)
        psi = -kHalfPi;
    if (std::fmod(std::abs(turns), 2.0) == 1.0)
        phi = -phi;
    phi = std::min(phi, upper);
}

int steps_per_cell(double coarse_step, double precise_step)
{
    return std::max(1, static_cast<int>(std::lround(coarse_step / precise_step)));
}

} // namespace

GridSpec GridSpec::make(const SystemConfig &cfg, const GridRates &rates)
{
    GridSpec g;
    g.rates = rates;
    const std::size_t n_phi = angle_count(rates.phi, cfg.ris_nx);
    const std::size_t n_psi = angle_count(rates.psi, cfg.ris_ny);
    g.phi_step = std::numbers::pi / static_cast<double>(n_phi);
    g.psi_step = std::numbers::pi / static_cast<double>(n_psi);
    g.phi_points = uniform_points(-kHalfPi, g.phi_step, n_phi);
    g.psi_points = uniform_points(-kHalfPi, g.psi_step, n_psi);

    const double cells = rates.tau * cfg.num_subcarriers * cfg.max_delay_s * cfg.subcarrier_spacing();
    const auto n_tau = static_cast<std::size_t>(std::max(1.0, std::ceil(cells - 1e-9)));
    g.tau_step = 1.0 / (rates.tau * cfg.num_subcarriers * cfg.subcarrier_spacing());
    g.tau_points = uniform_points(0.0, g.tau_step, n_tau);
    return g;
}

std::string to_string(StopReason reason)
{
    return reason == StopReason::Threshold ? "threshold" : "max-paths";
}

StopReason stop_reason_from_string(const std::string &s)
{
    if (s == "threshold")
        return StopReason::Threshold;
    if (s == "max-paths")
        return StopReason::MaxPaths;
    throw std::invalid_argument("unknown stop reason '" + s + "'");
}

double stopping_threshold(double noise_variance, double false_alarm_rate, std::size_t observation_length)
{
    if (!(false_alarm_rate > 0.0 && false_alarm_rate < 1.0))
        throw std::domain_error("stopping_threshold: false alarm rate must lie in (0, 1)");
    if (observation_length == 0)
        throw std::domain_error("stopping_threshold: empty observation");
    const double n = static_cast<double>(observation_length);
    // 1 - (1 - P_fa)^{1/n}, evaluated without cancellation
    const double tail = -std::expm1(std::log1p(-false_alarm_rate) / n);
    return -noise_variance * std::log(tail);
}

double stopping_threshold(const SystemConfig &cfg)
{
    return stopping_threshold(cfg.noise_variance, cfg.false_alarm_rate, cfg.observation_length());
}

double correlation_score(const CVector &atom, const CVector &residual)
{
    if (atom.size() != residual.size())
        throw std::invalid_argument("correlation_score: length mismatch");
    const double norm = atom.squaredNorm();
    if (!(norm > 0.0))
        throw std::invalid_argument("correlation_score: zero-norm atom");
    return std::norm(atom.dot(residual)) / norm;
}

cplx gain_ls_single(const CVector &residual, const CVector &atom)
{
    if (atom.size() != residual.size())
        throw std::invalid_argument("gain_ls_single: length mismatch");
    const double norm = atom.squaredNorm();
    if (!(norm > 0.0))
        throw std::invalid_argument("gain_ls_single: zero-norm atom");
    return atom.dot(residual) / norm;
}

double newton_objective(cplx gain, const CVector &atom, const CVector &residual)
{
    return 2.0 * std::real(residual.dot(atom) * gain) - std::norm(gain) * atom.squaredNorm();
}

double newton_objective(cplx gain, double phi, double psi, double tau, const CVector &residual,
                        const ObservationModel &model)
{
    return newton_objective(gain, model.atom(phi, psi, tau), residual);
}

NewtonDerivatives newton_derivatives(cplx gain, double phi, double psi, double tau, const CVector &residual,
                                     const ObservationModel &model)
{
    const AtomJet jet = model.atom_jet(phi, psi, tau);
    const CVector mismatch = residual - gain * jet.value;
    const double g2 = std::norm(gain);

    NewtonDerivatives d;
    d.objective = newton_objective(gain, jet.value, residual);
    for (int x = 0; x < 3; ++x)
        d.gradient[x] = 2.0 * std::real(gain * mismatch.dot(jet.first[static_cast<std::size_t>(x)]));

    static constexpr int slot[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
        {
            const CVector &f_ab = jet.second[static_cast<std::size_t>(slot[a][b])];
            const cplx cross = jet.first[static_cast<std::size_t>(b)].dot(jet.first[static_cast<std::size_t>(a)]);
            const double h = 2.0 * std::real(gain * mismatch.dot(f_ab) - g2 * cross);
            d.hessian(a, b) = h;
            d.hessian(b, a) = h;
        }

    const double fnorm = jet.value.squaredNorm();
    if (fnorm > 0.0)
    {
        const cplx rf = residual.dot(jet.value);
        const Eigen::Vector2d grad_g(2.0 * std::real(rf) - 2.0 * gain.real() * fnorm,
                                     -2.0 * std::imag(rf) - 2.0 * gain.imag() * fnorm);
        Eigen::Matrix<double, 3, 2> c;
        for (int x = 0; x < 3; ++x)
        {
            const CVector &fx = jet.first[static_cast<std::size_t>(x)];
            const cplx r_fx = residual.dot(fx);
            const double d_norm = 2.0 * std::real(jet.value.dot(fx));
            c(x, 0) = 2.0 * std::real(r_fx) - 2.0 * gain.real() * d_norm;
            c(x, 1) = -2.0 * std::imag(r_fx) - 2.0 * gain.imag() * d_norm;
        }
        d.reduced_hessian = d.hessian + c * c.transpose() / (2.0 * fnorm);
        d.reduced_gradient = d.gradient + c * grad_g / (2.0 * fnorm);
    }
    return d;
}

GridSearcher::GridSearcher(const ObservationModel &model, GridSpec coarse, GridSpec precise)
    : model_(model), coarse_(std::move(coarse)), precise_(std::move(precise))
{
    if (coarse_.size() == 0)
        throw std::invalid_argument("GridSearcher: empty coarse grid");
    const double nb = model_.num_antennas();
    responses_.reserve(coarse_.phi_points.size() * coarse_.psi_points.size());
    for (double phi : coarse_.phi_points)
        for (double psi : coarse_.psi_points)
        {
            responses_.push_back(model_.ris_response(phi, psi));
            norms_.push_back(nb * responses_.back().squaredNorm());
        }
    const int l_count = model_.num_pilots();
    delay_conj_.resize(l_count, static_cast<Eigen::Index>(coarse_.tau_points.size()));
    for (int k = 0; k < l_count; ++k)
        for (std::size_t t = 0; t < coarse_.tau_points.size(); ++t)
            delay_conj_(k, static_cast<Eigen::Index>(t)) = std::conj(model_.delay_phase(k, coarse_.tau_points[t]));
}

std::vector<double> GridSearcher::all_scores(const CVector &residual) const
{
    const CMatrix u = model_.project_bs(residual);
    const std::size_t n_tau = coarse_.tau_points.size();
    std::vector<double> scores(coarse_.size(), 0.0);
    for (std::size_t pair = 0; pair < responses_.size(); ++pair)
    {
        if (!(norms_[pair] > 0.0))
            continue;
        // w_k = sum_m conj(z_{k,m}) u_{k,m}
        const Eigen::VectorXcd w = responses_[pair].conjugate().cwiseProduct(u).rowwise().sum();
        const Eigen::RowVectorXcd c = w.transpose() * delay_conj_;
        for (std::size_t t = 0; t < n_tau; ++t)
            scores[pair * n_tau + t] = std::norm(c[static_cast<Eigen::Index>(t)]) / norms_[pair];
    }
    return scores;
}

GridPoint GridSearcher::greedy(const CVector &residual) const
{
    const std::vector<double> scores = all_scores(residual);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best])
            best = i;

    const std::size_t n_tau = coarse_.tau_points.size();
    const std::size_t n_psi = coarse_.psi_points.size();
    const std::size_t i_tau = best % n_tau;
    const std::size_t pair = best / n_tau;
    return GridPoint{coarse_.phi_points[pair / n_psi], coarse_.psi_points[pair % n_psi], coarse_.tau_points[i_tau],
                     scores[best]};
}

double GridSearcher::score_point(const CMatrix &u, double phi, double psi, double tau) const
{
    const CMatrix z = model_.ris_response(phi, psi);
    const double norm = model_.num_antennas() * z.squaredNorm();
    if (!(norm > 0.0))
        return 0.0;
    cplx acc = 0.0;
    for (int k = 0; k < model_.num_pilots(); ++k)
        acc += std::conj(model_.delay_phase(k, tau)) * z.row(k).dot(u.row(k));
    return std::norm(acc) / norm;
}

GridPoint GridSearcher::refine_locally(const CVector &residual, const GridPoint &start) const
{
    const CMatrix u = model_.project_bs(residual);
    const int n_phi = steps_per_cell(coarse_.phi_step, precise_.phi_step);
    const int n_psi = steps_per_cell(coarse_.psi_step, precise_.psi_step);
    const int n_tau = steps_per_cell(coarse_.tau_step, precise_.tau_step);
    const double period = model_.config().delay_period();

    GridPoint best = start;
    best.score = score_point(u, start.phi, start.psi, start.tau);
    for (int a = -n_phi; a <= n_phi; ++a)
    {
        const double phi = start.phi + a * precise_.phi_step;
        if (phi < -kHalfPi || phi >= kHalfPi)
            continue;
        for (int b = -n_psi; b <= n_psi; ++b)
        {
            const double psi = start.psi + b * precise_.psi_step;
            if (psi < -kHalfPi || psi >= kHalfPi)
                continue;
            for (int c = -n_tau; c <= n_tau; ++c)
            {
                const double tau = wrap_delay(start.tau + c * precise_.tau_step, period);
                const double s = score_point(u, phi, psi, tau);
                if (s > best.score)
                    best = GridPoint{phi, psi, tau, s};
            }
        }
    }
    return best;
}

GridPoint greedy_search(const CVector &residual, const GridSpec &grid, const ObservationModel &model)
{
    const GridSearcher searcher(model, grid, grid);
    return searcher.greedy(residual);
}

GridPoint precise_search(const CVector &residual, const GridPoint &coarse_point, const GridSpec &coarse,
                         const ObservationModel &model)
{
    const GridSearcher searcher(model, coarse, GridSpec::precise(model.config()));
    return searcher.refine_locally(residual, coarse_point);
}

void normalize_estimate(PathEstimate &est, const SystemConfig &cfg)
{
    fold_angles(est.elevation, est.azimuth);
    est.delay = wrap_delay(est.delay, cfg.delay_period());
}

constexpr int kMaxStepHalvings = 10;

PathEstimate single_refine(PathEstimate estimate, const CVector &residual, const ObservationModel &model,
                           int iterations)
{
    if (iterations < 0)
        throw std::invalid_argument("single_refine: negative iteration count");
    if (iterations == 0)
        return estimate;

    const SystemConfig &cfg = model.config();
    // Newton steps are solved in (phi, psi, tau / T) so the 3x3 system is well scaled.
    const double period = cfg.delay_period();
    const Eigen::Vector3d scale(1.0, 1.0, period);

    double current = newton_objective(estimate.gain, estimate.elevation, estimate.azimuth, estimate.delay,
                                      residual, model);
    for (int it = 0; it < iterations; ++it)
    {
        const NewtonDerivatives d =
            newton_derivatives(estimate.gain, estimate.elevation, estimate.azimuth, estimate.delay, residual, model);
        const Eigen::Vector3d grad_s = d.reduced_gradient.cwiseProduct(scale);
        const Eigen::Matrix3d neg_hess_s = -(scale.asDiagonal() * d.reduced_hessian * scale.asDiagonal());
        const Eigen::LLT<Eigen::Matrix3d> llt(neg_hess_s);
        if (llt.info() == Eigen::Success && grad_s.allFinite())
        {
            const Eigen::Vector3d step = scale.cwiseProduct(llt.solve(grad_s));
            // Backtrack by halving until the objective increases.
            double t = 1.0;
            for (int half = 0; half < kMaxStepHalvings; ++half, t *= 0.5)
            {
                PathEstimate candidate = estimate;
                candidate.elevation += t * step[0];
                candidate.azimuth += t * step[1];
                candidate.delay += t * step[2];
                normalize_estimate(candidate, cfg);
                const CVector f = model.atom(candidate.elevation, candidate.azimuth, candidate.delay);
                candidate.gain = gain_ls_single(residual, f);
                const double trial = newton_objective(candidate.gain, f, residual);
                if (trial > current)
                {
                    current = trial;
                    candidate.objective_history = std::move(estimate.objective_history);
                    estimate = std::move(candidate);
                    break;
                }
            }
        }
        estimate.objective_history.push_back(current);
    }
    return estimate;
}

CVector residual_of(const std::vector<PathEstimate> &paths, const CVector &y, const ObservationModel &model)
{
    CVector r = y;
    for (const auto &p : paths)
        r -= p.gain * model.atom(p.elevation, p.azimuth, p.delay);
    return r;
}

std::vector<PathEstimate> cyclic_refine(std::vector<PathEstimate> paths, const CVector &y,
                                        const ObservationModel &model, int rounds, int iterations,
                                        std::vector<double> *residual_powers)
{
    if (rounds <= 0 || paths.empty())
        return paths;
    CVector residual = residual_of(paths, y, model);
    for (int round = 0; round < rounds; ++round)
    {
        for (auto &p : paths)
        {
            residual += p.gain * model.atom(p.elevation, p.azimuth, p.delay);
            p = single_refine(std::move(p), residual, model, iterations);
            residual -= p.gain * model.atom(p.elevation, p.azimuth, p.delay);
        }
        if (residual_powers)
            residual_powers->push_back(residual.squaredNorm());
    }
    return paths;
}

GainUpdate update_gains_ls(const std::vector<PathEstimate> &paths, const CVector &y, const ObservationModel &model)
{
    GainUpdate out;
    if (paths.empty())
        return out;
    const auto n = static_cast<Eigen::Index>(paths.size());
    CMatrix f(y.size(), n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const auto &p = paths[static_cast<std::size_t>(i)];
        f.col(i) = model.atom(p.elevation, p.azimuth, p.delay);
    }
    const CMatrix gram = f.adjoint() * f;
    const Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    out.condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();

    if (out.condition <= kGainConditionLimit)
    {
        out.gains = f.householderQr().solve(y);
    }
    else
    {
        out.ill_conditioned = true;
        const double ridge = std::max(lmax, 1e-300) / kGainConditionLimit;
        const CMatrix reg = gram + ridge * CMatrix::Identity(n, n);
        out.gains = reg.ldlt().solve(f.adjoint() * y);
    }
    return out;
}

EstimateSet run_nomp(const CVector &y, const ObservationModel &model, const GridSearcher &searcher,
                     const NompOptions &options)
{
    const SystemConfig &cfg = model.config();
    if (static_cast<std::size_t>(y.size()) != model.length())
        throw std::invalid_argument("run_nomp: observation length does not match L * M * N_b");

    const double eps = stopping_threshold(cfg);
    const int cap = options.max_paths > 0 ? options.max_paths : cfg.path_cap();
    const int rs = options.refine ? cfg.single_refine_iters : 0;
    const int rc = options.refine ? cfg.cyclic_refine_iters : 0;

    EstimateSet out;
    CVector residual = y;
    while (true)
    {
        const GridPoint best = searcher.greedy(residual);
        if (best.score < eps)
        {
            out.stop_reason = StopReason::Threshold;
            break;
        }
        if (static_cast<int>(out.paths.size()) >= cap)
        {
            out.stop_reason = StopReason::MaxPaths;
            break;
        }

        const GridPoint fine = searcher.refine_locally(residual, best);
        PathEstimate est;
        est.elevation = fine.phi;
        est.azimuth = fine.psi;
        est.delay = fine.tau;
        est.gain = gain_ls_single(residual, model.atom(fine.phi, fine.psi, fine.tau));
        est = single_refine(std::move(est), residual, model, rs);
        out.paths.push_back(std::move(est));

        out.paths = cyclic_refine(std::move(out.paths), y, model, rc, rs);

        const GainUpdate gu = update_gains_ls(out.paths, y, model);
        for (std::size_t p = 0; p < out.paths.size(); ++p)
            out.paths[p].gain = gu.gains[static_cast<Eigen::Index>(p)];
        out.ill_conditioned_gains = out.ill_conditioned_gains || gu.ill_conditioned;

        residual = residual_of(out.paths, y, model);
        out.residual_history.push_back(residual.squaredNorm());
        ++out.iterations_used;
    }
    out.residual_power = residual.squaredNorm();
    return out;
}

EstimateSet run_nomp(const CVector &y, const RisTrainingProfile &profile, const LinkGeometry &geometry,
                     const SystemConfig &cfg, const NompOptions &options)
{
    cfg.validate();
    const ObservationModel model(cfg, profile, geometry);
    const GridSearcher searcher(model, GridSpec::coarse(cfg), GridSpec::precise(cfg));
    return run_nomp(y, model, searcher, options);
}

EstimateSet run_omp_baseline(const CVector &y, const RisTrainingProfile &profile, const LinkGeometry &geometry,
                             const SystemConfig &cfg)
{
    NompOptions options;
    options.refine = false;
    return run_nomp(y, profile, geometry, cfg, options);
}

} // namespace risce
