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

#include "risce/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace risce
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double circular_delay_gap(double a, double b, double period)
{
    const double d = std::fabs(a - b);
    return std::min(d, period - d);
}

// Exact minimum-cost assignment of every row to a distinct column (rows <= cols).
std::vector<std::size_t> exact_assignment(const std::vector<std::vector<double>> &cost, std::size_t cols)
{
    const std::size_t rows = cost.size();
    const std::size_t states = std::size_t{1} << cols;
    std::vector<double> dp(states, std::numeric_limits<double>::infinity());
    std::vector<int> choice(states, -1);
    dp[0] = 0.0;
    for (std::size_t mask = 0; mask < states; ++mask)
    {
        if (!std::isfinite(dp[mask]))
            continue;
        const auto row = static_cast<std::size_t>(std::popcount(mask));
        if (row >= rows)
            continue;
        for (std::size_t c = 0; c < cols; ++c)
        {
            if (mask & (std::size_t{1} << c))
                continue;
            const std::size_t next = mask | (std::size_t{1} << c);
            const double v = dp[mask] + cost[row][c];
            if (v < dp[next])
            {
                dp[next] = v;
                choice[next] = static_cast<int>(c);
            }
        }
    }
    std::size_t best_mask = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t mask = 0; mask < states; ++mask)
        if (static_cast<std::size_t>(std::popcount(mask)) == rows && dp[mask] < best)
        {
            best = dp[mask];
            best_mask = mask;
        }
    std::vector<std::size_t> assign(rows);
    std::size_t mask = best_mask;
    for (std::size_t r = rows; r-- > 0;)
    {
        const auto c = static_cast<std::size_t>(choice[mask]);
        assign[r] = c;
        mask &= ~(std::size_t{1} << c);
    }
    return assign;
}

double ratio_or_nan(double num, double den) { return den > 0.0 ? num / den : kNaN; }

EstimatorOutcome evaluate(const EstimateSet &est, const ChannelRealization &truth, const ObservationModel &model)
{
    const SystemConfig &cfg = model.config();
    EstimatorOutcome out;
    out.detected = static_cast<int>(est.paths.size());
    out.residual_power = est.residual_power;
    out.stop_reason = est.stop_reason;
    out.nmse_channel = channel_nmse(est.paths, truth.paths, model);

    const PathMatching match = match_paths(est.paths, truth.paths, cfg);
    out.matched = static_cast<int>(match.pairs.size());
    out.misses = static_cast<int>(match.unmatched_truth.size());
    out.false_alarms = static_cast<int>(match.unmatched_estimates.size());

    double eg = 0, g = 0, ephi = 0, phi = 0, epsi = 0, psi = 0, etau = 0, tau = 0;
    for (const auto &[e, t] : match.pairs)
    {
        const PathEstimate &pe = est.paths[e];
        const PathParams &pt = truth.paths[t];
        eg += std::norm(pe.gain - pt.gain);
        g += std::norm(pt.gain);
        ephi += std::pow(pe.elevation - pt.elevation, 2);
        phi += pt.elevation * pt.elevation;
        epsi += std::pow(pe.azimuth - pt.azimuth, 2);
        psi += pt.azimuth * pt.azimuth;
        etau += std::pow(circular_delay_gap(pe.delay, pt.delay, cfg.delay_period()), 2);
        tau += pt.delay * pt.delay;
    }
    out.nmse_gain = ratio_or_nan(eg, g);
    out.nmse_phi = ratio_or_nan(ephi, phi);
    out.nmse_psi = ratio_or_nan(epsi, psi);
    out.nmse_tau = ratio_or_nan(etau, tau);
    return out;
}

double snap(double v, const std::vector<double> &points)
{
    double best = points.front();
    for (double p : points)
        if (std::fabs(p - v) < std::fabs(best - v))
            best = p;
    return best;
}

EstimatorSummary summarize_estimator(const std::vector<TrialRecord> &records, bool nomp)
{
    std::vector<double> gain, angle, tau, channel, misses, fas;
    for (const auto &r : records)
    {
        const auto &o = nomp ? r.nomp : r.omp;
        if (!o)
            continue;
        if (std::isfinite(o->nmse_gain))
            gain.push_back(o->nmse_gain);
        if (std::isfinite(o->nmse_angle()))
            angle.push_back(o->nmse_angle());
        if (std::isfinite(o->nmse_tau))
            tau.push_back(o->nmse_tau);
        channel.push_back(o->nmse_channel);
        misses.push_back(o->misses);
        fas.push_back(o->false_alarms);
    }
    return EstimatorSummary{summarize(gain),    summarize(angle),  summarize(tau),
                            summarize(channel), summarize(misses), summarize(fas)};
}

} // namespace

double nmse(const CVector &estimate, const CVector &truth)
{
    if (estimate.size() != truth.size())
        throw std::invalid_argument("nmse: length mismatch");
    const double den = truth.squaredNorm();
    if (!(den > 0.0))
        throw std::domain_error("nmse: zero-norm truth");
    return (estimate - truth).squaredNorm() / den;
}

double nmse(std::span<const double> estimate, std::span<const double> truth)
{
    if (estimate.size() != truth.size())
        throw std::invalid_argument("nmse: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
    {
        num += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
        den += truth[i] * truth[i];
    }
    if (!(den > 0.0))
        throw std::domain_error("nmse: zero-norm truth");
    return num / den;
}

double path_distance(const PathEstimate &estimate, const PathParams &truth, const SystemConfig &cfg)
{
    const double dphi = (estimate.elevation - truth.elevation) / std::numbers::pi;
    const double dpsi = (estimate.azimuth - truth.azimuth) / std::numbers::pi;
    const double dtau = circular_delay_gap(estimate.delay, truth.delay, cfg.delay_period()) / cfg.max_delay_s;
    return dphi * dphi + dpsi * dpsi + dtau * dtau;
}

PathMatching match_paths(const std::vector<PathEstimate> &estimates, const std::vector<PathParams> &truth,
                         const SystemConfig &cfg)
{
    PathMatching out;
    const std::size_t ne = estimates.size();
    const std::size_t nt = truth.size();
    std::vector<std::vector<double>> cost(ne, std::vector<double>(nt));
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t t = 0; t < nt; ++t)
            cost[e][t] = path_distance(estimates[e], truth[t], cfg);

    std::vector<bool> used_e(ne, false), used_t(nt, false);
    const std::size_t small = std::min(ne, nt);
    const std::size_t large = std::max(ne, nt);
    if (small > 0 && small <= 6 && large <= 16)
    {
        out.exhaustive = true;
        const bool rows_are_estimates = ne <= nt;
        std::vector<std::vector<double>> c(small, std::vector<double>(large));
        for (std::size_t r = 0; r < small; ++r)
            for (std::size_t col = 0; col < large; ++col)
                c[r][col] = rows_are_estimates ? cost[r][col] : cost[col][r];
        const auto assign = exact_assignment(c, large);
        for (std::size_t r = 0; r < small; ++r)
        {
            const std::size_t e = rows_are_estimates ? r : assign[r];
            const std::size_t t = rows_are_estimates ? assign[r] : r;
            out.pairs.emplace_back(e, t);
        }
    }
    else
    {
        for (std::size_t step = 0; step < small; ++step)
        {
            double best = std::numeric_limits<double>::infinity();
            std::size_t be = 0, bt = 0;
            for (std::size_t e = 0; e < ne; ++e)
                for (std::size_t t = 0; t < nt; ++t)
                    if (!used_e[e] && !used_t[t] && cost[e][t] < best)
                    {
                        best = cost[e][t];
                        be = e;
                        bt = t;
                    }
            out.pairs.emplace_back(be, bt);
            used_e[be] = used_t[bt] = true;
        }
    }

    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const auto &a, const auto &b) { return a.second < b.second; });
    std::fill(used_e.begin(), used_e.end(), false);
    std::fill(used_t.begin(), used_t.end(), false);
    for (const auto &[e, t] : out.pairs)
    {
        used_e[e] = used_t[t] = true;
        out.total_cost += cost[e][t];
    }
    for (std::size_t e = 0; e < ne; ++e)
        if (!used_e[e])
            out.unmatched_estimates.push_back(e);
    for (std::size_t t = 0; t < nt; ++t)
        if (!used_t[t])
            out.unmatched_truth.push_back(t);
    return out;
}

double channel_nmse(const std::vector<PathEstimate> &estimates, const std::vector<PathParams> &truth,
                    const ObservationModel &model)
{
    const CVector h = noiseless_observation(truth, model);
    const double power = h.squaredNorm();
    if (!(power > 0.0))
        throw std::domain_error("channel_nmse: zero channel power");
    CVector h_hat = CVector::Zero(h.size());
    for (const auto &p : estimates)
        h_hat += p.gain * model.atom(p.elevation, p.azimuth, p.delay);
    return (h_hat - h).squaredNorm() / power;
}

double channel_nmse(const std::vector<PathEstimate> &estimates, const ChannelRealization &truth,
                    const RisTrainingProfile &profile, const SystemConfig &cfg)
{
    const ObservationModel model(cfg, profile, truth.geometry);
    return channel_nmse(estimates, truth.paths, model);
}

std::string to_string(EstimatorChoice e)
{
    switch (e)
    {
    case EstimatorChoice::Nomp:
        return "nomp";
    case EstimatorChoice::Omp:
        return "omp";
    case EstimatorChoice::Both:
        return "both";
    }
    return "both";
}

EstimatorChoice estimator_from_string(const std::string &s)
{
    if (s == "nomp")
        return EstimatorChoice::Nomp;
    if (s == "omp")
        return EstimatorChoice::Omp;
    if (s == "both")
        return EstimatorChoice::Both;
    throw std::invalid_argument("estimator: expected nomp, omp or both, got '" + s + "'");
}

SystemConfig SweepVariant::apply(const SystemConfig &base) const
{
    SystemConfig cfg = base;
    if (num_pilot_symbols)
        cfg.num_pilot_symbols = *num_pilot_symbols;
    if (ris_dims)
    {
        cfg.ris_nx = ris_dims->first;
        cfg.ris_ny = ris_dims->second;
    }
    if (num_pilot_subcarriers)
        set_pilot_count(cfg, *num_pilot_subcarriers);
    return cfg;
}

void Scenario::validate() const
{
    if (trials < 1)
        throw std::invalid_argument("scenario " + name + ": trials must be >= 1");
    if (snr_db.empty())
        throw std::invalid_argument("scenario " + name + ": snr list must not be empty");
    if (variants.empty())
        throw std::invalid_argument("scenario " + name + ": variant list must not be empty");
    for (double s : snr_db)
        if (!std::isfinite(s))
            throw std::invalid_argument("scenario " + name + ": SNR values must be finite");
    for (const auto &v : variants)
        v.apply(base).validate();
}

std::uint64_t trial_seed(std::uint64_t scenario_seed, std::size_t point, std::size_t trial)
{
    return splitmix64(splitmix64(splitmix64(scenario_seed) ^ point) ^ trial);
}

ChannelRealization sample_channel(const SystemConfig &cfg, int num_paths, const ChannelSampling &sampling,
                                  std::mt19937_64 &rng)
{
    constexpr int kMaxAttempts = 1000;
    const double min_sq = sampling.min_separation * sampling.min_separation;
    ChannelRealization ch;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt)
    {
        ch = sample_channel(cfg, num_paths, rng);
        if (sampling.on_grid)
        {
            const GridSpec grid = GridSpec::coarse(cfg);
            for (auto &p : ch.paths)
            {
                p.elevation = snap(p.elevation, grid.phi_points);
                p.azimuth = snap(p.azimuth, grid.psi_points);
                p.delay = snap(p.delay, grid.tau_points);
            }
        }
        bool separated = true;
        for (std::size_t a = 0; a < ch.paths.size() && separated; ++a)
            for (std::size_t b = a + 1; b < ch.paths.size() && separated; ++b)
            {
                const PathEstimate pa{ch.paths[a].gain, ch.paths[a].elevation, ch.paths[a].azimuth,
                                      ch.paths[a].delay, {}};
                separated = path_distance(pa, ch.paths[b], cfg) >= min_sq;
            }
        if (separated)
            break;
    }
    return ch;
}

TrialDraw draw_trial(const SystemConfig &cfg, double snr_db, std::uint64_t seed, const ChannelSampling &sampling,
                     bool noiseless)
{
    std::mt19937_64 rng(seed);
    TrialDraw d;
    d.config = cfg;
    d.profile = RisTrainingProfile::random(cfg.num_pilot_symbols, cfg.num_ris_elements(), rng);
    d.channel = sample_channel(cfg, cfg.num_paths, sampling, rng);
    d.config.noise_variance = snr_to_noise_variance(snr_db, d.channel, d.profile, cfg);
    d.noise_seed = rng();
    d.observation = synthesize_pilots(d.channel, d.profile, d.config, NoiseSpec{!noiseless, d.noise_seed});
    return d;
}

TrialRecord run_trial(const SystemConfig &base_cfg, double snr_db, std::uint64_t seed, const Scenario &scenario)
{
    const TrialDraw d = draw_trial(base_cfg, snr_db, seed, scenario.sampling, scenario.noiseless);
    const SystemConfig &cfg = d.config;
    const ChannelRealization &channel = d.channel;
    const PilotObservation &obs = d.observation;

    TrialRecord rec;
    rec.seed = seed;
    rec.noise_variance = cfg.noise_variance;
    rec.expected_noise_power = static_cast<double>(cfg.observation_length()) * cfg.noise_variance;
    rec.crlb = kNaN;

    const ObservationModel model(cfg, d.profile, channel.geometry);
    const GridSearcher searcher(model, GridSpec::coarse(cfg), GridSpec::precise(cfg));

    if (scenario.estimator != EstimatorChoice::Omp)
        rec.nomp = evaluate(run_nomp(obs.y, model, searcher), channel, model);
    if (scenario.estimator != EstimatorChoice::Nomp)
    {
        NompOptions opts;
        opts.refine = false;
        rec.omp = evaluate(run_nomp(obs.y, model, searcher, opts), channel, model);
    }
    if (scenario.crlb)
    {
        try
        {
            rec.crlb = aggregate_channel_bound(channel.paths, model, cfg.noise_variance);
        }
        catch (const std::domain_error &)
        {
            rec.crlb = kNaN;
        }
    }
    return rec;
}

MetricSummary summarize(std::span<const double> values)
{
    MetricSummary s;
    s.count = static_cast<int>(values.size());
    if (values.empty())
    {
        s.mean = kNaN;
        s.stderr_ = kNaN;
        return s;
    }
    double sum = 0.0;
    for (double v : values)
        sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1)
    {
        double ss = 0.0;
        for (double v : values)
            ss += (v - s.mean) * (v - s.mean);
        s.stderr_ = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
    }
    return s;
}

SweepResult run_sweep(const Scenario &scenario, const SweepOptions &options)
{
    scenario.validate();
    SweepResult result;
    result.scenario = scenario.name;

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(scenario.trials));

    std::size_t point_index = 0;
    for (const auto &variant : scenario.variants)
    {
        const SystemConfig cfg = variant.apply(scenario.base);
        for (double snr : scenario.snr_db)
        {
            const auto start = std::chrono::steady_clock::now();
            SweepPoint point;
            point.variant = variant.label;
            point.config = cfg;
            point.snr_db = snr;
            point.trials = scenario.trials;
            point.records.resize(static_cast<std::size_t>(scenario.trials));

            auto worker = [&](unsigned w) {
                for (std::size_t t = w; t < point.records.size(); t += threads)
                    point.records[t] = run_trial(cfg, snr, trial_seed(scenario.seed, point_index, t), scenario);
            };
            if (threads <= 1)
            {
                worker(0);
            }
            else
            {
                std::vector<std::jthread> pool;
                for (unsigned w = 0; w < threads; ++w)
                    pool.emplace_back(worker, w);
            }

            if (scenario.estimator != EstimatorChoice::Omp)
                point.nomp = summarize_estimator(point.records, true);
            if (scenario.estimator != EstimatorChoice::Nomp)
                point.omp = summarize_estimator(point.records, false);
            if (scenario.crlb)
            {
                std::vector<double> bounds;
                for (const auto &r : point.records)
                    if (std::isfinite(r.crlb))
                        bounds.push_back(r.crlb);
                point.crlb = summarize(bounds);
            }
            point.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (!options.keep_records)
                point.records.clear();
            if (options.on_point)
                options.on_point(point);
            result.points.push_back(std::move(point));
            ++point_index;
        }
    }
    return result;
}

std::vector<Scenario> preset_scenarios()
{
    const std::vector<double> snr{0.0, 5.0, 10.0, 15.0, 20.0};
    auto m_variant = [](int m) {
        SweepVariant v;
        v.label = "M=" + std::to_string(m);
        v.num_pilot_symbols = m;
        return v;
    };
    auto l_variant = [](int l) {
        SweepVariant v;
        v.label = "L=" + std::to_string(l);
        v.num_pilot_subcarriers = l;
        return v;
    };
    auto nr_variant = [](int nx, int ny) {
        SweepVariant v;
        v.label = "Nr=" + std::to_string(nx) + "x" + std::to_string(ny);
        v.ris_dims = std::make_pair(nx, ny);
        return v;
    };

    std::vector<Scenario> out;

    Scenario fig2;
    fig2.name = "fig2";
    fig2.description = "parameter NMSE vs SNR for M = 5, 10, 15 (L = 12, N_r = 16x16)";
    fig2.base = full_scale_config();
    fig2.snr_db = snr;
    fig2.variants = {m_variant(5), m_variant(10), m_variant(15)};
    fig2.estimator = EstimatorChoice::Nomp;
    out.push_back(fig2);

    Scenario fig3;
    fig3.name = "fig3";
    fig3.description = "parameter NMSE vs SNR for different L and N_r (M = 16)";
    fig3.base = full_scale_config();
    fig3.snr_db = snr;
    {
        SweepVariant base;
        base.label = "L=12,Nr=16x16";
        fig3.variants = {base, l_variant(6), nr_variant(8, 8)};
    }
    fig3.estimator = EstimatorChoice::Nomp;
    out.push_back(fig3);

    Scenario fig4;
    fig4.name = "fig4";
    fig4.description = "channel NMSE of OMP, NOMP and the CRLB vs SNR (M = 16, L = 12, N_r = 16x16)";
    fig4.base = full_scale_config();
    fig4.snr_db = snr;
    fig4.estimator = EstimatorChoice::Both;
    fig4.crlb = true;
    out.push_back(fig4);

    Scenario fig2d = fig2;
    fig2d.name = "fig2-desk";
    fig2d.description = "reduced-scale fig2: M = 2, 4, 8 (N_b = 8, N_r = 4x4, N_c = 64, L = 8)";
    fig2d.base = desk_config();
    fig2d.variants = {m_variant(2), m_variant(4), m_variant(8)};
    out.push_back(fig2d);

    Scenario fig3d = fig3;
    fig3d.name = "fig3-desk";
    fig3d.description = "reduced-scale fig3: L = 4, 8, 16 and N_r = 2x2, 4x4, 8x8 (M = 8)";
    fig3d.base = desk_config();
    {
        SweepVariant base;
        base.label = "L=8,Nr=4x4";
        fig3d.variants = {l_variant(4), base, l_variant(16), nr_variant(2, 2), nr_variant(8, 8)};
    }
    out.push_back(fig3d);

    Scenario fig4d = fig4;
    fig4d.name = "fig4-desk";
    fig4d.description = "reduced-scale fig4 (N_b = 8, N_r = 4x4, N_c = 64, L = 8, M = 8, P = 3)";
    fig4d.base = desk_config();
    out.push_back(fig4d);

    return out;
}

Scenario find_preset(const std::string &name)
{
    for (auto &s : preset_scenarios())
        if (s.name == name)
            return s;
    throw std::invalid_argument("unknown preset '" + name + "'");
}

} // namespace risce
