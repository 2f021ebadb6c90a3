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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include "oracles.hpp"
#include "risce/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace risce;

namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double kZ95 = 1.959963984540054;  // two-sided 95%
constexpr double kZ05 = 1.6448536269514722; // one-sided 5%

struct Outcome
{
    bool pass = false;
    std::string detail;
};

struct Stats
{
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

Stats stats(const std::vector<double> &v)
{
    Stats s;
    s.n = v.size();
    if (v.empty())
        return s;
    for (double x : v)
        s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1)
    {
        double ss = 0.0;
        for (double x : v)
            ss += (x - s.mean) * (x - s.mean);
        s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return s;
}

std::string fmt_g(double x, int prec = 4)
{
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

double rel(double a, double b, double scale) { return std::abs(a - b) / scale; }

// ---- 1: Newton derivatives ----

Outcome derivative_certification()
{
    const SystemConfig cfg = desk_config();
    std::mt19937_64 rng(101);
    const LinkGeometry geo = fixtures::geometry(rng);
    const RisTrainingProfile prof = RisTrainingProfile::random(cfg.num_pilot_symbols, cfg.num_ris_elements(), rng);
    const ObservationModel model(cfg, prof, geo);
    std::uniform_real_distribution<double> ang(-kPi / 2, kPi / 2), del(0.0, cfg.max_delay_s);
    std::normal_distribution<double> nd;
    const double period = cfg.delay_period();

    double worst_grad = 0.0, worst_hess = 0.0;
    for (int t = 0; t < 100; ++t)
    {
        const double x[3] = {ang(rng), ang(rng), del(rng)};
        const cplx g(nd(rng), nd(rng));
        const CVector y = cplx(nd(rng), nd(rng)) * model.atom(ang(rng), ang(rng), del(rng)) +
                          fixtures::random_cvector(cfg.observation_length(), rng);
        const NewtonDerivatives d = newton_derivatives(g, x[0], x[1], x[2], y, model);
        const double h[3] = {1e-6, 1e-6, 1e-6 * period};
        const double unit[3] = {1.0, 1.0, period};
        auto at = [&](int dim, double step) {
            double z[3] = {x[0], x[1], x[2]};
            z[dim] += step;
            return newton_derivatives(g, z[0], z[1], z[2], y, model);
        };
        // entry scales in unit-free coordinates (tau measured in delay periods)
        double gscale = 0.0;
        for (int i = 0; i < 3; ++i)
            gscale = std::max(gscale, std::abs(d.gradient[i] * unit[i]));
        const double hscale = [&] {
            double m = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    m = std::max(m, std::abs(d.hessian(i, j) * unit[i] * unit[j]));
            return m;
        }();
        for (int i = 0; i < 3; ++i)
        {
            const NewtonDerivatives up = at(i, h[i]), dn = at(i, -h[i]);
            const double fd = (up.objective - dn.objective) / (2.0 * h[i]);
            worst_grad = std::max(worst_grad, rel(d.gradient[i] * unit[i], fd * unit[i], gscale));
            for (int j = 0; j < 3; ++j)
            {
                const double fdh = (up.gradient[j] - dn.gradient[j]) / (2.0 * h[i]);
                worst_hess = std::max(worst_hess, rel(d.hessian(j, i) * unit[i] * unit[j],
                                                      fdh * unit[i] * unit[j], hscale));
            }
        }
    }
    return {worst_grad < 1e-5 && worst_hess < 1e-4,
            "max rel err gradient " + fmt_g(worst_grad, 3) + " (< 1e-5), Hessian " + fmt_g(worst_hess, 3) +
                " (< 1e-4) over 100 points"};
}

// ---- 2: Fisher block ----

Outcome fim_certification()
{
    const SystemConfig cfg = fixtures::tiny_config();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        std::mt19937_64 rng(200 + seed);
        const LinkGeometry geo = fixtures::geometry(rng);
        const RisTrainingProfile prof = RisTrainingProfile::random(cfg.num_pilot_symbols, cfg.num_ris_elements(), rng);
        const ObservationModel model(cfg, prof, geo);
        std::uniform_real_distribution<double> ang(-1.4, 1.4), del(0.0, cfg.max_delay_s);
        std::normal_distribution<double> nd;
        const PathParams p{cplx(nd(rng), nd(rng)), ang(rng), ang(rng), del(rng)};
        const double sigma2 = 0.3;
        const FimBlock blk = fim_block(p, model, sigma2);

        // finite-difference Jacobian of the scalar-oracle noiseless mean in (|g|, arg g, phi, psi, tau)
        const double xi[5] = {std::abs(p.gain), std::arg(p.gain), p.elevation, p.azimuth, p.delay};
        const double h[5] = {1e-6 * xi[0], 1e-6, 1e-6, 1e-6, 1e-6 * cfg.delay_period()};
        auto mean_at = [&](const double *v) {
            const auto a = oracle::atom(v[2], v[3], v[4], prof.phases(), geo, cfg);
            std::vector<std::complex<double>> out(a.size());
            const std::complex<double> g = std::polar(v[0], v[1]);
            for (std::size_t i = 0; i < a.size(); ++i)
                out[i] = g * a[i];
            return out;
        };
        std::vector<std::vector<std::complex<double>>> jac(5);
        for (int c = 0; c < 5; ++c)
        {
            double up[5], dn[5];
            std::copy(xi, xi + 5, up);
            std::copy(xi, xi + 5, dn);
            up[c] += h[c];
            dn[c] -= h[c];
            const auto yu = mean_at(up), yd = mean_at(dn);
            jac[c].resize(yu.size());
            for (std::size_t i = 0; i < yu.size(); ++i)
                jac[c][i] = (yu[i] - yd[i]) / (2.0 * h[c]);
        }
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
            {
                double fd = 0.0;
                for (std::size_t r = 0; r < jac[i].size(); ++r)
                    fd += std::real(std::conj(jac[i][r]) * jac[j][r]);
                fd *= 2.0 / sigma2;
                // |F_ij| <= sqrt(F_ii F_jj) for a PSD matrix, so that is the natural entry scale
                const double scale = std::sqrt(blk.matrix(i, i) * blk.matrix(j, j));
                worst = std::max(worst, std::abs(blk.matrix(i, j) - fd) / scale);
            }
    }
    return {worst < 1e-4, "max rel err " + fmt_g(worst, 3) + " (< 1e-4) over 10 blocks x 25 entries"};
}

// ---- 3: exact recovery ----

struct RangeErrors
{
    double gain = 0.0, phi = 0.0, psi = 0.0, tau = 0.0;
    double worst() const { return std::max({gain, phi, psi, tau}); }
};

RangeErrors range_errors(const PathEstimate &e, const PathParams &t, const SystemConfig &cfg)
{
    return {std::abs(e.gain - t.gain) / std::abs(t.gain), std::abs(e.elevation - t.elevation) / kPi,
            std::abs(e.azimuth - t.azimuth) / kPi, std::abs(e.delay - t.delay) / cfg.max_delay_s};
}

/// Angles restricted to the identifiable part of the field of view: away from broadside, where the
/// azimuth drops out of the model, and away from the clamped edge of the elevation range.
constexpr double kMinSeparationCells = 2.5;

// Pairwise separation in resolution cells: delay in 1 / (pilot span * delta_f),
// direction cosines in wavelength / aperture.
double resolution_cells(const PathParams &a, const PathParams &b, const SystemConfig &cfg)
{
    const auto &pilots = cfg.pilot_subcarriers;
    const double cell_tau = 1.0 / ((pilots.back() - pilots.front() + 1) * cfg.subcarrier_spacing());
    const double cell_u = cfg.wavelength() / (cfg.ris_ny * cfg.element_spacing_m);
    const double cell_v = cfg.wavelength() / (cfg.ris_nx * cfg.element_spacing_m);
    double dt = std::abs(a.delay - b.delay);
    dt = std::min(dt, cfg.delay_period() - dt);
    const double du = std::sin(a.elevation) * std::cos(a.azimuth) - std::sin(b.elevation) * std::cos(b.azimuth);
    const double dv = std::sin(a.elevation) * std::sin(a.azimuth) - std::sin(b.elevation) * std::sin(b.azimuth);
    return std::hypot(dt / cell_tau, du / cell_u, dv / cell_v);
}

ChannelRealization identifiable_channel(const SystemConfig &cfg, int num_paths, double min_cells, std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> mag(0.3, 1.25), sign(-1.0, 1.0), psi(-1.45, 1.45),
        del(0.02 * cfg.max_delay_s, 0.98 * cfg.max_delay_s), phase(-kPi, kPi), gm(0.5, 1.5);
    for (int attempt = 0; attempt < 10000; ++attempt)
    {
        ChannelRealization ch = sample_channel(cfg, num_paths, rng);
        for (auto &p : ch.paths)
        {
            p.elevation = std::copysign(mag(rng), sign(rng));
            p.azimuth = psi(rng);
            p.delay = del(rng);
            p.gain = std::polar(gm(rng), phase(rng));
        }
        bool ok = true;
        for (std::size_t a = 0; a < ch.paths.size() && ok; ++a)
            for (std::size_t b = a + 1; b < ch.paths.size() && ok; ++b)
                ok = resolution_cells(ch.paths[a], ch.paths[b], cfg) >= min_cells;
        if (ok)
            return ch;
    }
    throw std::runtime_error("could not draw a separated channel");
}

Outcome exact_recovery()
{
    // P = 1 on the coarse grid, noiseless
    SystemConfig one = desk_config();
    one.num_paths = 1;
    double worst_on = 0.0;
    int on_runs = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        ChannelSampling s;
        s.on_grid = true;
        // the broadside grid row is skipped: with sin(phi) = 0 the atom does not depend on psi
        std::uint64_t draw_seed = 300 + seed;
        TrialDraw d = draw_trial(one, 30.0, draw_seed, s, true);
        while (d.channel.paths[0].elevation == 0.0)
            d = draw_trial(one, 30.0, draw_seed += 1000, s, true);
        const EstimateSet est = run_nomp(d.observation.y, d.profile, d.channel.geometry, d.config);
        ++on_runs;
        if (est.paths.size() != 1)
        {
            worst_on = std::numeric_limits<double>::infinity();
            continue;
        }
        worst_on = std::max(worst_on, range_errors(est.paths[0], d.channel.paths[0], one).worst());
    }

    // P = 3 well separated, off grid, noiseless, R_s = R_c = 5
    SystemConfig three = desk_config();
    three.num_paths = 3;
    three.single_refine_iters = 5;
    three.cyclic_refine_iters = 5;
    double worst_off = 0.0;
    int missed = 0;
    int exact_runs = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        std::mt19937_64 rng(400 + seed);
        const RisTrainingProfile prof =
            RisTrainingProfile::random(three.num_pilot_symbols, three.num_ris_elements(), rng);
        const ChannelRealization ch = identifiable_channel(three, 3, kMinSeparationCells, rng);
        SystemConfig cfg = three;
        cfg.noise_variance = snr_to_noise_variance(30.0, ch, prof, three);
        const PilotObservation obs = synthesize_pilots(ch, prof, cfg, NoiseSpec{false, 0});
        const EstimateSet est = run_nomp(obs.y, prof, ch.geometry, cfg);
        const PathMatching m = match_paths(est.paths, ch.paths, cfg);
        missed += static_cast<int>(m.unmatched_truth.size());
        double run_worst = 0.0;
        for (const auto &[e, t] : m.pairs)
            run_worst = std::max(run_worst, range_errors(est.paths[e], ch.paths[t], cfg).worst());
        worst_off = std::max(worst_off, run_worst);
        if (run_worst < 1e-4 && m.unmatched_truth.empty())
            ++exact_runs;
    }
    const bool pass = worst_on <= 1e-10 && worst_off < 1e-4 && missed == 0;
    return {pass, "P=1 on-grid max range err " + fmt_g(worst_on, 3) + " (<= 1e-10, " + std::to_string(on_runs) +
                      " runs); P=3 off-grid max range err " + fmt_g(worst_off, 3) + " (< 1e-4, " +
                      std::to_string(exact_runs) + "/20 runs within, " + std::to_string(missed) + " missed paths)"};
}

// ---- 4: false-alarm calibration ----

Outcome false_alarm_calibration()
{
    SystemConfig cfg = desk_config();
    cfg.false_alarm_rate = 0.05;
    cfg.noise_variance = 1.0;
    const int n = 1000;
    int detections = 0;
    for (int s = 0; s < n; ++s)
    {
        std::mt19937_64 rng(trial_seed(4, 0, static_cast<std::size_t>(s)));
        const RisTrainingProfile prof = RisTrainingProfile::random(cfg.num_pilot_symbols, cfg.num_ris_elements(), rng);
        ChannelRealization silent = sample_channel(cfg, 1, rng);
        silent.paths.front().gain = cplx(0.0, 0.0);
        const LinkGeometry geo = silent.geometry;
        const PilotObservation obs = synthesize_pilots(silent, prof, cfg, NoiseSpec{true, rng()});
        NompOptions o;
        o.max_paths = 1;
        o.refine = false;
        const EstimateSet est = run_nomp(obs.y, prof, geo, cfg, o);
        if (!est.paths.empty())
            ++detections;
    }
    const double p = 0.05;
    const double half = kZ95 * std::sqrt(p * (1.0 - p) / n);
    const double rate = static_cast<double>(detections) / n;
    return {std::abs(rate - p) <= half, "empirical rate " + fmt_g(rate) + " (" + std::to_string(detections) +
                                            "/1000), 95% CI of 0.05 is [" + fmt_g(p - half) + ", " +
                                            fmt_g(p + half) + "]"};
}

// ---- 5: NOMP vs OMP ----

Outcome nomp_vs_omp()
{
    Scenario sc = find_preset("fig4-desk");
    sc.crlb = false;
    const std::vector<double> snrs{0.0, 5.0, 10.0, 15.0, 20.0};
    const int trials = 200;
    std::vector<std::vector<double>> nomp(snrs.size()), omp(snrs.size()), log_ratio(snrs.size());
    for (int t = 0; t < trials; ++t)
    {
        // same seed at every SNR: the profile, channel and noise shape are shared, only sigma_v changes
        const std::uint64_t seed = trial_seed(5, 0, static_cast<std::size_t>(t));
        for (std::size_t i = 0; i < snrs.size(); ++i)
        {
            const TrialRecord r = run_trial(sc.base, snrs[i], seed, sc);
            nomp[i].push_back(r.nomp->nmse_channel);
            omp[i].push_back(r.omp->nmse_channel);
            log_ratio[i].push_back(std::log(r.omp->nmse_channel / r.nomp->nmse_channel));
        }
    }
    bool ordered = true;
    std::string detail = "mean NMSE nomp/omp:";
    for (std::size_t i = 0; i < snrs.size(); ++i)
    {
        const Stats a = stats(nomp[i]), b = stats(omp[i]);
        ordered = ordered && a.mean <= b.mean;
        detail += " " + fmt_g(snrs[i], 3) + "dB " + fmt_g(a.mean, 3) + "/" + fmt_g(b.mean, 3);
    }
    // gap in dB per trial, paired across SNR; shrinking would show as a significantly negative change
    std::vector<double> change(trials);
    for (int t = 0; t < trials; ++t)
        change[static_cast<std::size_t>(t)] = log_ratio.back()[static_cast<std::size_t>(t)] -
                                              log_ratio.front()[static_cast<std::size_t>(t)];
    const Stats c = stats(change);
    const double z = c.se > 0.0 ? c.mean / c.se : (c.mean >= 0.0 ? 0.0 : -INFINITY);
    const bool not_shrinking = z >= -kZ05;
    const double gap0 = 10.0 * std::log10(stats(omp.front()).mean / stats(nomp.front()).mean);
    const double gap20 = 10.0 * std::log10(stats(omp.back()).mean / stats(nomp.back()).mean);
    detail += "; gap " + fmt_g(gap0, 3) + " dB at 0 dB, " + fmt_g(gap20, 3) + " dB at 20 dB, paired z " +
              fmt_g(z, 3) + " (>= -1.645)";
    return {ordered && not_shrinking, detail};
}

// ---- 6: monotone trends ----

std::vector<double> channel_nmse_at(const SystemConfig &cfg, double snr, int trials, std::uint64_t stream)
{
    Scenario sc;
    sc.estimator = EstimatorChoice::Nomp;
    std::vector<double> out;
    for (int t = 0; t < trials; ++t)
        out.push_back(run_trial(cfg, snr, trial_seed(6, stream, static_cast<std::size_t>(t)), sc).nomp->nmse_channel);
    return out;
}

Outcome monotone_trends()
{
    const SystemConfig base = desk_config();
    const int trials = 200;
    struct Axis
    {
        std::string name;
        std::vector<SweepVariant> steps;
    };
    auto m = [](int v) {
        SweepVariant s;
        s.label = "M=" + std::to_string(v);
        s.num_pilot_symbols = v;
        return s;
    };
    auto l = [](int v) {
        SweepVariant s;
        s.label = "L=" + std::to_string(v);
        s.num_pilot_subcarriers = v;
        return s;
    };
    auto nr = [](int v) {
        SweepVariant s;
        s.label = "Nr=" + std::to_string(v) + "x" + std::to_string(v);
        s.ris_dims = std::make_pair(v, v);
        return s;
    };
    const std::vector<Axis> axes = {{"M", {m(2), m(4), m(8)}}, {"L", {l(4), l(8), l(16)}}, {"Nr", {nr(2), nr(4), nr(8)}}};
    bool pass = true;
    std::string detail;
    std::uint64_t stream = 0;
    for (const auto &axis : axes)
    {
        std::vector<Stats> st;
        for (const auto &v : axis.steps)
            st.push_back(stats(channel_nmse_at(v.apply(base), 10.0, trials, stream++)));
        bool axis_ok = true;
        for (std::size_t i = 0; i + 1 < st.size(); ++i)
            axis_ok = axis_ok && st[i + 1].mean + kZ95 * st[i + 1].se < st[i].mean - kZ95 * st[i].se;
        pass = pass && axis_ok;
        detail += (detail.empty() ? "" : "; ") + axis.name + (axis_ok ? " ok" : " NOT separated") + " [";
        for (std::size_t i = 0; i < st.size(); ++i)
            detail += (i ? ", " : "") + axis.steps[i].label + " " + fmt_g(st[i].mean, 3) + "+-" +
                      fmt_g(kZ95 * st[i].se, 2);
        detail += "]";
    }
    return {pass, detail};
}

// ---- 7: CRLB ordering ----

Outcome crlb_ordering()
{
    SystemConfig cfg = desk_config();
    const int trials = 500;
    bool pass = true;
    std::string detail;
    double ratio30 = 0.0;
    for (double snr : {25.0, 30.0})
    {
        std::vector<double> emp, bound, per_trial;
        for (int t = 0; t < trials; ++t)
        {
            std::mt19937_64 rng(trial_seed(7, static_cast<std::size_t>(snr), static_cast<std::size_t>(t)));
            const RisTrainingProfile prof =
                RisTrainingProfile::random(cfg.num_pilot_symbols, cfg.num_ris_elements(), rng);
            const ChannelRealization ch = identifiable_channel(cfg, cfg.num_paths, kMinSeparationCells, rng);
            SystemConfig c = cfg;
            c.noise_variance = snr_to_noise_variance(snr, ch, prof, cfg);
            const PilotObservation obs = synthesize_pilots(ch, prof, c, NoiseSpec{true, rng()});
            const ObservationModel model(c, prof, ch.geometry);
            const GridSearcher searcher(model, GridSpec::coarse(c), GridSpec::precise(c));
            const EstimateSet est = run_nomp(obs.y, model, searcher);
            emp.push_back(channel_nmse(est.paths, ch.paths, model));
            bound.push_back(aggregate_channel_bound(ch.paths, model, c.noise_variance));
            per_trial.push_back(emp.back() / bound.back());
        }
        const Stats e = stats(emp), b = stats(bound);
        const auto outliers = std::count_if(per_trial.begin(), per_trial.end(), [](double r) { return r > 10.0; });
        std::nth_element(per_trial.begin(), per_trial.begin() + trials / 2, per_trial.end());
        const double median = per_trial[trials / 2];
        const double ratio = e.mean / b.mean;
        pass = pass && e.mean >= b.mean;
        if (snr == 30.0)
            ratio30 = ratio;
        detail += (detail.empty() ? "" : "; ") + fmt_g(snr, 3) + " dB: NMSE " + fmt_g(e.mean, 3) + " vs bound " +
                  fmt_g(b.mean, 3) + " (ratio " + fmt_g(ratio, 3) + ", per-trial median " +
                  fmt_g(median, 3) + ", " + std::to_string(outliers) + " trials > 10x)";
    }
    pass = pass && ratio30 <= 5.0;
    detail += "; need NMSE >= bound and ratio at 30 dB <= 5";
    return {pass, detail};
}

// ---- 8: residual vs noise ----

Outcome residual_consistency()
{
    Scenario sc = find_preset("fig4-desk");
    sc.estimator = EstimatorChoice::Nomp;
    sc.crlb = false;
    const int trials = 500;
    int inside = 0;
    std::vector<double> ratios;
    for (int t = 0; t < trials; ++t)
    {
        const TrialRecord r = run_trial(sc.base, 10.0, trial_seed(8, 0, static_cast<std::size_t>(t)), sc);
        const double ratio = r.nomp->residual_power / r.expected_noise_power;
        ratios.push_back(ratio);
        if (ratio >= 0.5 && ratio <= 2.0)
            ++inside;
    }
    std::sort(ratios.begin(), ratios.end());
    const double frac = static_cast<double>(inside) / trials;
    return {frac >= 0.9, "residual/noise in [0.5, 2] for " + fmt_g(100.0 * frac, 4) +
                             "% of 500 trials at 10 dB (>= 90%), median ratio " + fmt_g(ratios[ratios.size() / 2])};
}

// ---- 9: oracle equivalence ----

Outcome oracle_equivalence()
{
    const SystemConfig cfg = desk_config();
    int greedy_match = 0;
    double worst_ls = 0.0;
    for (int inst = 0; inst < 50; ++inst)
    {
        std::mt19937_64 rng(900 + static_cast<std::uint64_t>(inst));
        const RisTrainingProfile prof = RisTrainingProfile::random(cfg.num_pilot_symbols, cfg.num_ris_elements(), rng);
        const ChannelRealization ch = sample_channel(cfg, cfg.num_paths, rng);
        SystemConfig c = cfg;
        c.noise_variance = snr_to_noise_variance(5.0, ch, prof, cfg);
        const PilotObservation obs = synthesize_pilots(ch, prof, c, NoiseSpec{true, rng()});
        const ObservationModel model(c, prof, ch.geometry);
        const GridSpec grid = GridSpec::coarse(c);

        // exhaustive scan with the scalar oracle atoms
        double best = -1.0;
        double bphi = 0, bpsi = 0, btau = 0;
        for (double phi : grid.phi_points)
            for (double psi : grid.psi_points)
                for (double tau : grid.tau_points)
                {
                    const auto a = oracle::atom(phi, psi, tau, prof.phases(), ch.geometry, c);
                    std::complex<double> ip = 0.0;
                    double nrm = 0.0;
                    for (std::size_t i = 0; i < a.size(); ++i)
                    {
                        ip += std::conj(a[i]) * obs.y[static_cast<Eigen::Index>(i)];
                        nrm += std::norm(a[i]);
                    }
                    const double s = std::norm(ip) / nrm;
                    if (s > best)
                    {
                        best = s;
                        bphi = phi;
                        bpsi = psi;
                        btau = tau;
                    }
                }
        const GridPoint g = greedy_search(obs.y, grid, model);
        if (g.phi == bphi && g.psi == bpsi && g.tau == btau)
            ++greedy_match;

        // joint least squares against explicit normal equations
        std::vector<PathEstimate> paths;
        for (const auto &p : ch.paths)
            paths.push_back({cplx(0, 0), p.elevation, p.azimuth, p.delay, {}});
        std::vector<std::vector<std::complex<double>>> cols;
        for (const auto &p : paths)
            cols.push_back(oracle::atom(p.elevation, p.azimuth, p.delay, prof.phases(), ch.geometry, c));
        const std::size_t n = cols.size();
        std::vector<std::vector<std::complex<double>>> gram(n, std::vector<std::complex<double>>(n));
        std::vector<std::complex<double>> rhs(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t r = 0; r < cols[i].size(); ++r)
            {
                for (std::size_t j = 0; j < n; ++j)
                    gram[i][j] += std::conj(cols[i][r]) * cols[j][r];
                rhs[i] += std::conj(cols[i][r]) * obs.y[static_cast<Eigen::Index>(r)];
            }
        const auto expected = oracle::gauss_solve(gram, rhs);
        const GainUpdate gu = update_gains_ls(paths, obs.y, model);
        double norm = 0.0, diff = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            norm += std::norm(expected[i]);
            diff += std::norm(gu.gains[static_cast<Eigen::Index>(i)] - expected[i]);
        }
        worst_ls = std::max(worst_ls, std::sqrt(diff / norm));
    }
    return {greedy_match == 50 && worst_ls <= 1e-10,
            "greedy == brute force on " + std::to_string(greedy_match) + "/50 instances; LS gains max rel err " +
                fmt_g(worst_ls, 3) + " (<= 1e-10)"};
}

} // namespace

int main(int argc, char **argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"derivative certification", derivative_certification},
        {"Fisher block certification", fim_certification},
        {"exact recovery", exact_recovery},
        {"false-alarm calibration", false_alarm_calibration},
        {"NOMP vs OMP", nomp_vs_omp},
        {"monotone trends", monotone_trends},
        {"CRLB ordering", crlb_ordering},
        {"residual vs noise power", residual_consistency},
        {"oracle equivalence", oracle_equivalence},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d %s: %s | %s | %.1f s\n", id, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
