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

#ifndef RISCE_HARNESS_HPP
#define RISCE_HARNESS_HPP

#include "risce/crlb.hpp"
#include "risce/nomp.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace risce
{

/// ||x_hat - x||^2 / ||x||^2; throws std::domain_error when ||x|| = 0.
double nmse(const CVector &estimate, const CVector &truth);
double nmse(std::span<const double> estimate, std::span<const double> truth);

/// Squared distance in (phi, psi, tau), each coordinate scaled by its range (pi, pi, tau_max).
double path_distance(const PathEstimate &estimate, const PathParams &truth, const SystemConfig &cfg);

struct PathMatching
{
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (estimate index, truth index)
    std::vector<std::size_t> unmatched_estimates;           // false alarms
    std::vector<std::size_t> unmatched_truth;               // misses
    double total_cost = 0.0;
    bool exhaustive = false;
};

/// Minimum-cost matching: exact when the smaller side has <= 6 paths and the larger <= 16,
/// greedy closest-pair-first otherwise.
PathMatching match_paths(const std::vector<PathEstimate> &estimates, const std::vector<PathParams> &truth,
                         const SystemConfig &cfg);

/// ||H_hat - H||^2 / ||H||^2 over every (k, m, b); an empty estimate gives 1.
double channel_nmse(const std::vector<PathEstimate> &estimates, const std::vector<PathParams> &truth,
                    const ObservationModel &model);
double channel_nmse(const std::vector<PathEstimate> &estimates, const ChannelRealization &truth,
                    const RisTrainingProfile &profile, const SystemConfig &cfg);

enum class EstimatorChoice
{
    Nomp,
    Omp,
    Both
};

std::string to_string(EstimatorChoice e);
EstimatorChoice estimator_from_string(const std::string &s);

/// One entry of the non-SNR sweep axis; unset fields inherit the scenario's base config.
struct SweepVariant
{
    std::string label = "base";
    std::optional<int> num_pilot_symbols;
    std::optional<int> num_pilot_subcarriers;
    std::optional<std::pair<int, int>> ris_dims;

    SystemConfig apply(const SystemConfig &base) const;
};

struct ChannelSampling
{
    double min_separation = 0.0; // in path_distance units (not squared)
    bool on_grid = false;        // snap angles and delays onto the coarse grid
};

struct Scenario
{
    std::string name;
    std::string description;
    SystemConfig base;
    std::vector<double> snr_db;
    std::vector<SweepVariant> variants{SweepVariant{}};
    int trials = 200;
    std::uint64_t seed = 1;
    EstimatorChoice estimator = EstimatorChoice::Both;
    bool crlb = false;
    bool noiseless = false; // noise disabled; SNR still sets the stopping threshold
    ChannelSampling sampling;

    void validate() const;
};

/// Outcome of one estimator on one trial. Parameter NMSEs are over matched pairs (NaN if none).
struct EstimatorOutcome
{
    double nmse_gain = 0.0;
    double nmse_phi = 0.0;
    double nmse_psi = 0.0;
    double nmse_tau = 0.0;
    double nmse_channel = 0.0;
    int detected = 0;
    int matched = 0;
    int misses = 0;
    int false_alarms = 0;
    double residual_power = 0.0;
    StopReason stop_reason = StopReason::Threshold;

    double nmse_angle() const { return 0.5 * (nmse_phi + nmse_psi); }
};

struct TrialRecord
{
    std::uint64_t seed = 0;
    double noise_variance = 0.0;
    double expected_noise_power = 0.0; // L M N_b sigma_v^2
    std::optional<EstimatorOutcome> nomp;
    std::optional<EstimatorOutcome> omp;
    double crlb = 0.0; // aggregate bound, NaN when unavailable or not requested
};

struct MetricSummary
{
    double mean = 0.0;
    double stderr_ = 0.0;
    int count = 0;
};

struct EstimatorSummary
{
    MetricSummary gain, angle, tau, channel;
    MetricSummary misses, false_alarms;
};

struct SweepPoint
{
    std::string variant;
    SystemConfig config;
    double snr_db = 0.0;
    int trials = 0;
    std::optional<EstimatorSummary> nomp;
    std::optional<EstimatorSummary> omp;
    std::optional<MetricSummary> crlb;
    double runtime_s = 0.0;
    std::vector<TrialRecord> records;
};

struct SweepResult
{
    std::string scenario;
    std::vector<SweepPoint> points; // variant-major, then SNR
};

struct SweepOptions
{
    unsigned threads = 0; // 0: hardware concurrency
    bool keep_records = true;
    std::function<void(const SweepPoint &)> on_point;
};

/// Seed of trial `trial` at sweep point `point`, mixed from the scenario seed.
std::uint64_t trial_seed(std::uint64_t scenario_seed, std::size_t point, std::size_t trial);

/// Draws a channel honoring the sampling constraints (rejection sampling for separation).
ChannelRealization sample_channel(const SystemConfig &cfg, int num_paths, const ChannelSampling &sampling,
                                  std::mt19937_64 &rng);

/// Inputs of one trial. `config.noise_variance` holds the SNR-derived noise variance.
struct TrialDraw
{
    SystemConfig config;
    RisTrainingProfile profile;
    ChannelRealization channel;
    PilotObservation observation;
    std::uint64_t noise_seed = 0;
};

TrialDraw draw_trial(const SystemConfig &cfg, double snr_db, std::uint64_t seed, const ChannelSampling &sampling,
                     bool noiseless = false);

/// One Monte-Carlo trial: profile, channel, noise, estimation and metrics from a single seed.
TrialRecord run_trial(const SystemConfig &cfg, double snr_db, std::uint64_t seed, const Scenario &scenario);

SweepResult run_sweep(const Scenario &scenario, const SweepOptions &options = {});

MetricSummary summarize(std::span<const double> values);

/// fig2 / fig3 / fig4 at full scale and their *-desk reduced-scale counterparts.
std::vector<Scenario> preset_scenarios();
Scenario find_preset(const std::string &name);

} // namespace risce

#endif
