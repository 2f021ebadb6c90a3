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

#ifndef RISCE_NOMP_HPP
#define RISCE_NOMP_HPP

#include "risce/signal_model.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace risce
{

/// Uniform search grids over [-pi/2, pi/2) x [-pi/2, pi/2) x [0, tau_max).
struct GridSpec
{
    std::vector<double> phi_points;
    std::vector<double> psi_points;
    std::vector<double> tau_points;
    double phi_step = 0.0;
    double psi_step = 0.0;
    double tau_step = 0.0;
    GridRates rates;

    std::size_t size() const { return phi_points.size() * psi_points.size() * tau_points.size(); }
    /// Lowest-index-first flattening: (i_phi * N_psi + i_psi) * N_tau + i_tau.
    std::size_t flat_index(std::size_t i_phi, std::size_t i_psi, std::size_t i_tau) const
    {
        return (i_phi * psi_points.size() + i_psi) * tau_points.size() + i_tau;
    }

    static GridSpec make(const SystemConfig &cfg, const GridRates &rates);
    static GridSpec coarse(const SystemConfig &cfg) { return make(cfg, cfg.coarse_rates); }
    static GridSpec precise(const SystemConfig &cfg) { return make(cfg, cfg.precise_rates); }
};

struct PathEstimate
{
    cplx gain{0.0, 0.0};
    double elevation = 0.0;
    double azimuth = 0.0;
    double delay = 0.0;
    std::vector<double> objective_history; // N after each Newton iteration

    bool operator==(const PathEstimate &) const = default;
};

enum class StopReason
{
    Threshold,
    MaxPaths
};

std::string to_string(StopReason reason);
StopReason stop_reason_from_string(const std::string &s);

struct EstimateSet
{
    std::vector<PathEstimate> paths;
    double residual_power = 0.0;
    int iterations_used = 0;
    StopReason stop_reason = StopReason::Threshold;
    std::vector<double> residual_history; // ||y_e||^2 after each appended path
    bool ill_conditioned_gains = false;

    bool operator==(const EstimateSet &) const = default;
};

struct GridPoint
{
    double phi = 0.0;
    double psi = 0.0;
    double tau = 0.0;
    double score = 0.0;
};

/// epsilon = -sigma_v^2 ln(1 - (1 - P_fa)^{1 / (L M N_b)}).
double stopping_threshold(double noise_variance, double false_alarm_rate, std::size_t observation_length);
double stopping_threshold(const SystemConfig &cfg);

/// |f^H y_e|^2 / ||f||^2. Throws std::invalid_argument on a zero atom or length mismatch.
double correlation_score(const CVector &atom, const CVector &residual);

/// g = f^H y_e / ||f||^2.
cplx gain_ls_single(const CVector &residual, const CVector &atom);

/// N = 2 Re{y_e^H g f} - ||g f||^2.
double newton_objective(cplx gain, const CVector &atom, const CVector &residual);
double newton_objective(cplx gain, double phi, double psi, double tau, const CVector &residual,
                        const ObservationModel &model);

struct NewtonDerivatives
{
    double objective = 0.0;
    Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
    Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();

    // (phi, psi, tau) block of the joint Newton system in (x, Re g, Im g), with the gain eliminated:
    //   H_r = H + C C^T / (2 ||f||^2),  grad_r = grad + C grad_g / (2 ||f||^2)
    // where C holds the mixed x/gain second partials and grad_g the gain gradient.
    Eigen::Vector3d reduced_gradient = Eigen::Vector3d::Zero();
    Eigen::Matrix3d reduced_hessian = Eigen::Matrix3d::Zero();
};

/// Gradient and Hessian of N with respect to (phi, psi, tau) at fixed gain.
///
///   dN/dx        = 2 Re{ g (y_e - g f)^H f_x }
///   d2N/dx1 dx2  = 2 Re{ g (y_e - g f)^H f_x1x2 - |g|^2 f_x2^H f_x1 }
///
/// The reduced pair also accounts for the gain, so a step -H_r^{-1} grad_r is the angle/delay part of
/// a Newton step in all of (g, phi, psi, tau).
NewtonDerivatives newton_derivatives(cplx gain, double phi, double psi, double tau, const CVector &residual,
                                     const ObservationModel &model);

/// Coarse-grid scorer with the angle responses of every grid pair cached.
///
/// Scores use the factorization f^H y = sum_k conj(E_k(tau)) sum_m conj(z_{k,m}) u_{k,m}, where
/// u is the BS-projected residual, so a full grid pass costs O(N_angles (L M + L N_tau)).
class GridSearcher
{
  public:
    GridSearcher(const ObservationModel &model, GridSpec coarse, GridSpec precise);

    const GridSpec &coarse() const { return coarse_; }
    const GridSpec &precise() const { return precise_; }

    /// Argmax over the coarse grid; ties go to the lowest flat index.
    GridPoint greedy(const CVector &residual) const;

    /// Argmax over the local precise grid spanning +-1 coarse cell around `start`.
    /// Angle points outside [-pi/2, pi/2) are skipped; delays wrap modulo 1/delta_f.
    GridPoint refine_locally(const CVector &residual, const GridPoint &start) const;

    /// Every coarse-grid score in flat-index order (diagnostics and tests).
    std::vector<double> all_scores(const CVector &residual) const;

  private:
    double score_point(const CMatrix &u, double phi, double psi, double tau) const;

    const ObservationModel &model_;
    GridSpec coarse_;
    GridSpec precise_;
    std::vector<CMatrix> responses_; // one L x M matrix per (phi, psi) pair
    std::vector<double> norms_;      // ||f||^2 per pair
    CMatrix delay_conj_;             // L x N_tau, conj(E_k(tau))
};

GridPoint greedy_search(const CVector &residual, const GridSpec &grid, const ObservationModel &model);
GridPoint precise_search(const CVector &residual, const GridPoint &coarse_point, const GridSpec &coarse,
                         const ObservationModel &model);

/// Fold angles into [-pi/2, pi/2)^2 along atom-preserving symmetries and wrap the delay into [0, 1/delta_f).
void normalize_estimate(PathEstimate &est, const SystemConfig &cfg);

/// R_s safeguarded Newton steps on the reduced system; a step is kept only if the reduced Hessian is
/// negative definite and N, with the gain re-fit by single-atom least squares, strictly increases; the step is
/// halved up to ten times before the iteration is skipped.
PathEstimate single_refine(PathEstimate estimate, const CVector &residual, const ObservationModel &model,
                           int iterations);

/// R_c rounds over all detected paths: add the path back, single-refine, subtract again.
/// `residual_powers`, when given, receives ||y_e||^2 after every round.
std::vector<PathEstimate> cyclic_refine(std::vector<PathEstimate> paths, const CVector &y,
                                        const ObservationModel &model, int rounds, int iterations,
                                        std::vector<double> *residual_powers = nullptr);

struct GainUpdate
{
    CVector gains;
    double condition = 1.0; // of F^H F
    bool ill_conditioned = false;
};

inline constexpr double kGainConditionLimit = 1e12;

/// Joint least-squares gains (F^H F)^{-1} F^H y. Falls back to a ridge-regularized solve and flags
/// the result when cond(F^H F) exceeds kGainConditionLimit.
GainUpdate update_gains_ls(const std::vector<PathEstimate> &paths, const CVector &y, const ObservationModel &model);

/// y - sum_p g_p f_p
CVector residual_of(const std::vector<PathEstimate> &paths, const CVector &y, const ObservationModel &model);

struct NompOptions
{
    bool refine = true;
    int max_paths = 0; // 0: take cfg.path_cap()
};

/// Greedy -> precise -> single refinement -> cyclic refinement -> LS gains, until the best coarse
/// score drops below the false-alarm threshold or the path cap is reached.
EstimateSet run_nomp(const CVector &y, const RisTrainingProfile &profile, const LinkGeometry &geometry,
                     const SystemConfig &cfg, const NompOptions &options = {});
EstimateSet run_nomp(const CVector &y, const ObservationModel &model, const GridSearcher &searcher,
                     const NompOptions &options = {});

/// The same pipeline with both refinement stages disabled (grid-limited estimates).
EstimateSet run_omp_baseline(const CVector &y, const RisTrainingProfile &profile, const LinkGeometry &geometry,
                             const SystemConfig &cfg);

} // namespace risce

#endif
