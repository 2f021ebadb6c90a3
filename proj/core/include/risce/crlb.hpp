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

#ifndef RISCE_CRLB_HPP
#define RISCE_CRLB_HPP

#include "risce/signal_model.hpp"

#include <optional>
#include <vector>

namespace risce
{

using Matrix5d = Eigen::Matrix<double, 5, 5>;
using Vector5d = Eigen::Matrix<double, 5, 1>;

/// Per-path coordinates (|g|, angle(g), phi, psi, tau), stacked into a 5P vector.
Eigen::VectorXd to_param_vector(const std::vector<PathParams> &paths);
std::vector<PathParams> from_param_vector(const Eigen::VectorXd &xi);

/// A_check_{k,m,b,p} = [a_B]_b a_R^T(phi_r, psi_r) Omega_m a_R(phi_p, psi_p) and its angle partials.
struct SteeringPartials
{
    cplx value;
    cplx d_phi;
    cplx d_psi;
};

SteeringPartials steering_derivatives(double phi, double psi, int k_pos, int m, int b, const ObservationModel &model);

/// 5x5 Fisher block of one path. `condition` is measured on the unit-diagonal rescaling of the
/// block so that the mixed physical units of the coordinates do not dominate it.
struct FimBlock
{
    Matrix5d matrix = Matrix5d::Zero();
    double condition = 0.0;
    bool singular = false;
};

inline constexpr double kFimConditionLimit = 1e12;

FimBlock fim_block(const PathParams &path, const ObservationModel &model, double noise_variance);

enum class FimMode
{
    BlockDiagonal, // separated-paths approximation
    Full           // all P^2 blocks, dense inverse
};

struct FisherInformation
{
    FimMode mode = FimMode::BlockDiagonal;
    Eigen::MatrixXd fim;
    Eigen::MatrixXd inverse; // rows/cols of unavailable paths are zero
    std::vector<FimBlock> blocks;
    std::vector<bool> path_available;

    bool all_available() const;
};

FisherInformation assemble_fim(const std::vector<PathParams> &paths, const ObservationModel &model,
                               double noise_variance, FimMode mode = FimMode::BlockDiagonal);

/// H_{k,m,b} = sum_p |g_p| e^{j angle g_p} A_check_{k,m,b,p} e^{-j 2 pi k df tau_p}.
cplx csi_value(int k_pos, int m, int b, const std::vector<PathParams> &paths, const ObservationModel &model);

/// dH_{k,m,b} / dxi, length 5P.
Eigen::VectorXcd csi_gradient(int k_pos, int m, int b, const std::vector<PathParams> &paths,
                              const ObservationModel &model);

/// Jacobian of every H_{k,m,b} (rows in observation order) with respect to xi.
CMatrix csi_jacobian(const std::vector<PathParams> &paths, const ObservationModel &model);

/// LB_{k,m,b} = (dH/dxi)^H F^{-1} (dH/dxi); nullopt when a needed block is unavailable.
std::optional<double> csi_lower_bound(int k_pos, int m, int b, const std::vector<PathParams> &paths,
                                      const FisherInformation &info, const ObservationModel &model);

/// sum LB_{k,m,b} / sum |H_{k,m,b}|^2, normalized the same way as the channel NMSE.
/// Throws std::domain_error on zero channel power or an unavailable FIM block.
double aggregate_channel_bound(const std::vector<PathParams> &paths, const ObservationModel &model,
                               double noise_variance, FimMode mode = FimMode::BlockDiagonal);

struct CrlbReport
{
    double noise_variance = 0.0;
    FimMode mode = FimMode::BlockDiagonal;
    std::vector<std::optional<Vector5d>> variance_bounds; // diag of the inverse per path
    std::vector<double> block_conditions;
    std::vector<bool> flagged;
    std::vector<double> csi_bounds; // per (k, m, b); NaN where unavailable
    std::optional<double> aggregate;
    double channel_power = 0.0; // sum |H|^2
};

CrlbReport compute_crlb(const std::vector<PathParams> &paths, const ObservationModel &model, double noise_variance,
                        FimMode mode = FimMode::BlockDiagonal);

} // namespace risce

#endif
