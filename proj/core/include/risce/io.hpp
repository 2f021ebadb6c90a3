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

#ifndef RISCE_IO_HPP
#define RISCE_IO_HPP

#include "risce/config.hpp"
#include "risce/crlb.hpp"
#include "risce/harness.hpp"
#include "risce/nomp.hpp"
#include "risce/signal_model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace risce::io
{

inline constexpr const char *kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Parses a JSON config document. Omitted fields take the full-scale defaults; `overrides`
/// are "key=value" strings (value is JSON, or a bare string) applied on top of the file.
/// An omitted element spacing resolves to half the carrier wavelength and an omitted pilot
/// list is derived from `num_pilot_subcarriers` (default 12).
/// Throws std::invalid_argument naming the offending field.
SystemConfig parse_config(const std::string &json_text, const std::vector<std::string> &overrides = {});
/// Same, layered on `base` instead of the built-in defaults. Derived fields of `base` (pilot set,
/// element spacing) are re-derived when the document touches the fields they depend on.
SystemConfig parse_config(const SystemConfig &base, const std::string &json_text,
                          const std::vector<std::string> &overrides = {});
SystemConfig load_config(const std::filesystem::path &path, const std::vector<std::string> &overrides = {});
std::string config_to_json(const SystemConfig &cfg);

/// Scenario document: {"name", "description", "base": {config}, "snr_db": [...], "variants":
/// [{"label", "M", "L", "ris": [nx, ny]}], "trials", "seed", "estimator", "crlb", "noiseless",
/// "sampling": {"min_separation", "on_grid"}}.
Scenario parse_scenario(const std::string &json_text);
std::string scenario_to_json(const Scenario &scenario);

struct ChannelRecord
{
    SystemConfig config;
    ChannelRealization channel;
    RisTrainingProfile profile;
};

struct ObservationRecord
{
    SystemConfig config;
    LinkGeometry geometry;
    RisTrainingProfile profile;
    PilotObservation observation;

    /// Throws std::invalid_argument if the layout disagrees with the config or with y.
    void check_shape() const;
};

struct EstimatesRecord
{
    SystemConfig config;
    std::string estimator; // "nomp" or "omp"
    EstimateSet estimates;
};

struct CrlbRecord
{
    SystemConfig config;
    CrlbReport report;
};

struct RunManifest
{
    std::string command;
    std::string scenario;
    SystemConfig config;
    std::vector<std::uint64_t> seeds;
    std::string tool_version = kToolVersion;
    std::string timestamp;
    std::vector<std::string> outputs;
};

std::string to_json(const ChannelRecord &record);
std::string to_json(const ObservationRecord &record);
std::string to_json(const EstimatesRecord &record);
std::string to_json(const CrlbRecord &record);
std::string to_json(const RunManifest &manifest);

ChannelRecord channel_record_from_json(const std::string &text);
ObservationRecord observation_record_from_json(const std::string &text);
EstimatesRecord estimates_record_from_json(const std::string &text);
CrlbRecord crlb_record_from_json(const std::string &text);
RunManifest manifest_from_json(const std::string &text);

enum class SweepFormat
{
    Csv,
    JsonLines,
};

SweepFormat sweep_format_from_string(const std::string &s);

/// One row per sweep point, estimator and metric:
/// scenario,variant,M,L,Nx,Ny,snr_db,estimator,metric,mean,stderr,trials
std::string sweep_csv(const SweepResult &result);
std::string sweep_csv_header();
std::string sweep_csv_rows(const std::string &scenario, const SweepPoint &point);
/// Same rows as JSON objects, one per line.
std::string sweep_json_lines(const SweepResult &result);
std::string sweep_json_lines_rows(const std::string &scenario, const SweepPoint &point);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

std::string read_text_file(const std::filesystem::path &path);
/// Writes through a temporary sibling and renames it into place. Throws std::runtime_error.
void write_text_file(const std::filesystem::path &path, const std::string &text);
/// "<file>.manifest.json" next to the result file.
std::filesystem::path manifest_path_for(const std::filesystem::path &result);

} // namespace risce::io

#endif
