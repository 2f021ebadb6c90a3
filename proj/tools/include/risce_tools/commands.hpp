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

#ifndef RISCE_TOOLS_COMMANDS_HPP
#define RISCE_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace risce::tools
{

inline constexpr const char *kOutDirEnv = "RISCE_OUT_DIR";

/// Config sources shared by simulate and sweep: preset base < --config file < --set overrides.
struct ConfigSource
{
    std::string config_path;
    std::string preset;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
};

struct SimulateArgs
{
    ConfigSource source;
    double snr_db = 10.0;
    bool noiseless = false;
    bool on_grid = false;
    double min_separation = 0.0;
    std::string name = "sim";
    std::string out_dir;
};

struct EstimateArgs
{
    std::string input; // observation record
    std::string estimator = "nomp";
    std::string name; // default: input file name without ".observation.json"
    std::string out_dir;
};

struct CrlbArgs
{
    std::string input; // channel record
    std::optional<double> snr_db;
    std::string mode = "block-diagonal";
    std::string name;
    std::string out_dir;
};

struct SweepArgs
{
    ConfigSource source; // config_path names a scenario document
    std::vector<double> snr_db;
    std::optional<int> trials;
    std::optional<std::string> estimator;
    std::string format = "csv";
    std::string out_dir;
    unsigned threads = 0;
    bool quiet = false;
};

/// --out-dir, else $RISCE_OUT_DIR, else the working directory. Created if missing.
std::filesystem::path resolve_out_dir(const std::string &flag);

/// Each command returns the process exit status, printing produced files to `out`
/// and diagnostics to `err`. Every written file is read back and validated.
int cmd_simulate(const SimulateArgs &args, std::ostream &out, std::ostream &err);
int cmd_estimate(const EstimateArgs &args, std::ostream &out, std::ostream &err);
int cmd_crlb(const CrlbArgs &args, std::ostream &out, std::ostream &err);
int cmd_sweep(const SweepArgs &args, std::ostream &out, std::ostream &err);
int cmd_presets(std::ostream &out);

} // namespace risce::tools

#endif
