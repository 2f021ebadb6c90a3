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

#include "risce_tools/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{

void add_config_flags(CLI::App *cmd, risce::tools::ConfigSource &src)
{
    cmd->add_option("--config", src.config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", src.preset, "named preset (see `risce presets`)");
    cmd->add_option("--set", src.overrides, "config override key=value (repeatable)");
    cmd->add_option("--seed", src.seed, "RNG seed");
}

} // namespace

int main(int argc, char **argv)
{
    using namespace risce::tools;

    CLI::App app{"risce: wideband cascaded channel estimation for RIS-assisted mmWave MIMO-OFDM"};
    app.set_version_flag("--version", "risce 0.1.0");
    app.require_subcommand(1);

    SimulateArgs sim;
    auto *simulate = app.add_subcommand("simulate", "draw a channel and write channel + observation records");
    add_config_flags(simulate, sim.source);
    simulate->add_option("--snr", sim.snr_db, "SNR in dB")->capture_default_str();
    simulate->add_flag("--noiseless", sim.noiseless, "omit the noise (SNR still sets the stopping threshold)");
    simulate->add_flag("--on-grid", sim.on_grid, "snap path parameters onto the coarse grid");
    simulate->add_option("--min-separation", sim.min_separation, "minimum normalized path separation");
    simulate->add_option("--name", sim.name, "output file prefix")->capture_default_str();
    simulate->add_option("--out-dir", sim.out_dir, "output directory (default $RISCE_OUT_DIR or .)");

    EstimateArgs est;
    auto *estimate = app.add_subcommand("estimate", "run NOMP and/or OMP on an observation record");
    estimate->add_option("--input,input", est.input, "observation record")->required()->check(CLI::ExistingFile);
    estimate->add_option("--estimator", est.estimator, "nomp, omp or both")
        ->check(CLI::IsMember({"nomp", "omp", "both"}))
        ->capture_default_str();
    estimate->add_option("--name", est.name, "output file prefix");
    estimate->add_option("--out-dir", est.out_dir, "output directory (default $RISCE_OUT_DIR or .)");

    CrlbArgs cr;
    auto *crlb = app.add_subcommand("crlb", "compute Fisher information bounds for a channel record");
    crlb->add_option("--input,input", cr.input, "channel record")->required()->check(CLI::ExistingFile);
    crlb->add_option("--snr", cr.snr_db, "SNR in dB (default: the record's noise variance)");
    crlb->add_option("--mode", cr.mode, "block-diagonal or full")
        ->check(CLI::IsMember({"block-diagonal", "full"}))
        ->capture_default_str();
    crlb->add_option("--name", cr.name, "output file prefix");
    crlb->add_option("--out-dir", cr.out_dir, "output directory (default $RISCE_OUT_DIR or .)");

    SweepArgs sw;
    auto *sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over SNR and variants");
    add_config_flags(sweep, sw.source);
    sweep->add_option("--snr", sw.snr_db, "SNR points in dB")->delimiter(',');
    sweep->add_option("--trials", sw.trials, "trials per point");
    sweep->add_option("--estimator", sw.estimator, "nomp, omp or both")->check(CLI::IsMember({"nomp", "omp", "both"}));
    sweep->add_option("--format", sw.format, "csv or json-lines")
        ->check(CLI::IsMember({"csv", "json-lines"}))
        ->capture_default_str();
    sweep->add_option("--threads", sw.threads, "worker threads (0: hardware concurrency)");
    sweep->add_flag("--quiet", sw.quiet, "no progress lines");
    sweep->add_option("--out-dir", sw.out_dir, "output directory (default $RISCE_OUT_DIR or .)");

    auto *presets = app.add_subcommand("presets", "list the built-in sweep presets");

    CLI11_PARSE(app, argc, argv);

    if (simulate->parsed())
        return cmd_simulate(sim, std::cout, std::cerr);
    if (estimate->parsed())
        return cmd_estimate(est, std::cout, std::cerr);
    if (crlb->parsed())
        return cmd_crlb(cr, std::cout, std::cerr);
    if (sweep->parsed())
        return cmd_sweep(sw, std::cout, std::cerr);
    if (presets->parsed())
        return cmd_presets(std::cout);
    return 1;
}
