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

#include "risce/crlb.hpp"
#include "risce/harness.hpp"
#include "risce/io.hpp"
#include "risce/nomp.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <functional>
#include <ostream>
#include <stdexcept>

namespace risce::tools
{

namespace
{

namespace fs = std::filesystem;

using Reserialize = std::function<std::string(const std::string &)>;

// Writes `text`, reads it back and checks that parsing and re-serializing reproduces it.
void emit(const fs::path &path, const std::string &text, const Reserialize &reserialize)
{
    io::write_text_file(path, text);
    const std::string back = io::read_text_file(path);
    if (back != text || (reserialize && reserialize(back) != text))
        throw std::runtime_error("validation of '" + path.string() + "' failed");
}

void emit_with_manifest(const fs::path &path, const std::string &text, const Reserialize &reserialize,
                        io::RunManifest manifest, std::ostream &out)
{
    emit(path, text, reserialize);
    manifest.outputs = {path.filename().string()};
    const fs::path mpath = io::manifest_path_for(path);
    emit(mpath, io::to_json(manifest),
         [](const std::string &s) { return io::to_json(io::manifest_from_json(s)); });
    out << path.string() << "\n" << mpath.string() << "\n";
}

SystemConfig resolve_config(const ConfigSource &src)
{
    const SystemConfig base = src.preset.empty() ? io::parse_config("") : find_preset(src.preset).base;
    const std::string text = src.config_path.empty() ? std::string{} : io::read_text_file(src.config_path);
    SystemConfig cfg = io::parse_config(base, text, src.overrides);
    if (src.seed)
        cfg.rng_seed = *src.seed;
    return cfg;
}

io::RunManifest manifest_for(const std::string &command, const std::string &scenario, const SystemConfig &cfg,
                             std::vector<std::uint64_t> seeds)
{
    io::RunManifest m;
    m.command = command;
    m.scenario = scenario;
    m.config = cfg;
    m.seeds = std::move(seeds);
    m.timestamp = io::utc_timestamp();
    return m;
}

std::string strip_suffix(const std::string &name, const std::string &suffix)
{
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
        return name.substr(0, name.size() - suffix.size());
    return fs::path(name).stem().string();
}

template <class F> int guarded(const char *command, std::ostream &err, F &&body)
{
    try
    {
        return body();
    }
    catch (const std::exception &e)
    {
        err << "risce " << command << ": error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

fs::path resolve_out_dir(const std::string &flag)
{
    fs::path dir = ".";
    if (!flag.empty())
        dir = flag;
    else if (const char *env = std::getenv(kOutDirEnv); env && *env)
        dir = env;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

int cmd_simulate(const SimulateArgs &args, std::ostream &out, std::ostream &err)
{
    return guarded("simulate", err, [&] {
        const SystemConfig cfg = resolve_config(args.source);
        const fs::path dir = resolve_out_dir(args.out_dir);
        const ChannelSampling sampling{args.min_separation, args.on_grid};
        const TrialDraw d = draw_trial(cfg, args.snr_db, cfg.rng_seed, sampling, args.noiseless);
        const std::string scenario = args.source.preset.empty() ? "custom" : args.source.preset;
        const auto manifest = manifest_for("simulate", scenario, d.config, {cfg.rng_seed, d.noise_seed});

        const io::ChannelRecord channel{d.config, d.channel, d.profile};
        emit_with_manifest(dir / (args.name + ".channel.json"), io::to_json(channel),
                           [](const std::string &s) { return io::to_json(io::channel_record_from_json(s)); },
                           manifest, out);

        const io::ObservationRecord obs{d.config, d.channel.geometry, d.profile, d.observation};
        obs.check_shape();
        emit_with_manifest(dir / (args.name + ".observation.json"), io::to_json(obs),
                           [](const std::string &s) { return io::to_json(io::observation_record_from_json(s)); },
                           manifest, out);
        return 0;
    });
}

int cmd_estimate(const EstimateArgs &args, std::ostream &out, std::ostream &err)
{
    return guarded("estimate", err, [&] {
        const EstimatorChoice choice = estimator_from_string(args.estimator);
        if (args.input.empty())
            throw std::invalid_argument("--input is required");
        const io::ObservationRecord rec = io::observation_record_from_json(io::read_text_file(args.input));
        const fs::path dir = resolve_out_dir(args.out_dir);
        const std::string name =
            args.name.empty() ? strip_suffix(fs::path(args.input).filename().string(), ".observation.json")
                              : args.name;

        SystemConfig cfg = rec.config;
        cfg.noise_variance = rec.observation.noise_variance;
        const ObservationModel model(cfg, rec.profile, rec.geometry);
        const GridSearcher searcher(model, GridSpec::coarse(cfg), GridSpec::precise(cfg));
        const auto manifest = manifest_for("estimate", args.input, cfg, {cfg.rng_seed});

        auto run = [&](const char *label, bool refine) {
            NompOptions opts;
            opts.refine = refine;
            const io::EstimatesRecord est{cfg, label, run_nomp(rec.observation.y, model, searcher, opts)};
            emit_with_manifest(dir / fmt::format("{}.{}.json", name, label), io::to_json(est),
                               [](const std::string &s) { return io::to_json(io::estimates_record_from_json(s)); },
                               manifest, out);
        };
        if (choice != EstimatorChoice::Omp)
            run("nomp", true);
        if (choice != EstimatorChoice::Nomp)
            run("omp", false);
        return 0;
    });
}

int cmd_crlb(const CrlbArgs &args, std::ostream &out, std::ostream &err)
{
    return guarded("crlb", err, [&] {
        FimMode mode = FimMode::BlockDiagonal;
        if (args.mode == "full")
            mode = FimMode::Full;
        else if (args.mode != "block-diagonal")
            throw std::invalid_argument("--mode: expected block-diagonal or full, got '" + args.mode + "'");
        if (args.input.empty())
            throw std::invalid_argument("--input is required");
        const io::ChannelRecord rec = io::channel_record_from_json(io::read_text_file(args.input));
        const fs::path dir = resolve_out_dir(args.out_dir);
        const std::string name =
            args.name.empty() ? strip_suffix(fs::path(args.input).filename().string(), ".channel.json") : args.name;

        SystemConfig cfg = rec.config;
        if (args.snr_db)
            cfg.noise_variance = snr_to_noise_variance(*args.snr_db, rec.channel, rec.profile, cfg);
        const ObservationModel model(cfg, rec.profile, rec.channel.geometry);
        const io::CrlbRecord report{cfg, compute_crlb(rec.channel.paths, model, cfg.noise_variance, mode)};
        emit_with_manifest(dir / (name + ".crlb.json"), io::to_json(report),
                           [](const std::string &s) { return io::to_json(io::crlb_record_from_json(s)); },
                           manifest_for("crlb", args.input, cfg, {cfg.rng_seed}), out);
        return 0;
    });
}

int cmd_sweep(const SweepArgs &args, std::ostream &out, std::ostream &err)
{
    return guarded("sweep", err, [&] {
        const ConfigSource &src = args.source;
        const io::SweepFormat format = io::sweep_format_from_string(args.format);
        Scenario scenario;
        if (!src.preset.empty() && !src.config_path.empty())
            throw std::invalid_argument("--preset and --config are mutually exclusive for sweep");
        if (!src.preset.empty())
            scenario = find_preset(src.preset);
        else if (!src.config_path.empty())
            scenario = io::parse_scenario(io::read_text_file(src.config_path));
        else
            throw std::invalid_argument("sweep needs --preset or --config");
        scenario.base = io::parse_config(scenario.base, "", src.overrides);
        if (src.seed)
            scenario.seed = *src.seed;
        if (!args.snr_db.empty())
            scenario.snr_db = args.snr_db;
        if (args.trials)
            scenario.trials = *args.trials;
        if (args.estimator)
            scenario.estimator = estimator_from_string(*args.estimator);
        scenario.validate();

        const fs::path dir = resolve_out_dir(args.out_dir);
        SweepOptions opts;
        opts.threads = args.threads;
        if (!args.quiet)
            opts.on_point = [&](const SweepPoint &p) {
                err << fmt::format("{} {} snr={:g} dB: {} trials in {:.1f} s\n", scenario.name, p.variant, p.snr_db,
                                   p.trials, p.runtime_s);
            };
        const SweepResult result = run_sweep(scenario, opts);

        const bool csv = format == io::SweepFormat::Csv;
        const std::string text = csv ? io::sweep_csv(result) : io::sweep_json_lines(result);
        emit_with_manifest(dir / (scenario.name + (csv ? ".csv" : ".jsonl")), text, nullptr,
                           manifest_for("sweep", scenario.name, scenario.base, {scenario.seed}), out);
        return 0;
    });
}

int cmd_presets(std::ostream &out)
{
    for (const auto &s : preset_scenarios())
    {
        std::string variants;
        for (const auto &v : s.variants)
            variants += (variants.empty() ? "" : " ") + (v.label.empty() ? std::string("base") : v.label);
        out << fmt::format("{:<10} {} [variants: {}; {} trials; estimator {}{}]\n", s.name, s.description, variants,
                           s.trials, to_string(s.estimator), s.crlb ? " + crlb" : "");
    }
    return 0;
}

} // namespace risce::tools
