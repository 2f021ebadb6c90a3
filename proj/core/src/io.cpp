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

#include "risce/io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace risce::io
{

using json = nlohmann::json;

namespace
{

[[noreturn]] void fail(const std::string &ctx, const std::string &what)
{
    throw std::invalid_argument(ctx.empty() ? what : ctx + ": " + what);
}

std::string join(const std::string &ctx, const std::string &key) { return ctx.empty() ? key : ctx + "." + key; }

json parse_document(const std::string &text, const std::string &ctx)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        fail(ctx, std::string("malformed JSON (") + e.what() + ")");
    }
}

const json &require(const json &j, const std::string &key, const std::string &ctx)
{
    if (!j.is_object())
        fail(ctx, "expected an object");
    const auto it = j.find(key);
    if (it == j.end())
        fail(join(ctx, key), "missing field");
    return *it;
}

void reject_unknown(const json &j, const std::set<std::string> &known, const std::string &ctx)
{
    if (!j.is_object())
        fail(ctx, "expected an object");
    for (const auto &item : j.items())
        if (!known.contains(item.key()))
            fail(join(ctx, item.key()), "unknown key");
}

double as_double(const json &v, const std::string &field)
{
    if (v.is_null())
        return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number())
        fail(field, "expected a number");
    return v.get<double>();
}

int as_int(const json &v, const std::string &field)
{
    if (!v.is_number_integer())
        fail(field, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        fail(field, "integer out of range");
    return static_cast<int>(x);
}

std::uint64_t as_u64(const json &v, const std::string &field)
{
    if (!v.is_number_unsigned())
        fail(field, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool as_bool(const json &v, const std::string &field)
{
    if (!v.is_boolean())
        fail(field, "expected true or false");
    return v.get<bool>();
}

std::string as_string(const json &v, const std::string &field)
{
    if (!v.is_string())
        fail(field, "expected a string");
    return v.get<std::string>();
}

const json &as_array(const json &v, const std::string &field)
{
    if (!v.is_array())
        fail(field, "expected an array");
    return v;
}

std::vector<double> as_double_vector(const json &v, const std::string &field)
{
    std::vector<double> out;
    for (const auto &x : as_array(v, field))
        out.push_back(as_double(x, field));
    return out;
}

std::vector<int> as_int_vector(const json &v, const std::string &field)
{
    std::vector<int> out;
    for (const auto &x : as_array(v, field))
        out.push_back(as_int(x, field));
    return out;
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json &v, const std::string &field)
{
    if (!v.is_array() || v.size() != 2)
        fail(field, "expected a [re, im] pair");
    return {as_double(v[0], field), as_double(v[1], field)};
}

void check_header(const json &doc, const std::string &kind)
{
    const std::string got = as_string(require(doc, "kind", kind), "kind");
    if (got != kind)
        fail("kind", "schema mismatch: expected '" + kind + "', got '" + got + "'");
    const int version = as_int(require(doc, "schema_version", kind), "schema_version");
    if (version != kSchemaVersion)
        fail("schema_version", fmt::format("unsupported version {} (expected {})", version, kSchemaVersion));
}

json header(const std::string &kind) { return json{{"kind", kind}, {"schema_version", kSchemaVersion}}; }

// ---- config ----

json rates_to_json(const GridRates &r) { return json{{"phi", r.phi}, {"psi", r.psi}, {"tau", r.tau}}; }

GridRates rates_from_json(const json &j, const std::string &ctx)
{
    reject_unknown(j, {"phi", "psi", "tau"}, ctx);
    GridRates r;
    if (j.contains("phi"))
        r.phi = as_double(j["phi"], join(ctx, "phi"));
    if (j.contains("psi"))
        r.psi = as_double(j["psi"], join(ctx, "psi"));
    if (j.contains("tau"))
        r.tau = as_double(j["tau"], join(ctx, "tau"));
    return r;
}

const std::set<std::string> kConfigKeys = {
    "carrier_freq_hz",  "bandwidth_hz",        "num_subcarriers",     "pilot_subcarriers",
    "num_pilot_subcarriers", "num_pilot_symbols", "num_bs_antennas",  "ris_nx",
    "ris_ny",           "element_spacing_m",   "noise_variance",      "false_alarm_rate",
    "max_delay_s",      "coarse_rates",        "precise_rates",       "single_refine_iters",
    "cyclic_refine_iters", "num_paths",        "max_paths",           "rng_seed"};

json config_json(const SystemConfig &cfg)
{
    return json{{"carrier_freq_hz", cfg.carrier_freq_hz},
                {"bandwidth_hz", cfg.bandwidth_hz},
                {"num_subcarriers", cfg.num_subcarriers},
                {"pilot_subcarriers", cfg.pilot_subcarriers},
                {"num_pilot_subcarriers", cfg.num_pilot_subcarriers()},
                {"num_pilot_symbols", cfg.num_pilot_symbols},
                {"num_bs_antennas", cfg.num_bs_antennas},
                {"ris_nx", cfg.ris_nx},
                {"ris_ny", cfg.ris_ny},
                {"element_spacing_m", cfg.element_spacing_m},
                {"noise_variance", cfg.noise_variance},
                {"false_alarm_rate", cfg.false_alarm_rate},
                {"max_delay_s", cfg.max_delay_s},
                {"coarse_rates", rates_to_json(cfg.coarse_rates)},
                {"precise_rates", rates_to_json(cfg.precise_rates)},
                {"single_refine_iters", cfg.single_refine_iters},
                {"cyclic_refine_iters", cfg.cyclic_refine_iters},
                {"num_paths", cfg.num_paths},
                {"max_paths", cfg.max_paths},
                {"rng_seed", cfg.rng_seed}};
}

SystemConfig config_from(const json &j, const std::string &ctx)
{
    reject_unknown(j, kConfigKeys, ctx);
    SystemConfig cfg;
    auto field = [&](const char *key) { return join(ctx, key); };
    auto dbl = [&](const char *key, double &dst) {
        if (j.contains(key))
            dst = as_double(j[key], field(key));
    };
    auto integer = [&](const char *key, int &dst) {
        if (j.contains(key))
            dst = as_int(j[key], field(key));
    };
    dbl("carrier_freq_hz", cfg.carrier_freq_hz);
    dbl("bandwidth_hz", cfg.bandwidth_hz);
    integer("num_subcarriers", cfg.num_subcarriers);
    integer("num_pilot_symbols", cfg.num_pilot_symbols);
    integer("num_bs_antennas", cfg.num_bs_antennas);
    integer("ris_nx", cfg.ris_nx);
    integer("ris_ny", cfg.ris_ny);
    dbl("noise_variance", cfg.noise_variance);
    dbl("false_alarm_rate", cfg.false_alarm_rate);
    dbl("max_delay_s", cfg.max_delay_s);
    integer("single_refine_iters", cfg.single_refine_iters);
    integer("cyclic_refine_iters", cfg.cyclic_refine_iters);
    integer("num_paths", cfg.num_paths);
    integer("max_paths", cfg.max_paths);
    if (j.contains("rng_seed"))
        cfg.rng_seed = as_u64(j["rng_seed"], field("rng_seed"));
    if (j.contains("coarse_rates"))
        cfg.coarse_rates = rates_from_json(j["coarse_rates"], field("coarse_rates"));
    if (j.contains("precise_rates"))
        cfg.precise_rates = rates_from_json(j["precise_rates"], field("precise_rates"));

    if (j.contains("element_spacing_m"))
        cfg.element_spacing_m = as_double(j["element_spacing_m"], field("element_spacing_m"));
    else if (cfg.carrier_freq_hz > 0.0)
        cfg.element_spacing_m = 0.5 * cfg.wavelength();

    int num_pilots = 12;
    const bool has_count = j.contains("num_pilot_subcarriers");
    if (has_count)
        num_pilots = as_int(j["num_pilot_subcarriers"], field("num_pilot_subcarriers"));
    if (j.contains("pilot_subcarriers"))
    {
        cfg.pilot_subcarriers = as_int_vector(j["pilot_subcarriers"], field("pilot_subcarriers"));
        if (has_count && num_pilots != cfg.num_pilot_subcarriers())
            fail(field("num_pilot_subcarriers"), "disagrees with the length of pilot_subcarriers");
    }
    else
    {
        try
        {
            cfg.pilot_subcarriers =
                default_pilot_subcarriers(cfg.num_subcarriers, num_pilots, cfg.bandwidth_hz, cfg.max_delay_s);
        }
        catch (const std::invalid_argument &e)
        {
            fail(ctx, e.what());
        }
    }
    try
    {
        cfg.validate();
    }
    catch (const std::invalid_argument &e)
    {
        fail(ctx, e.what());
    }
    return cfg;
}

void apply_override(json &doc, const std::string &assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        fail("override", "expected key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try
    {
        value = json::parse(text);
    }
    catch (const json::parse_error &)
    {
        value = text;
    }
    const auto dot = key.find('.');
    if (dot == std::string::npos)
    {
        doc[key] = value;
        return;
    }
    json &inner = doc[key.substr(0, dot)];
    if (inner.is_null())
        inner = json::object();
    if (!inner.is_object())
        fail(key.substr(0, dot), "cannot override a member of a non-object field");
    inner[key.substr(dot + 1)] = value;
}

// ---- domain records ----

json geometry_json(const LinkGeometry &g)
{
    return json{{"bs_aoa", g.bs_aoa}, {"ris_elev_aod", g.ris_elev_aod}, {"ris_azim_aod", g.ris_azim_aod}};
}

LinkGeometry geometry_from(const json &j, const std::string &ctx)
{
    reject_unknown(j, {"bs_aoa", "ris_elev_aod", "ris_azim_aod"}, ctx);
    LinkGeometry g;
    g.bs_aoa = as_double(require(j, "bs_aoa", ctx), join(ctx, "bs_aoa"));
    g.ris_elev_aod = as_double(require(j, "ris_elev_aod", ctx), join(ctx, "ris_elev_aod"));
    g.ris_azim_aod = as_double(require(j, "ris_azim_aod", ctx), join(ctx, "ris_azim_aod"));
    return g;
}

json profile_json(const RisTrainingProfile &p)
{
    json rows = json::array();
    for (Eigen::Index m = 0; m < p.phases().rows(); ++m)
    {
        json row = json::array();
        for (Eigen::Index r = 0; r < p.phases().cols(); ++r)
            row.push_back(p.phases()(m, r));
        rows.push_back(std::move(row));
    }
    return rows;
}

RisTrainingProfile profile_from(const json &j, const std::string &ctx)
{
    as_array(j, ctx);
    const auto rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows ? static_cast<Eigen::Index>(as_array(j[0], ctx).size()) : 0;
    Eigen::MatrixXd phases(rows, cols);
    for (Eigen::Index m = 0; m < rows; ++m)
    {
        const auto row = as_double_vector(j[static_cast<std::size_t>(m)], ctx);
        if (static_cast<Eigen::Index>(row.size()) != cols)
            fail(ctx, "ragged phase matrix");
        for (Eigen::Index r = 0; r < cols; ++r)
            phases(m, r) = row[static_cast<std::size_t>(r)];
    }
    try
    {
        return RisTrainingProfile(std::move(phases));
    }
    catch (const std::exception &e)
    {
        fail(ctx, e.what());
    }
}

json path_json(const PathParams &p)
{
    return json{{"gain", complex_to_json(p.gain)},
                {"elevation", p.elevation},
                {"azimuth", p.azimuth},
                {"delay", p.delay}};
}

PathParams path_from(const json &j, const std::string &ctx)
{
    reject_unknown(j, {"gain", "elevation", "azimuth", "delay"}, ctx);
    PathParams p;
    p.gain = complex_from_json(require(j, "gain", ctx), join(ctx, "gain"));
    p.elevation = as_double(require(j, "elevation", ctx), join(ctx, "elevation"));
    p.azimuth = as_double(require(j, "azimuth", ctx), join(ctx, "azimuth"));
    p.delay = as_double(require(j, "delay", ctx), join(ctx, "delay"));
    return p;
}

json estimate_json(const PathEstimate &p)
{
    return json{{"gain", complex_to_json(p.gain)},
                {"elevation", p.elevation},
                {"azimuth", p.azimuth},
                {"delay", p.delay},
                {"objective_history", p.objective_history}};
}

PathEstimate estimate_from(const json &j, const std::string &ctx)
{
    reject_unknown(j, {"gain", "elevation", "azimuth", "delay", "objective_history"}, ctx);
    PathEstimate p;
    p.gain = complex_from_json(require(j, "gain", ctx), join(ctx, "gain"));
    p.elevation = as_double(require(j, "elevation", ctx), join(ctx, "elevation"));
    p.azimuth = as_double(require(j, "azimuth", ctx), join(ctx, "azimuth"));
    p.delay = as_double(require(j, "delay", ctx), join(ctx, "delay"));
    if (j.contains("objective_history"))
        p.objective_history = as_double_vector(j["objective_history"], join(ctx, "objective_history"));
    return p;
}

std::string fim_mode_string(FimMode m) { return m == FimMode::Full ? "full" : "block-diagonal"; }

FimMode fim_mode_from(const std::string &s)
{
    if (s == "full")
        return FimMode::Full;
    if (s == "block-diagonal")
        return FimMode::BlockDiagonal;
    fail("mode", "expected 'full' or 'block-diagonal', got '" + s + "'");
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

struct Row
{
    std::string estimator;
    std::string metric;
    MetricSummary summary;
};

std::vector<Row> point_rows(const SweepPoint &point)
{
    std::vector<Row> rows;
    auto add = [&](const std::string &name, const EstimatorSummary &s) {
        rows.push_back({name, "nmse_gain", s.gain});
        rows.push_back({name, "nmse_angle", s.angle});
        rows.push_back({name, "nmse_tau", s.tau});
        rows.push_back({name, "nmse_channel", s.channel});
        rows.push_back({name, "misses", s.misses});
        rows.push_back({name, "false_alarms", s.false_alarms});
    };
    if (point.nomp)
        add("nomp", *point.nomp);
    if (point.omp)
        add("omp", *point.omp);
    if (point.crlb)
        rows.push_back({"crlb", "nmse_channel", *point.crlb});
    return rows;
}

std::string csv_field(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace

SystemConfig parse_config(const std::string &json_text, const std::vector<std::string> &overrides)
{
    json doc = json::object();
    if (json_text.find_first_not_of(" \t\r\n") != std::string::npos)
        doc = parse_document(json_text, "config");
    if (!doc.is_object())
        fail("config", "expected a JSON object");
    for (const auto &o : overrides)
        apply_override(doc, o);
    return config_from(doc, "");
}

SystemConfig parse_config(const SystemConfig &base, const std::string &json_text,
                          const std::vector<std::string> &overrides)
{
    json layer = json::object();
    if (json_text.find_first_not_of(" \t\r\n") != std::string::npos)
        layer = parse_document(json_text, "config");
    if (!layer.is_object())
        fail("config", "expected a JSON object");
    for (const auto &o : overrides)
        apply_override(layer, o);

    json doc = config_json(base);
    auto touches = [&](std::initializer_list<const char *> keys) {
        for (const char *k : keys)
            if (layer.contains(k))
                return true;
        return false;
    };
    if (touches({"num_subcarriers", "bandwidth_hz", "max_delay_s", "num_pilot_subcarriers", "pilot_subcarriers"}))
        doc.erase("pilot_subcarriers");
    if (layer.contains("pilot_subcarriers") && !layer.contains("num_pilot_subcarriers"))
        doc.erase("num_pilot_subcarriers");
    if (touches({"carrier_freq_hz"}))
        doc.erase("element_spacing_m");
    for (const auto &item : layer.items())
    {
        if (item.value().is_object() && doc.contains(item.key()) && doc[item.key()].is_object())
            doc[item.key()].update(item.value());
        else
            doc[item.key()] = item.value();
    }
    return config_from(doc, "");
}

SystemConfig load_config(const std::filesystem::path &path, const std::vector<std::string> &overrides)
{
    return parse_config(read_text_file(path), overrides);
}

std::string config_to_json(const SystemConfig &cfg) { return config_json(cfg).dump(2) + "\n"; }

Scenario parse_scenario(const std::string &json_text)
{
    const json j = parse_document(json_text, "scenario");
    reject_unknown(j,
                   {"name", "description", "base", "snr_db", "variants", "trials", "seed", "estimator", "crlb",
                    "noiseless", "sampling"},
                   "scenario");
    Scenario s;
    s.name = j.contains("name") ? as_string(j["name"], "name") : "custom";
    if (j.contains("description"))
        s.description = as_string(j["description"], "description");
    s.base = config_from(j.contains("base") ? j["base"] : json::object(), "base");
    s.snr_db = as_double_vector(require(j, "snr_db", "scenario"), "snr_db");
    if (j.contains("variants"))
    {
        s.variants.clear();
        std::size_t index = 0;
        for (const auto &v : as_array(j["variants"], "variants"))
        {
            const std::string ctx = fmt::format("variants[{}]", index++);
            reject_unknown(v, {"label", "M", "L", "ris"}, ctx);
            SweepVariant var;
            if (v.contains("label"))
                var.label = as_string(v["label"], join(ctx, "label"));
            if (v.contains("M"))
                var.num_pilot_symbols = as_int(v["M"], join(ctx, "M"));
            if (v.contains("L"))
                var.num_pilot_subcarriers = as_int(v["L"], join(ctx, "L"));
            if (v.contains("ris"))
            {
                const auto dims = as_int_vector(v["ris"], join(ctx, "ris"));
                if (dims.size() != 2)
                    fail(join(ctx, "ris"), "expected [nx, ny]");
                var.ris_dims = std::make_pair(dims[0], dims[1]);
            }
            s.variants.push_back(std::move(var));
        }
    }
    if (j.contains("trials"))
        s.trials = as_int(j["trials"], "trials");
    if (j.contains("seed"))
        s.seed = as_u64(j["seed"], "seed");
    if (j.contains("estimator"))
    {
        try
        {
            s.estimator = estimator_from_string(as_string(j["estimator"], "estimator"));
        }
        catch (const std::invalid_argument &e)
        {
            fail("estimator", e.what());
        }
    }
    if (j.contains("crlb"))
        s.crlb = as_bool(j["crlb"], "crlb");
    if (j.contains("noiseless"))
        s.noiseless = as_bool(j["noiseless"], "noiseless");
    if (j.contains("sampling"))
    {
        const json &sm = j["sampling"];
        reject_unknown(sm, {"min_separation", "on_grid"}, "sampling");
        if (sm.contains("min_separation"))
            s.sampling.min_separation = as_double(sm["min_separation"], "sampling.min_separation");
        if (sm.contains("on_grid"))
            s.sampling.on_grid = as_bool(sm["on_grid"], "sampling.on_grid");
    }
    s.validate();
    return s;
}

std::string scenario_to_json(const Scenario &s)
{
    json variants = json::array();
    for (const auto &v : s.variants)
    {
        json o{{"label", v.label}};
        if (v.num_pilot_symbols)
            o["M"] = *v.num_pilot_symbols;
        if (v.num_pilot_subcarriers)
            o["L"] = *v.num_pilot_subcarriers;
        if (v.ris_dims)
            o["ris"] = json::array({v.ris_dims->first, v.ris_dims->second});
        variants.push_back(std::move(o));
    }
    const json j{{"name", s.name},
                 {"description", s.description},
                 {"base", config_json(s.base)},
                 {"snr_db", s.snr_db},
                 {"variants", variants},
                 {"trials", s.trials},
                 {"seed", s.seed},
                 {"estimator", to_string(s.estimator)},
                 {"crlb", s.crlb},
                 {"noiseless", s.noiseless},
                 {"sampling", {{"min_separation", s.sampling.min_separation}, {"on_grid", s.sampling.on_grid}}}};
    return j.dump(2) + "\n";
}

void ObservationRecord::check_shape() const
{
    if (observation.pilot_subcarriers != config.pilot_subcarriers)
        fail("layout.pilot_subcarriers", "does not match the config pilot set");
    if (observation.num_pilot_symbols != config.num_pilot_symbols)
        fail("layout.num_pilot_symbols", "does not match config.num_pilot_symbols");
    if (observation.num_bs_antennas != config.num_bs_antennas)
        fail("layout.num_bs_antennas", "does not match config.num_bs_antennas");
    if (static_cast<std::size_t>(observation.y.size()) != config.observation_length())
        fail("y", fmt::format("length {} does not match L*M*N_b = {}", observation.y.size(),
                              config.observation_length()));
    if (profile.num_symbols() != config.num_pilot_symbols || profile.num_elements() != config.num_ris_elements())
        fail("profile", fmt::format("shape {}x{} does not match M x N_r = {}x{}", profile.num_symbols(),
                                    profile.num_elements(), config.num_pilot_symbols, config.num_ris_elements()));
}

std::string to_json(const ChannelRecord &r)
{
    json j = header("channel");
    j["config"] = config_json(r.config);
    j["geometry"] = geometry_json(r.channel.geometry);
    json paths = json::array();
    for (const auto &p : r.channel.paths)
        paths.push_back(path_json(p));
    j["paths"] = paths;
    j["profile"] = profile_json(r.profile);
    return j.dump(2) + "\n";
}

ChannelRecord channel_record_from_json(const std::string &text)
{
    const json j = parse_document(text, "channel");
    check_header(j, "channel");
    reject_unknown(j, {"kind", "schema_version", "config", "geometry", "paths", "profile"}, "channel");
    ChannelRecord r;
    r.config = config_from(require(j, "config", "channel"), "config");
    r.channel.geometry = geometry_from(require(j, "geometry", "channel"), "geometry");
    std::size_t i = 0;
    for (const auto &p : as_array(require(j, "paths", "channel"), "paths"))
        r.channel.paths.push_back(path_from(p, fmt::format("paths[{}]", i++)));
    r.profile = profile_from(require(j, "profile", "channel"), "profile");
    return r;
}

std::string to_json(const ObservationRecord &r)
{
    json j = header("observation");
    j["config"] = config_json(r.config);
    j["geometry"] = geometry_json(r.geometry);
    j["profile"] = profile_json(r.profile);
    j["layout"] = json{{"pilot_subcarriers", r.observation.pilot_subcarriers},
                       {"num_pilot_symbols", r.observation.num_pilot_symbols},
                       {"num_bs_antennas", r.observation.num_bs_antennas}};
    j["noise_variance"] = r.observation.noise_variance;
    json y = json::array();
    for (Eigen::Index i = 0; i < r.observation.y.size(); ++i)
        y.push_back(complex_to_json(r.observation.y[i]));
    j["y"] = std::move(y);
    return j.dump(2) + "\n";
}

ObservationRecord observation_record_from_json(const std::string &text)
{
    const json j = parse_document(text, "observation");
    check_header(j, "observation");
    reject_unknown(j, {"kind", "schema_version", "config", "geometry", "profile", "layout", "noise_variance", "y"},
                   "observation");
    ObservationRecord r;
    r.config = config_from(require(j, "config", "observation"), "config");
    r.geometry = geometry_from(require(j, "geometry", "observation"), "geometry");
    r.profile = profile_from(require(j, "profile", "observation"), "profile");
    const json &layout = require(j, "layout", "observation");
    reject_unknown(layout, {"pilot_subcarriers", "num_pilot_symbols", "num_bs_antennas"}, "layout");
    r.observation.pilot_subcarriers =
        as_int_vector(require(layout, "pilot_subcarriers", "layout"), "layout.pilot_subcarriers");
    r.observation.num_pilot_symbols =
        as_int(require(layout, "num_pilot_symbols", "layout"), "layout.num_pilot_symbols");
    r.observation.num_bs_antennas = as_int(require(layout, "num_bs_antennas", "layout"), "layout.num_bs_antennas");
    r.observation.noise_variance = as_double(require(j, "noise_variance", "observation"), "noise_variance");
    const json &y = as_array(require(j, "y", "observation"), "y");
    r.observation.y.resize(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i)
        r.observation.y[static_cast<Eigen::Index>(i)] = complex_from_json(y[i], fmt::format("y[{}]", i));
    r.check_shape();
    return r;
}

std::string to_json(const EstimatesRecord &r)
{
    json j = header("estimates");
    j["config"] = config_json(r.config);
    j["estimator"] = r.estimator;
    json paths = json::array();
    for (const auto &p : r.estimates.paths)
        paths.push_back(estimate_json(p));
    j["paths"] = paths;
    j["residual_power"] = r.estimates.residual_power;
    j["iterations_used"] = r.estimates.iterations_used;
    j["stop_reason"] = to_string(r.estimates.stop_reason);
    j["residual_history"] = r.estimates.residual_history;
    j["ill_conditioned_gains"] = r.estimates.ill_conditioned_gains;
    return j.dump(2) + "\n";
}

EstimatesRecord estimates_record_from_json(const std::string &text)
{
    const json j = parse_document(text, "estimates");
    check_header(j, "estimates");
    reject_unknown(j,
                   {"kind", "schema_version", "config", "estimator", "paths", "residual_power", "iterations_used",
                    "stop_reason", "residual_history", "ill_conditioned_gains"},
                   "estimates");
    EstimatesRecord r;
    r.config = config_from(require(j, "config", "estimates"), "config");
    r.estimator = as_string(require(j, "estimator", "estimates"), "estimator");
    if (r.estimator != "nomp" && r.estimator != "omp")
        fail("estimator", "expected nomp or omp, got '" + r.estimator + "'");
    std::size_t i = 0;
    for (const auto &p : as_array(require(j, "paths", "estimates"), "paths"))
        r.estimates.paths.push_back(estimate_from(p, fmt::format("paths[{}]", i++)));
    r.estimates.residual_power = as_double(require(j, "residual_power", "estimates"), "residual_power");
    r.estimates.iterations_used = as_int(require(j, "iterations_used", "estimates"), "iterations_used");
    try
    {
        r.estimates.stop_reason = stop_reason_from_string(as_string(require(j, "stop_reason", "estimates"), "stop_reason"));
    }
    catch (const std::invalid_argument &e)
    {
        fail("stop_reason", e.what());
    }
    r.estimates.residual_history = as_double_vector(require(j, "residual_history", "estimates"), "residual_history");
    r.estimates.ill_conditioned_gains =
        as_bool(require(j, "ill_conditioned_gains", "estimates"), "ill_conditioned_gains");
    return r;
}

std::string to_json(const CrlbRecord &r)
{
    const CrlbReport &rep = r.report;
    json j = header("crlb");
    j["config"] = config_json(r.config);
    j["noise_variance"] = rep.noise_variance;
    j["mode"] = fim_mode_string(rep.mode);
    json bounds = json::array();
    for (const auto &b : rep.variance_bounds)
    {
        if (!b)
        {
            bounds.push_back(nullptr);
            continue;
        }
        json v = json::array();
        for (int i = 0; i < 5; ++i)
            v.push_back(json_number((*b)[i]));
        bounds.push_back(std::move(v));
    }
    j["variance_bounds"] = bounds;
    json conditions = json::array();
    for (double c : rep.block_conditions)
        conditions.push_back(json_number(c));
    j["block_conditions"] = conditions;
    json flagged = json::array();
    for (bool f : rep.flagged)
        flagged.push_back(f);
    j["flagged"] = flagged;
    json csi = json::array();
    for (double c : rep.csi_bounds)
        csi.push_back(json_number(c));
    j["csi_bounds"] = csi;
    j["aggregate"] = rep.aggregate ? json_number(*rep.aggregate) : json(nullptr);
    j["channel_power"] = rep.channel_power;
    return j.dump(2) + "\n";
}

CrlbRecord crlb_record_from_json(const std::string &text)
{
    const json j = parse_document(text, "crlb");
    check_header(j, "crlb");
    reject_unknown(j,
                   {"kind", "schema_version", "config", "noise_variance", "mode", "variance_bounds",
                    "block_conditions", "flagged", "csi_bounds", "aggregate", "channel_power"},
                   "crlb");
    CrlbRecord r;
    CrlbReport &rep = r.report;
    r.config = config_from(require(j, "config", "crlb"), "config");
    rep.noise_variance = as_double(require(j, "noise_variance", "crlb"), "noise_variance");
    rep.mode = fim_mode_from(as_string(require(j, "mode", "crlb"), "mode"));
    for (const auto &b : as_array(require(j, "variance_bounds", "crlb"), "variance_bounds"))
    {
        if (b.is_null())
        {
            rep.variance_bounds.emplace_back(std::nullopt);
            continue;
        }
        const auto v = as_double_vector(b, "variance_bounds");
        if (v.size() != 5)
            fail("variance_bounds", "expected 5 entries per path");
        rep.variance_bounds.emplace_back(Vector5d(v.data()));
    }
    rep.block_conditions = as_double_vector(require(j, "block_conditions", "crlb"), "block_conditions");
    for (const auto &f : as_array(require(j, "flagged", "crlb"), "flagged"))
        rep.flagged.push_back(as_bool(f, "flagged"));
    rep.csi_bounds = as_double_vector(require(j, "csi_bounds", "crlb"), "csi_bounds");
    const json &agg = require(j, "aggregate", "crlb");
    if (!agg.is_null())
        rep.aggregate = as_double(agg, "aggregate");
    rep.channel_power = as_double(require(j, "channel_power", "crlb"), "channel_power");
    return r;
}

std::string to_json(const RunManifest &m)
{
    json j = header("manifest");
    j["command"] = m.command;
    j["scenario"] = m.scenario;
    j["config"] = config_json(m.config);
    j["seeds"] = m.seeds;
    j["tool_version"] = m.tool_version;
    j["timestamp"] = m.timestamp;
    j["outputs"] = m.outputs;
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string &text)
{
    const json j = parse_document(text, "manifest");
    check_header(j, "manifest");
    reject_unknown(j,
                   {"kind", "schema_version", "command", "scenario", "config", "seeds", "tool_version", "timestamp",
                    "outputs"},
                   "manifest");
    RunManifest m;
    m.command = as_string(require(j, "command", "manifest"), "command");
    m.scenario = as_string(require(j, "scenario", "manifest"), "scenario");
    m.config = config_from(require(j, "config", "manifest"), "config");
    for (const auto &s : as_array(require(j, "seeds", "manifest"), "seeds"))
        m.seeds.push_back(as_u64(s, "seeds"));
    m.tool_version = as_string(require(j, "tool_version", "manifest"), "tool_version");
    m.timestamp = as_string(require(j, "timestamp", "manifest"), "timestamp");
    for (const auto &o : as_array(require(j, "outputs", "manifest"), "outputs"))
        m.outputs.push_back(as_string(o, "outputs"));
    return m;
}

SweepFormat sweep_format_from_string(const std::string &s)
{
    if (s == "csv")
        return SweepFormat::Csv;
    if (s == "json-lines")
        return SweepFormat::JsonLines;
    throw std::invalid_argument("format: expected csv or json-lines, got '" + s + "'");
}

std::string sweep_csv_header() { return "scenario,variant,M,L,Nx,Ny,snr_db,estimator,metric,mean,stderr,trials\n"; }

std::string sweep_csv_rows(const std::string &scenario, const SweepPoint &point)
{
    std::string out;
    const SystemConfig &c = point.config;
    for (const auto &row : point_rows(point))
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", csv_field(scenario), csv_field(point.variant),
                           c.num_pilot_symbols, c.num_pilot_subcarriers(), c.ris_nx, c.ris_ny, num(point.snr_db),
                           row.estimator, row.metric, num(row.summary.mean), num(row.summary.stderr_),
                           row.summary.count);
    return out;
}

std::string sweep_csv(const SweepResult &result)
{
    std::string out = sweep_csv_header();
    for (const auto &p : result.points)
        out += sweep_csv_rows(result.scenario, p);
    return out;
}

std::string sweep_json_lines_rows(const std::string &scenario, const SweepPoint &point)
{
    std::string out;
    const SystemConfig &c = point.config;
    for (const auto &row : point_rows(point))
    {
        const json j{{"scenario", scenario},
                     {"variant", point.variant},
                     {"M", c.num_pilot_symbols},
                     {"L", c.num_pilot_subcarriers()},
                     {"Nx", c.ris_nx},
                     {"Ny", c.ris_ny},
                     {"snr_db", point.snr_db},
                     {"estimator", row.estimator},
                     {"metric", row.metric},
                     {"mean", json_number(row.summary.mean)},
                     {"stderr", json_number(row.summary.stderr_)},
                     {"trials", row.summary.count}};
        out += j.dump() + "\n";
    }
    return out;
}

std::string sweep_json_lines(const SweepResult &result)
{
    std::string out;
    for (const auto &p : result.points)
        out += sweep_json_lines_rows(result.scenario, p);
    return out;
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_text_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw std::runtime_error("read error on '" + path.string() + "'");
    return ss.str();
}

void write_text_file(const std::filesystem::path &path, const std::string &text)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << text;
        out.flush();
        if (!out)
            throw std::runtime_error("write error on '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw std::runtime_error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::filesystem::path manifest_path_for(const std::filesystem::path &result)
{
    std::filesystem::path p = result;
    p += ".manifest.json";
    return p;
}

} // namespace risce::io
