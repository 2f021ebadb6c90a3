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

#include "risce/crlb.hpp"
#include "risce/harness.hpp"
#include "risce/nomp.hpp"

#include <benchmark/benchmark.h>

#include <memory>

namespace
{

using namespace risce;

struct Fixture
{
    TrialDraw draw;
    std::unique_ptr<ObservationModel> model;
    std::unique_ptr<GridSearcher> searcher;
};

const Fixture &desk_fixture()
{
    static const Fixture f = [] {
        const Scenario sc = find_preset("fig4-desk");
        Fixture out;
        out.draw = draw_trial(sc.base, 10.0, 7, sc.sampling);
        out.model = std::make_unique<ObservationModel>(out.draw.config, out.draw.profile, out.draw.channel.geometry);
        out.searcher = std::make_unique<GridSearcher>(*out.model, GridSpec::coarse(out.draw.config),
                                                      GridSpec::precise(out.draw.config));
        return out;
    }();
    return f;
}

void BM_Atom(benchmark::State &state)
{
    const Fixture &f = desk_fixture();
    const PathParams &p = f.draw.channel.paths.front();
    for (auto _ : state)
        benchmark::DoNotOptimize(f.model->atom(p.elevation, p.azimuth, p.delay));
}
BENCHMARK(BM_Atom);

void BM_GreedySearch(benchmark::State &state)
{
    const Fixture &f = desk_fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(f.searcher->greedy(f.draw.observation.y));
}
BENCHMARK(BM_GreedySearch)->Unit(benchmark::kMillisecond);

void BM_NewtonDerivatives(benchmark::State &state)
{
    const Fixture &f = desk_fixture();
    const PathParams &p = f.draw.channel.paths.front();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            newton_derivatives(p.gain, p.elevation, p.azimuth, p.delay, f.draw.observation.y, *f.model));
}
BENCHMARK(BM_NewtonDerivatives)->Unit(benchmark::kMicrosecond);

void BM_SingleRefine(benchmark::State &state)
{
    const Fixture &f = desk_fixture();
    const PathParams &p = f.draw.channel.paths.front();
    const PathEstimate start{p.gain, p.elevation + 0.01, p.azimuth - 0.01, p.delay, {}};
    const int iterations = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(single_refine(start, f.draw.observation.y, *f.model, iterations));
}
BENCHMARK(BM_SingleRefine)->Arg(1)->Arg(5)->Unit(benchmark::kMicrosecond);

void BM_RunNomp(benchmark::State &state)
{
    const Fixture &f = desk_fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(run_nomp(f.draw.observation.y, *f.model, *f.searcher));
}
BENCHMARK(BM_RunNomp)->Unit(benchmark::kMillisecond);

void BM_RunOmp(benchmark::State &state)
{
    const Fixture &f = desk_fixture();
    NompOptions o;
    o.refine = false;
    for (auto _ : state)
        benchmark::DoNotOptimize(run_nomp(f.draw.observation.y, *f.model, *f.searcher, o));
}
BENCHMARK(BM_RunOmp)->Unit(benchmark::kMillisecond);

void BM_ComputeCrlb(benchmark::State &state)
{
    const Fixture &f = desk_fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(compute_crlb(f.draw.channel.paths, *f.model, f.draw.config.noise_variance));
}
BENCHMARK(BM_ComputeCrlb)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
