#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "spinecho/constants.hpp"
#include "spinecho/echo_schedule.hpp"
#include "spinecho/ensemble.hpp"
#include "spinecho/fitting.hpp"
#include "spinecho/geometry.hpp"
#include "spinecho/noise.hpp"
#include "spinecho/photon_stats.hpp"

namespace {

using namespace spinecho;

constexpr double deg = std::numbers::pi / 180.0;

BeamGeometry reference_geometry() {
    return BeamGeometry::from_angles(795e-9, 795e-9, 1.1 * deg, 2.1 * deg);
}

EnsembleSpec thermal_spec(std::size_t n_atoms) {
    EnsembleSpec spec;
    spec.n_atoms = n_atoms;
    spec.temperature = 15e-6;
    spec.cloud_sigma = {300e-6, 300e-6, 300e-6};
    spec.mode_waist = 102e-6;
    spec.atom_mass = constants::rb87_mass_kg;
    return spec;
}

void BM_SampleAtoms(benchmark::State& state) {
    const EnsembleSpec spec = thermal_spec(static_cast<std::size_t>(state.range(0)));
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto sample = sample_atoms(spec, seed++);
        benchmark::DoNotOptimize(sample.positions.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleAtoms)->Range(1 << 12, 1 << 18);

void BM_EchoEfficiencyMc(benchmark::State& state) {
    const BeamGeometry geom = reference_geometry();
    const EnsembleSpec spec = thermal_spec(static_cast<std::size_t>(state.range(0)));
    const AtomSample atoms = sample_atoms(spec, 7);
    const EchoSchedule sched = schedule_for(geom, 600e-6, 0.03);
    for (auto _ : state) {
        benchmark::DoNotOptimize(echo_efficiency_mc(atoms, geom, sched).value);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EchoEfficiencyMc)->Range(1 << 12, 1 << 18);

void BM_ClosedFormScan(benchmark::State& state) {
    const BeamGeometry geom = reference_geometry();
    const EnsembleSpec spec = thermal_spec(16);
    const double dt_star = rephasing_ratio(geom) * 600e-6;
    const double width = scan_half_width_1e(geom, spec);
    for (auto _ : state) {
        auto curve = scan_delta_t(geom, spec, 600e-6, dt_star - 3 * width, dt_star + 3 * width,
                                  static_cast<std::size_t>(state.range(0)),
                                  EffMode::closed_form, 0);
        benchmark::DoNotOptimize(curve.data());
    }
}
BENCHMARK(BM_ClosedFormScan)->Arg(61)->Arg(241);

void BM_NoiseMap(benchmark::State& state) {
    const BeamGeometry geom = reference_geometry();
    const EnsembleSpec spec = thermal_spec(20000);
    const AtomSample atoms = sample_atoms(spec, 3);
    NoiseGrid grid;
    grid.nx = grid.ny = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto map = directional_noise_map(atoms, geom, 0.03, grid, 2, 1, spec.mode_waist);
        benchmark::DoNotOptimize(map.photons.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0) * 20000);
}
BENCHMARK(BM_NoiseMap)->Arg(31)->Arg(61);

void BM_SimulateCounts(benchmark::State& state) {
    const DlczParams params = calibrate_dlcz(0.0035, 0.0028, 24.3, 0.1, 0.008);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto counts =
            simulate_counts(params, 0.94, true, static_cast<std::uint64_t>(state.range(0)),
                            seed++);
        benchmark::DoNotOptimize(counts.n_wr);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateCounts)->Range(1 << 16, 1 << 20);

void BM_FitDampedCosine(benchmark::State& state) {
    std::vector<double> ts, ys;
    for (int i = 0; i < 161; ++i) {
        const double t = 46e-6 * i / 160.0;
        ts.push_back(t);
        ys.push_back(-0.5 * std::cos(2.0 * std::numbers::pi * 87.1e3 * t) *
                         std::exp(-13.4e3 * t) +
                     0.5);
    }
    for (auto _ : state) {
        auto fit = fit_damped_cosine(ts, ys);
        benchmark::DoNotOptimize(fit.converged);
    }
}
BENCHMARK(BM_FitDampedCosine);

} // namespace

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
