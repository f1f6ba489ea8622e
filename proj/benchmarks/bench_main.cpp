#include <benchmark/benchmark.h>

#include "sastirap/protocol.hpp"
#include "sastirap/sweeps.hpp"
#include "sastirap/tomography.hpp"

using namespace sastirap;

namespace {

const QutritParams kParams = QutritParams::transmon_default();

ProtocolSpec base(FidelityTier tier, CdMode cd) {
    ProtocolSpec p;
    p.tier = tier;
    p.cd = cd;
    p.readout = ReadoutMode::AfterPumpPeak;
    return p;
}

void BM_HamiltonianIdeal(benchmark::State& state) {
    const ProtocolSpec p = base(FidelityTier::IdealRwa, CdMode::AnalyticEffective);
    const HamiltonianFn h = protocol_hamiltonian(p, kParams);
    double t = -50.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(h(t));
        t = t > 50.0 ? -50.0 : t + 0.01;
    }
}
BENCHMARK(BM_HamiltonianIdeal);

void BM_HamiltonianCrossCoupling(benchmark::State& state) {
    const ProtocolSpec p = base(FidelityTier::CrossCouplingRwa, CdMode::PhysicalTwoPhoton);
    const HamiltonianFn h = protocol_hamiltonian(p, kParams);
    double t = -50.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(h(t));
        t = t > 50.0 ? -50.0 : t + 0.01;
    }
}
BENCHMARK(BM_HamiltonianCrossCoupling);

void BM_RunIdeal(benchmark::State& state) {
    ProtocolSpec p = base(FidelityTier::IdealRwa, CdMode::AnalyticEffective);
    p.dissipation = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(final_p2(p, kParams));
}
BENCHMARK(BM_RunIdeal)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RunCrossCoupling(benchmark::State& state) {
    ProtocolSpec p = base(FidelityTier::CrossCouplingRwa, CdMode::PhysicalTwoPhoton);
    p.integrator = IntegratorConfig{state.range(0) ? IntegratorMethod::AdaptiveDopri5 : IntegratorMethod::Rk4,
                                    0.005, 1e-9, 1e-9, 0.5, 1e-9};
    for (auto _ : state) benchmark::DoNotOptimize(final_p2(p, kParams));
}
BENCHMARK(BM_RunCrossCoupling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PhaseSearch(benchmark::State& state) {
    const ProtocolSpec p = base(FidelityTier::IdealRwa, CdMode::AnalyticEffective);
    for (auto _ : state) benchmark::DoNotOptimize(optimize_phase(p, kParams));
}
BENCHMARK(BM_PhaseSearch)->Unit(benchmark::kMillisecond);

void BM_SweepGrid(benchmark::State& state) {
    SweepSpec s;
    s.base = base(FidelityTier::IdealRwa, CdMode::AnalyticEffective);
    s.axes = {{SweepAxis::Sigma, 10.0, 30.0, 8}, {SweepAxis::TsOverSigma, 1.0, 2.0, 8}};
    SweepOptions o;
    o.jobs = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep(s, kParams, o));
}
BENCHMARK(BM_SweepGrid)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Extract(benchmark::State& state) {
    const CalibrationSet cal = make_calibration(default_templates(), 2.0, static_cast<int>(state.range(0)));
    const Trace t = synthesize_measured_trace(Eigen::Vector3d(0.1, 0.2, 0.7), cal, 0.01, 3);
    for (auto _ : state) benchmark::DoNotOptimize(extract_populations(t, cal));
}
BENCHMARK(BM_Extract)->Arg(250)->Arg(4000);

}  // namespace
BENCHMARK_MAIN();
