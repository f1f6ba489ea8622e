#include <gtest/gtest.h>

#include <sstream>

#include "sastirap/dynamics.hpp"
#include "sastirap/hamiltonians.hpp"

using namespace sastirap;

namespace {

const HamiltonianFn kZeroH = [](double) { return Mat3::Zero().eval(); };

IntegratorConfig tight(IntegratorMethod m = IntegratorMethod::AdaptiveDopri5) {
    return {m, 0.01, 1e-12, 1e-12, 1.0, 1e-9};
}

}  // namespace

TEST(Lindblad, SingleLevelDecay) {
    const auto p = QutritParams::transmon_default();
    const auto traj = evolve_density(DensityMatrix::basis(1), kZeroH, LindbladSpec::from_params(p),
                                     {0.0, 300.0}, tight());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        EXPECT_NEAR(traj.rho[i](1, 1).real(), std::exp(-p.gamma10() * t), 1e-6);
        EXPECT_NEAR(traj.rho[i](0, 0).real(), 1.0 - std::exp(-p.gamma10() * t), 1e-6);
    }
}

TEST(Lindblad, CascadeClosedForm) {
    // From |2>: p2 = e^{-G21 t}, p1 = G21/(G10 - G21) (e^{-G21 t} - e^{-G10 t}).
    const auto p = QutritParams::transmon_default();
    const double g10 = p.gamma10();
    const double g21 = p.gamma21();
    for (auto method : {IntegratorMethod::AdaptiveDopri5, IntegratorMethod::Rk4}) {
        const auto traj = evolve_density(DensityMatrix::basis(2), kZeroH,
                                         LindbladSpec::from_params(p), {0.0, 300.0}, tight(method));
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            const double t = traj.times[i];
            const double p2 = std::exp(-g21 * t);
            const double p1 = g21 / (g10 - g21) * (std::exp(-g21 * t) - std::exp(-g10 * t));
            EXPECT_NEAR(traj.rho[i](2, 2).real(), p2, 1e-6);
            EXPECT_NEAR(traj.rho[i](1, 1).real(), p1, 1e-6);
            EXPECT_NEAR(traj.rho[i](0, 0).real(), 1.0 - p1 - p2, 1e-6);
        }
    }
}

TEST(Lindblad, DephasingDampsCoherence) {
    // gamma_phi (k - l)^2 damping of rho_kl with no relaxation.
    const QutritParams p(1.0, 0.5, 0.0, 0.0, 0.01);
    const StateVector plus(Vec3(1.0, 1.0, 1.0));
    const auto traj = evolve_density(DensityMatrix::from_state(plus), kZeroH,
                                     LindbladSpec::from_params(p), {0.0, 50.0}, tight());
    const Mat3& last = traj.rho.back();
    EXPECT_NEAR(std::abs(last(0, 1)), std::exp(-0.01 * 50.0) / 3.0, 1e-9);
    EXPECT_NEAR(std::abs(last(0, 2)), std::exp(-0.04 * 50.0) / 3.0, 1e-9);
    EXPECT_NEAR(last(1, 1).real(), 1.0 / 3.0, 1e-12);
}

TEST(Lindblad, EmptySpecAndDissipator) {
    const auto p = QutritParams::transmon_default();
    EXPECT_TRUE(LindbladSpec::from_params(p.without_dissipation()).empty());
    const Mat3 d = dissipator(LindbladSpec::from_params(p), DensityMatrix::basis(1).matrix());
    EXPECT_NEAR(d(1, 1).real(), -p.gamma10(), 1e-15);
    EXPECT_NEAR(d(0, 0).real(), p.gamma10(), 1e-15);
    EXPECT_NEAR(std::abs(d.trace()), 0.0, 1e-15);
}

TEST(Schroedinger, ResonantRabi) {
    const double omega = 0.2;
    const HamiltonianFn h = [&](double) { return (0.5 * omega * gellmann().s(kPair01)).eval(); };
    for (auto method : {IntegratorMethod::Rk4, IntegratorMethod::AdaptiveDopri5}) {
        IntegratorConfig cfg = tight(method);
        cfg.dt = 0.01;
        const auto traj = evolve_state(StateVector::basis(0), h, {0.0, 40.0}, cfg);
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            const double s = std::sin(0.5 * omega * traj.times[i]);
            EXPECT_NEAR(std::norm(traj.states[i][1]), s * s, 1e-9);
            EXPECT_NEAR(traj.states[i].norm(), 1.0, 1e-10);
        }
    }
}

TEST(Schroedinger, AgreesWithDensityEvolution) {
    const HamiltonianFn h = [](double t) {
        return (0.1 * std::cos(0.05 * t) * gellmann().s(kPair01) +
                0.07 * gellmann().a(kPair12) + 0.03 * pair_rotation(0.4, kPair02))
            .eval();
    };
    const TimeWindow w{-10.0, 60.0};
    const auto psi = to_density(evolve_state(StateVector::basis(0), h, w, tight()));
    const auto rho = evolve_density(DensityMatrix::basis(0), h, LindbladSpec{}, w, tight());
    ASSERT_EQ(psi.times.size(), rho.times.size());
    EXPECT_DOUBLE_EQ(psi.times.front(), -10.0);
    EXPECT_DOUBLE_EQ(psi.times.back(), 60.0);
    for (std::size_t i = 0; i < psi.times.size(); ++i) {
        EXPECT_LT((psi.rho[i] - rho.rho[i]).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Schroedinger, GaugeInvariantPopulations) {
    const StirapPair pair(mhz_to_angular(25.0), mhz_to_angular(16.0), 30.0, -45.0);
    const auto cd = cd_envelope_analytic(pair).with_area_scale(0.6);
    const LoopPhases phases{0.3, 1.2, -0.8};
    const HamiltonianFn h = [&](double t) { return build_loop_rwa(pair, cd, phases, t); };
    const HamiltonianFn hg = [&](double t) {
        return gauge_transform(build_loop_rwa(pair, cd, phases, t), {0.7, -2.1, 1.4});
    };
    const TimeWindow w = pair.window();
    const auto a = evolve_state(StateVector::basis(0), h, w, tight());
    const auto b = evolve_state(StateVector::basis(0), hg, w, tight());
    for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(std::norm(a.states.back()[k]), std::norm(b.states.back()[k]), 1e-8);
    }
}

TEST(Invariants, TraceAndPositivityUnderDrive) {
    const auto p = QutritParams::from_mhz(7381, 7099, 20, 30, 0.5);
    const HamiltonianFn h = [](double t) {
        return (0.2 * gellmann().s(kPair01) + 0.1 * std::sin(0.1 * t) * gellmann().s(kPair12)).eval();
    };
    const auto traj = evolve_density(DensityMatrix::basis(0), h, LindbladSpec::from_params(p),
                                     {0.0, 200.0}, IntegratorConfig{});
    const DensityDefects d = density_defects(traj);
    EXPECT_LT(d.trace, 1e-10);
    EXPECT_LT(d.hermiticity, 1e-12);
    EXPECT_GT(d.min_eigenvalue, -1e-9);
}

TEST(Integrator, StepUnderflowThrows) {
    const HamiltonianFn h = [](double) { return (1e4 * gellmann().s(kPair01)).eval(); };
    IntegratorConfig cfg{IntegratorMethod::AdaptiveDopri5, 1.0, 1e-14, 1e-14, 1.0, 0.5};
    EXPECT_THROW(evolve_state(StateVector::basis(0), h, {0.0, 10.0}, cfg), IntegrationError);
}

TEST(Integrator, ConfigValidation) {
    IntegratorConfig cfg;
    cfg.dt = 0.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = IntegratorConfig{};
    cfg.sample_every = -1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    EXPECT_DOUBLE_EQ(IntegratorConfig::for_tier(FidelityTier::IdealRwa).dt, 0.02);
    EXPECT_DOUBLE_EQ(IntegratorConfig::for_tier(FidelityTier::CrossCouplingRwa).dt, 0.005);
    EXPECT_DOUBLE_EQ(IntegratorConfig::for_tier(FidelityTier::FullInteractionPicture).dt, 2e-4);
}

TEST(Trajectory, CsvHeader) {
    const auto traj = evolve_density(DensityMatrix::basis(0), kZeroH, LindbladSpec{}, {0.0, 1.0},
                                     IntegratorConfig{});
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    const std::string s = out.str();
    EXPECT_EQ(s.rfind("# sastirap trajectory v1", 0), 0u);
    EXPECT_NE(s.find("t_ns,p0,p1,p2,"), std::string::npos);
    const auto pops = populations(traj);
    EXPECT_EQ(pops.times.size(), 3u);
    EXPECT_DOUBLE_EQ(pops.p0.back(), 1.0);
}
