#include <gtest/gtest.h>

#include <random>

#include "sastirap/dynamics.hpp"
#include "sastirap/hamiltonians.hpp"
#include "sastirap/metrics.hpp"

using namespace sastirap;

namespace {

StirapPair figure2_pair() { return {mhz_to_angular(25.0), mhz_to_angular(16.0), 30.0, -45.0}; }

double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

const TimeWindow kAlways{-1e9, 1e9};

}  // namespace

TEST(LoopPhases, DefaultIsMinusHalfPi) {
    const LoopPhases p;
    EXPECT_NEAR(p.phi02(), kPi / 2.0, 1e-15);
    EXPECT_NEAR(p.loop_phase(), -kPi / 2.0, 1e-15);
}

TEST(LoopPhases, ForLoopPhaseRoundTrip) {
    for (double phi : {-3.0, -kPi / 2.0, 0.0, 1.0, 3.1}) {
        const auto p = LoopPhases::for_loop_phase(phi, 0.7, -0.4);
        EXPECT_NEAR(wrap_phase(p.loop_phase() - phi), 0.0, 1e-12);
    }
}

TEST(StirapRwa, SingleDrive) {
    const StirapPair pump_only(mhz_to_angular(25.0), 0.0, 30.0, -45.0);
    const Mat3 h = build_stirap_rwa(pump_only, {0.0, 0.0, 0.0}, 3.0);
    EXPECT_LT(max_abs(h - 0.5 * pump_only.omega01(3.0) * gellmann().s(kPair01)), 1e-15);
}

TEST(StirapRwa, DarkStateAnnihilated) {
    const auto pair = figure2_pair();
    const LoopPhases phases{0.4, -1.1, 0.0};
    for (double t = -150.0; t <= 100.0; t += 5.0) {
        const Mat3 h = build_stirap_rwa(pair, phases, t);
        const AdiabaticBasis b = dark_bright_states(pair, phases, t);
        EXPECT_LT((h * b.dark).norm(), 1e-12);
    }
}

TEST(StirapRwa, Eigenvalues) {
    const auto pair = figure2_pair();
    const double t = -20.0;
    const Mat3 h = build_stirap_rwa(pair, {0.2, 0.3, 0.0}, t);
    const double w = std::hypot(pair.omega01(t), pair.omega12(t));
    Eigen::SelfAdjointEigenSolver<Mat3> es(h);
    EXPECT_NEAR(es.eigenvalues()[0], -0.5 * w, 1e-14);
    EXPECT_NEAR(es.eigenvalues()[1], 0.0, 1e-14);
    EXPECT_NEAR(es.eigenvalues()[2], 0.5 * w, 1e-14);
}

TEST(LoopRwa, CdEntryForMinusHalfPi) {
    const auto pair = figure2_pair();
    const auto cd = cd_envelope_analytic(pair);
    const LoopPhases phases = LoopPhases::for_loop_phase(-kPi / 2.0);
    const double t = cd.peak_time();
    const Mat3 h = build_loop_rwa(pair, cd, phases, t);
    // (0,2) entry +i Omega02/2; its conjugate -i Omega02/2 sits at (2,0).
    EXPECT_NEAR(std::abs(h(0, 2) - cplx(0.0, 0.5 * cd(t))), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(h(2, 0) - cplx(0.0, -0.5 * cd(t))), 0.0, 1e-15);
    EXPECT_NEAR(extract_loop_phase(h), -kPi / 2.0, 1e-12);
}

TEST(LoopRwa, ZeroCdReducesToStirap) {
    const auto pair = figure2_pair();
    const auto cd = cd_envelope_analytic(pair).with_area_scale(0.0);
    const LoopPhases phases{0.1, 0.2, 0.3};
    EXPECT_LT(max_abs(build_loop_rwa(pair, cd, phases, -10.0) - build_stirap_rwa(pair, phases, -10.0)),
              1e-15);
}

TEST(Gauge, IdentityAndGlobalPhase) {
    const auto pair = figure2_pair();
    const Mat3 h = build_loop_rwa(pair, cd_envelope_analytic(pair), {0.3, 0.4, 0.5}, -20.0);
    EXPECT_LT(max_abs(gauge_transform(h, {0.0, 0.0, 0.0}) - h), 1e-15);
    EXPECT_LT(max_abs(gauge_transform(h, {1.3, 1.3, 1.3}) - h), 1e-15);
}

TEST(Gauge, LoopPhaseInvariant) {
    const auto pair = figure2_pair();
    const auto cd = cd_envelope_analytic(pair);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int i = 0; i < 50; ++i) {
        const LoopPhases phases{u(rng), u(rng), u(rng)};
        const Mat3 h = build_loop_rwa(pair, cd, phases, -25.0);
        const std::array<double, 3> chi{u(rng), u(rng), u(rng)};
        const Mat3 g = gauge_transform(h, chi);
        EXPECT_NEAR(wrap_phase(extract_loop_phase(g) - extract_loop_phase(h)), 0.0, 1e-12);
        EXPECT_NEAR(wrap_phase(extract_loop_phase(h) - phases.loop_phase()), 0.0, 1e-12);
    }
    const Mat3 h = build_loop_rwa(pair, cd, {0.0, 0.0, 0.0}, -25.0);
    const Mat3 g = gauge_transform(h, {0.3, -1.1, 2.0});
    EXPECT_GT(std::abs(std::arg(g(0, 1)) - std::arg(h(0, 1))), 0.1);
    EXPECT_NEAR(wrap_phase(extract_loop_phase(g) - extract_loop_phase(h)), 0.0, 1e-12);
}

TEST(LoopPhase, SimpleCases) {
    Mat3 h = gellmann().s(kPair01) + gellmann().s(kPair12) + gellmann().s(kPair02);
    EXPECT_NEAR(extract_loop_phase(h), 0.0, 1e-15);
    h = gellmann().s(kPair01) + gellmann().s(kPair12) + pair_rotation(kPi / 2.0, kPair02);
    EXPECT_NEAR(extract_loop_phase(h), -kPi / 2.0, 1e-15);
    EXPECT_THROW(extract_loop_phase(gellmann().s(kPair01)), UndefinedPhaseError);
}

TEST(TwoPhoton, EffectiveCouplingExample) {
    // Omega~12 = 94 MHz, Omega~01 = 94/sqrt2 MHz, Delta = 141 MHz:
    // Omega02 = (94/sqrt2)(94)/(2 * 141) = 22.156 MHz.
    const double oracle_mhz = (94.0 / std::sqrt(2.0)) * 94.0 / (2.0 * 141.0);
    const auto p = QutritParams::transmon_default();
    const auto c = two_photon_effective(mhz_to_angular(94.0 / std::sqrt(2.0)), mhz_to_angular(94.0),
                                        p.delta(), 0.0);
    EXPECT_NEAR(angular_to_mhz(c.omega02), oracle_mhz, 1e-9);
    EXPECT_NEAR(angular_to_mhz(c.omega02), 22.2, 0.05);
    EXPECT_NEAR(c.phi02, kPi, 1e-15);
    // 94 MHz exceeds Delta/2, so this example sits outside the perturbative regime.
    EXPECT_FALSE(c.perturbative);
    EXPECT_TRUE(two_photon_effective(mhz_to_angular(20.0), mhz_to_angular(20.0), p.delta(), 0.0).perturbative);
    EXPECT_THROW(two_photon_effective(1.0, 1.0, 0.0, 0.0), std::invalid_argument);
}

TEST(TwoPhoton, InverseRoundTrip) {
    const double delta = QutritParams::transmon_default().delta();
    for (double target_mhz : {1.0, 22.2, 47.7}) {
        const double target = mhz_to_angular(target_mhz);
        const double a01 = two_photon_tone_amplitude(target, delta);
        // Closed form sqrt(sqrt2 * Delta * Omega02) / 2^{1/4} * 2^{1/4}... = sqrt(sqrt2 Delta Omega02).
        EXPECT_NEAR(a01, std::sqrt(std::sqrt(2.0) * delta * target), 1e-12);
        const auto c = two_photon_effective(a01, std::sqrt(2.0) * a01, delta, 0.0);
        EXPECT_NEAR(c.omega02, target, 1e-12);
    }
}

TEST(FullInteraction, NoTonesIsZero) {
    const auto p = QutritParams::transmon_default();
    for (auto tier : {FidelityTier::IdealRwa, FidelityTier::CrossCouplingRwa,
                      FidelityTier::FullInteractionPicture}) {
        EXPECT_EQ(max_abs(build_full_interaction({}, p, 1.0, tier)), 0.0);
    }
}

TEST(FullInteraction, HermitianEverywhere) {
    const auto p = QutritParams::transmon_default();
    const auto pair = figure2_pair();
    const auto cd = cd_envelope_analytic(pair);
    std::vector<DriveTone> tones{
        DriveTone::ladder(ToneRole::Resonant, p.omega01(), 0.3,
                          ToneEnvelope::Gaussian{pair.pump(), pair.window()}),
        DriveTone{ToneRole::TwoPhoton, 0.5 * p.omega02(), -0.4,
                  ToneEnvelope::CdTwoPhoton{cd, p.delta(), std::sqrt(2.0)},
                  {{kPair01, 1.0}, {kPair12, std::sqrt(2.0)}}}};
    for (auto tier : {FidelityTier::IdealRwa, FidelityTier::CrossCouplingRwa,
                      FidelityTier::FullInteractionPicture}) {
        for (double t = -150.0; t < 100.0; t += 3.7) {
            EXPECT_LE(hermiticity_defect(build_full_interaction(tones, p, t, tier)), 1e-12);
        }
    }
}

TEST(FullInteraction, IdealTierMatchesLoopRwa) {
    const auto p = QutritParams::transmon_default();
    const auto pair = figure2_pair();
    const auto cd = cd_envelope_analytic(pair);
    const LoopPhases phases{0.2, -0.7, 0.9};
    std::vector<DriveTone> tones{
        DriveTone{ToneRole::TwoPhoton, 0.5 * p.omega02(), phases.phi_tilde,
                  ToneEnvelope::CdTwoPhoton{cd, p.delta(), std::sqrt(2.0)},
                  {{kPair01, 1.0}, {kPair12, std::sqrt(2.0)}}},
        DriveTone::ladder(ToneRole::Resonant, p.omega01(), phases.phi01,
                          ToneEnvelope::Gaussian{pair.pump(), pair.window()}),
        DriveTone{ToneRole::Resonant, p.omega12(), phases.phi12,
                  ToneEnvelope::Gaussian{pair.stokes(), pair.window()},
                  {{kPair01, 1.0 / std::sqrt(2.0)}, {kPair12, 1.0}}}};
    for (double t = -120.0; t < 60.0; t += 11.0) {
        EXPECT_LT(max_abs(build_full_interaction(tones, p, t, FidelityTier::IdealRwa) -
                          build_loop_rwa(pair, cd, phases, t)),
                  1e-12);
    }
}

TEST(FullInteraction, TwoPhotonToneNeedsResonance) {
    const auto p = QutritParams::transmon_default();
    std::vector<DriveTone> tones{DriveTone::ladder(ToneRole::TwoPhoton, 0.5 * p.omega02() + 1e-3, 0.0,
                                                   ToneEnvelope::Constant{0.1, kAlways})};
    EXPECT_THROW(validate_tones(tones, p), ConfigurationError);
    tones[0].carrier = -1.0;
    tones[0].role = ToneRole::Resonant;
    EXPECT_THROW(validate_tones(tones, p), ConfigurationError);
}

TEST(FullInteraction, CrossCouplingRabiFrequency) {
    // Resonant 0-1 drive; the 1-2 cross term is off-resonant by omega01 - omega12,
    // so the 0-1 Rabi oscillation p1 = sin^2(W t / 2) keeps W = Omega.
    const auto p = QutritParams::transmon_default();
    const double omega = mhz_to_angular(10.0);
    std::vector<DriveTone> tones{DriveTone::ladder(ToneRole::Resonant, p.omega01(), 0.0,
                                                   ToneEnvelope::Constant{omega, kAlways})};
    const HamiltonianFn h = [&](double t) {
        return build_full_interaction(tones, p, t, FidelityTier::CrossCouplingRwa);
    };
    const double t_half = kPi / omega;
    IntegratorConfig cfg{IntegratorMethod::AdaptiveDopri5, 0.01, 1e-10, 1e-10, 0.05, 1e-9};
    const auto traj = evolve_state(StateVector::basis(0), h, {0.0, 1.5 * t_half}, cfg);
    std::size_t best = 0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        if (std::norm(traj.states[i][1]) > std::norm(traj.states[best][1])) best = i;
    }
    const double w_fit = kPi / traj.times[best];
    EXPECT_NEAR(w_fit / omega, 1.0, 0.02);

    // Time-averaged 1-2 matrix element is much smaller than the 0-1 one.
    cplx avg12 = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) avg12 += h(i * 0.05)(1, 2);
    EXPECT_LT(std::abs(avg12) / n, 0.05 * 0.5 * omega);
}

TEST(FullInteraction, TwoPhotonRabi) {
    // Weak two-photon drive: 0 <-> 2 oscillation at about Omega~01 Omega~12 / (2 Delta).
    const auto p = QutritParams::transmon_default();
    const double a01 = mhz_to_angular(20.0 / std::sqrt(2.0));
    const double omega02 = a01 * std::sqrt(2.0) * a01 / (2.0 * p.delta());
    std::vector<DriveTone> tones{DriveTone::ladder(ToneRole::TwoPhoton, 0.5 * p.omega02(), 0.0,
                                                   ToneEnvelope::Constant{a01, kAlways})};
    const HamiltonianFn h = [&](double t) {
        return build_full_interaction(tones, p, t, FidelityTier::FullInteractionPicture);
    };
    const double t_half = kPi / omega02;
    IntegratorConfig cfg{IntegratorMethod::AdaptiveDopri5, 0.005, 1e-9, 1e-9, 0.1, 1e-9};
    const auto traj = evolve_state(StateVector::basis(0), h, {0.0, 1.4 * t_half}, cfg);
    std::size_t best = 0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        if (std::norm(traj.states[i][2]) > std::norm(traj.states[best][2])) best = i;
    }
    EXPECT_NEAR((kPi / traj.times[best]) / omega02, 1.0, 0.10);
    EXPECT_GT(std::norm(traj.states[best][2]), 0.8);
}

TEST(StarkOffsets, ZeroAndQuadraticScaling) {
    const auto p = QutritParams::transmon_default();
    auto tones_for = [&](double amp) {
        return std::vector<DriveTone>{DriveTone::ladder(ToneRole::TwoPhoton, 0.5 * p.omega02(), 0.0,
                                                        ToneEnvelope::Constant{amp, kAlways})};
    };
    auto [z01, z12] = stark_offset_correction(p, tones_for(0.0));
    EXPECT_EQ(z01, 0.0);
    EXPECT_EQ(z12, 0.0);
    auto [a01, a12] = stark_offset_correction(p, tones_for(0.2));
    auto [b01, b12] = stark_offset_correction(p, tones_for(0.4));
    EXPECT_NE(a01, 0.0);
    EXPECT_NEAR(b01 / a01, 4.0, 0.2);
    EXPECT_NEAR(b12 / a12, 4.0, 0.2);
}

TEST(StarkOffsets, SecondOrderValues) {
    // Tone at omega~ = omega01 - Delta couples 0-1 (detuning -Delta) with Omega and
    // 1-2 (detuning +Delta) with r Omega. Level shifts:
    //   s0 = -O^2/(4D), s1 = O^2/(4D) + r^2 O^2/(4D), s2 = -r^2 O^2/(4D).
    const auto p = QutritParams::transmon_default();
    const double o = 0.3;
    const double r = std::sqrt(2.0);
    const double d = p.delta();
    const double s0 = -o * o / (4 * d);
    const double s1 = o * o / (4 * d) + r * r * o * o / (4 * d);
    const double s2 = -r * r * o * o / (4 * d);
    std::vector<DriveTone> tones{DriveTone::ladder(ToneRole::TwoPhoton, 0.5 * p.omega02(), 0.0,
                                                   ToneEnvelope::Constant{o, kAlways})};
    auto [d01, d12] = stark_offset_correction(p, tones);
    EXPECT_NEAR(d01, s1 - s0, 1e-12);
    EXPECT_NEAR(d12, s2 - s1, 1e-12);
}

TEST(Tiers, Names) {
    for (auto tier : {FidelityTier::IdealRwa, FidelityTier::CrossCouplingRwa,
                      FidelityTier::FullInteractionPicture}) {
        EXPECT_EQ(tier_from_string(to_string(tier)), tier);
    }
    EXPECT_THROW(tier_from_string("exact"), std::invalid_argument);
}
