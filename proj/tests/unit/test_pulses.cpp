#include <gtest/gtest.h>

#include <sstream>

#include "sastirap/hamiltonians.hpp"
#include "sastirap/pulses.hpp"

using namespace sastirap;

namespace {

StirapPair figure2_pair() { return {mhz_to_angular(25.0), mhz_to_angular(16.0), 30.0, -45.0}; }

// 2 dTheta/dt by central differences of the mixing angle.
double fd_cd(const StirapPair& pair, double t, double h = 1e-4) {
    return (mixing_angle(pair, t + h) - mixing_angle(pair, t - h)) / h;
}

}  // namespace

TEST(StirapPair, TruncationWindow) {
    const auto pair = figure2_pair();
    const TimeWindow w = pair.window();
    EXPECT_DOUBLE_EQ(w.t_min, -150.0 - 45.0);
    EXPECT_DOUBLE_EQ(w.t_max, 150.0);
    EXPECT_EQ(pair.omega01(w.t_max + 1e-9), 0.0);
    EXPECT_EQ(pair.omega12(w.t_min - 1e-9), 0.0);
    EXPECT_GT(pair.omega01(w.t_max), 0.0);
}

TEST(StirapPair, RejectsBadShape) {
    EXPECT_THROW(StirapPair(1.0, 1.0, 0.0, -1.0), std::invalid_argument);
    EXPECT_THROW(StirapPair(-1.0, 1.0, 1.0, -1.0), std::invalid_argument);
}

TEST(MixingAngle, EqualAmplitudePointIsQuarterPi) {
    const StirapPair equal(1.0, 1.0, 20.0, -30.0);
    EXPECT_NEAR(mixing_angle(equal, -15.0), kPi / 4.0, 1e-14);
    // Unequal peaks: Omega01(t) = Omega12(t) at t = t_s/2 + sigma^2 ln(a/b) / t_s.
    const auto pair = figure2_pair();
    const double t_eq = -22.5 + 900.0 * std::log(25.0 / 16.0) / -45.0;
    EXPECT_NEAR(pair.omega01(t_eq), pair.omega12(t_eq), 1e-14);
    EXPECT_NEAR(mixing_angle(pair, t_eq), kPi / 4.0, 1e-12);
}

TEST(MixingAngle, Limits) {
    const auto pair = figure2_pair();
    EXPECT_LT(mixing_angle(pair, -1000.0), 1e-12);
    EXPECT_NEAR(mixing_angle(pair, 1000.0), kPi / 2.0, 1e-12);
    EXPECT_THROW(mixing_angle(StirapPair(0.0, 0.0, 1.0, -1.0), 0.0), std::invalid_argument);
}

TEST(MixingAngle, ClosedFormAndSampledRatio) {
    const auto pair = figure2_pair();
    const double kappa = 25.0 / 16.0 * std::exp(45.0 * 45.0 / (2.0 * 900.0));
    for (double t = -120.0; t <= 100.0; t += 7.3) {
        const double closed = std::atan(kappa * std::exp(-t * -45.0 / 900.0));
        EXPECT_NEAR(mixing_angle(pair, t), closed, 1e-13);
        EXPECT_NEAR(mixing_angle(pair, t), std::atan(pair.omega01(t) / pair.omega12(t)), 1e-12);
    }
}

TEST(MixingAngle, MonotoneForCounterintuitiveOrder) {
    const auto pair = figure2_pair();
    double prev = -1.0;
    for (double t = -300.0; t <= 300.0; t += 0.5) {
        const double th = mixing_angle(pair, t);
        EXPECT_GE(th, prev);
        prev = th;
    }
}

TEST(CdEnvelope, PeakAtSigma10) {
    // sigma = 10 ns, t_s = -30 ns: peak = |t_s|/sigma^2 = 0.3 rad/ns = 47.746 MHz.
    const double oracle_peak = 0.3;
    const double oracle_mhz = 0.3 / (2.0 * kPi) * 1e3;
    const StirapPair pair(mhz_to_angular(25.0), mhz_to_angular(16.0), 10.0, -30.0);
    const auto cd = cd_envelope_analytic(pair);
    EXPECT_NEAR(cd.peak(), oracle_peak, 1e-15);
    EXPECT_NEAR(angular_to_mhz(cd.peak()), oracle_mhz, 1e-12);
    EXPECT_NEAR(angular_to_mhz(cd.peak()), 47.7, 0.05);
    EXPECT_NEAR(cd(cd.peak_time()), cd.peak(), 1e-14);
}

TEST(CdEnvelope, PeakWhereAmplitudesCross) {
    const auto pair = figure2_pair();
    const auto cd = cd_envelope_analytic(pair);
    EXPECT_NEAR(pair.pump()(cd.peak_time()), pair.stokes()(cd.peak_time()), 1e-12);
    EXPECT_NEAR(cd.peak(), 45.0 / 900.0, 1e-15);
}

TEST(CdEnvelope, MatchesFiniteDifference) {
    for (const StirapPair& pair :
         {figure2_pair(), StirapPair(mhz_to_angular(44.0), mhz_to_angular(37.0), 10.0, -30.0)}) {
        const auto cd = cd_envelope_analytic(pair);
        for (double t = -200.0; t <= 150.0; t += 3.1) {
            EXPECT_NEAR(cd(t), fd_cd(pair, t), 1e-8) << "t=" << t;
        }
    }
}

TEST(CdEnvelope, AreaIsPi) {
    const auto cd = cd_envelope_analytic(figure2_pair());
    EXPECT_NEAR(cd.total_area(), kPi, 1e-15);
    EXPECT_NEAR(cd.with_area_scale(0.81).total_area(), 0.81 * kPi, 1e-15);
}

TEST(CdEnvelope, SupportWindowBoundsTail) {
    const auto cd = cd_envelope_analytic(figure2_pair());
    const TimeWindow w = cd.support_window();
    EXPECT_LT(cd(w.t_min) / cd.peak(), std::exp(-12.5) * 1.001);
    EXPECT_LT(cd(w.t_max) / cd.peak(), std::exp(-12.5) * 1.001);
}

TEST(CdEnvelope, RejectsCoincidentPulses) {
    EXPECT_THROW(cd_envelope_analytic(StirapPair(1.0, 1.0, 10.0, 0.0)), std::invalid_argument);
}

TEST(CdEnvelope, SampledInterpolates) {
    const auto cd = CdEnvelope::sampled({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0});
    EXPECT_DOUBLE_EQ(cd(0.5), 1.0);
    EXPECT_DOUBLE_EQ(cd(3.0), 0.0);
    EXPECT_DOUBLE_EQ(cd.peak(), 2.0);
    EXPECT_NEAR(cd.total_area(), 2.0, 1e-15);
    EXPECT_FALSE(cd.is_analytic());
}

TEST(CdOracle, MatchesAnalyticStirapCd) {
    const auto pair = figure2_pair();
    const LoopPhases zero{0.0, 0.0, 0.0};
    const auto cd = cd_envelope_analytic(pair);
    const HamiltonianFn h0 = [&](double t) { return build_stirap_rwa(pair, zero, t); };
    for (double t : {-60.0, -30.0, -20.0, -5.0, 10.0}) {
        const Mat3 oracle = cd_general_oracle(h0, t, {1e-3, true, 1e-9});
        // (hbar/2) Omega02 (-La_02): (0,2) entry +i Omega02/2.
        Mat3 expected = 0.5 * cd(t) * -gellmann().a(kPair02);
        EXPECT_LT((oracle - expected).cwiseAbs().maxCoeff(), 1e-6) << "t=" << t;
    }
}

TEST(CdOracle, PhaseRelation) {
    const auto pair = figure2_pair();
    for (auto [p01, p12] : {std::pair{0.4, -1.3}, std::pair{2.5, 0.9}, std::pair{-2.0, -2.2}}) {
        const LoopPhases phases{p01, p12, 0.0};
        const HamiltonianFn h0 = [&](double t) { return build_stirap_rwa(pair, phases, t); };
        const Mat3 oracle = cd_general_oracle(h0, -20.0, {1e-3, true, 1e-9});
        const double phi20 = std::arg(oracle(2, 0));
        EXPECT_NEAR(wrap_phase(p01 + p12 + phi20), -kPi / 2.0, 1e-6);
    }
}

TEST(CdOracle, ConstantHamiltonianGivesZero) {
    Mat3 h = Mat3::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 2.5;
    h(2, 2) = -1.0;
    h(0, 1) = h(1, 0) = 0.3;
    const Mat3 out = cd_general_oracle([&](double) { return h; }, 0.0);
    EXPECT_LT(out.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CdOracle, TwoLevelReduction) {
    // H = (1/2)[[-d, W], [W, d]] in the 0-1 block, level 2 far detuned.
    // Mixing angle theta = atan(W/d)/2 ... the CD coupling magnitude is |theta'|.
    auto w = [](double t) { return 0.5 + 0.2 * std::tanh(t); };
    auto d = [](double t) { return 1.0 + 0.3 * t; };
    const HamiltonianFn h = [&](double t) {
        Mat3 m = Mat3::Zero();
        m(0, 0) = -0.5 * d(t);
        m(1, 1) = 0.5 * d(t);
        m(0, 1) = m(1, 0) = 0.5 * w(t);
        m(2, 2) = 50.0;
        return m;
    };
    const double t = 0.4;
    const double eps = 1e-5;
    auto theta = [&](double s) { return 0.5 * std::atan2(w(s), d(s)); };
    const double theta_dot = (theta(t + eps) - theta(t - eps)) / (2.0 * eps);
    const Mat3 out = cd_general_oracle(h, t, {1e-3, true, 1e-9});
    EXPECT_NEAR(std::abs(out(0, 1)), std::abs(theta_dot), 1e-7);
    EXPECT_LT(std::abs(out(0, 2)) + std::abs(out(1, 2)), 1e-10);
}

TEST(CdOracle, DegenerateSpectrumThrows) {
    EXPECT_THROW(cd_general_oracle([](double) { return Mat3::Zero().eval(); }, 0.0),
                 DegenerateSpectrumError);
}

TEST(Envelopes, CsvHeaderAndColumns) {
    std::ostringstream out;
    const auto pair = figure2_pair();
    write_envelope_csv(out, pair, cd_envelope_analytic(pair), pair.window(), 5.0);
    const std::string s = out.str();
    EXPECT_EQ(s.rfind("# sastirap envelopes v1", 0), 0u);
    EXPECT_NE(s.find("\nt_ns,omega01_mhz,omega12_mhz,omega02_mhz\n"), std::string::npos);
}
