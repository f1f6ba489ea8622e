#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "sastirap_cli/commands.hpp"
#include "sastirap_cli/config.hpp"

using namespace sastirap;
using namespace sastirap::cli;

namespace {

std::string error_key(const std::string& yaml) {
    try {
        parse_config(yaml);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<none>";
}

}  // namespace

TEST(Config, AllPresetsLoad) {
    int n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(SASTIRAP_PRESETS)) {
        if (entry.path().extension() != ".yaml") continue;
        EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
        ++n;
    }
    EXPECT_GE(n, 6);
}

TEST(Config, UserUnitsConvert) {
    const RunConfig c = parse_config(R"(
protocol:
  sigma_ns: 30
  t_s_ns: -45
  omega01_mhz: 25
  omega12_mhz: 16
  phases: {phi01_pi: 0.5, phi12_pi: 0.25, loop_phase_pi: -0.5}
)");
    EXPECT_DOUBLE_EQ(c.protocol.omega01_peak, 2.0 * M_PI * 0.025);
    EXPECT_DOUBLE_EQ(c.protocol.phases.phi01, 0.5 * M_PI);
    EXPECT_NEAR(c.protocol.phases.loop_phase(), -0.5 * M_PI, 1e-12);
    EXPECT_DOUBLE_EQ(c.system.gamma10(), 5.0e-3);
}

TEST(Config, AreaKeysResolveAgainstShape) {
    const RunConfig c = parse_config(R"(
protocol:
  sigma_ns: 25
  t_s_ns: -37.5
  omega01_mhz: 40
  omega12_mhz: 26
  area_pi: 2.5
  area02_pi: 0.81
)");
    const PulseAreas a = pulse_areas(c.protocol.drive_pair(), c.protocol.cd_envelope());
    EXPECT_NEAR(a.stirap / M_PI, 2.5, 1e-9);
    EXPECT_NEAR(a.cd / M_PI, 0.81, 1e-9);
}

TEST(Config, ErrorsNameTheKey) {
    EXPECT_EQ(error_key("protocol: {sigma: 3}"), "protocol.sigma");
    EXPECT_EQ(error_key("protocol: {sigma_ns: 0}"), "protocol.sigma_ns");
    EXPECT_EQ(error_key("protocol: {sigma_ns: abc}"), "protocol.sigma_ns");
    EXPECT_EQ(error_key("protocol: {tier: exact}"), "protocol.tier");
    EXPECT_EQ(error_key("system: {gamma10_mhz: -1}"), "system.gamma10_mhz");
    EXPECT_EQ(error_key("system: {rate_convention: radians}"), "system.rate_convention");
    EXPECT_EQ(error_key("protocol: {phases: {phi_tilde_pi: 0, loop_phase_pi: 0}}"), "protocol.phases.loop_phase_pi");
    EXPECT_EQ(error_key("protocol: {cd: 'off', area02_pi: 1}"), "protocol.area02_pi");
    EXPECT_EQ(error_key("protocol: {integrator: {method: euler}}"), "protocol.integrator.method");
    EXPECT_EQ(error_key("bogus: 1"), "bogus");
    EXPECT_EQ(error_key("sweeps: [{axes: [{name: sigma_ns, min: 1, max: 2, count: 3, step: 1}]}]"),
              "sweeps[0].axes[0].step");
    EXPECT_EQ(error_key("sweeps: [{axes: [{name: width, min: 1, max: 2}]}]"), "sweeps[0].axes[0].name");
    EXPECT_EQ(error_key("sweeps: [{name: a, axes: [{name: sigma_ns, min: 1, max: 2}]},"
                        " {name: a, axes: [{name: sigma_ns, min: 1, max: 2}]}]"),
              "sweeps[1].name");
    EXPECT_EQ(error_key("tomo: {synthesize: [[0.5, 0.5, 0.5]]}"), "tomo.synthesize[0]");
    EXPECT_EQ(error_key("tomo: {correct_calibration: true, synthesize: [[1, 0, 0]]}"), "tomo.correct_calibration");
}

TEST(Config, SweepOverridesInheritBase) {
    const RunConfig c = parse_config(R"(
protocol: {sigma_ns: 12, tier: ideal-rwa}
sweeps:
  - name: off
    protocol: {cd: "off"}
    axes: [{name: ts_over_sigma, min: 1, max: 2, count: 3}]
)");
    ASSERT_EQ(c.sweeps.size(), 1u);
    EXPECT_EQ(c.sweeps[0].spec.base.cd, CdMode::Off);
    EXPECT_DOUBLE_EQ(c.sweeps[0].spec.base.sigma, 12.0);
    EXPECT_EQ(c.protocol.cd, CdMode::AnalyticEffective);
    EXPECT_DOUBLE_EQ(c.sweeps[0].spec.axes[0].max, 2.0);
}

TEST(Config, AxisUnitsArePi) {
    const RunConfig c = parse_config("sweeps: [{axes: [{name: phi01_pi, min: -1, max: 1, count: 5}]}]");
    EXPECT_DOUBLE_EQ(c.sweeps[0].spec.axes[0].min, -M_PI);
}

TEST(Config, OutputDirectoryPrecedence) {
    RunConfig c = parse_config("protocol: {}");
    ::setenv("SASTIRAP_OUT", "/tmp/from-env", 1);
    EXPECT_EQ(resolve_out_dir(std::nullopt, c), "/tmp/from-env");
    c.output.directory = "/tmp/from-config";
    EXPECT_EQ(resolve_out_dir(std::nullopt, c), "/tmp/from-config");
    EXPECT_EQ(resolve_out_dir(std::filesystem::path("/tmp/flag"), c), "/tmp/flag");
    ::unsetenv("SASTIRAP_OUT");
    c.output.directory.reset();
    EXPECT_EQ(resolve_out_dir(std::nullopt, c), "sastirap-out");
}
