#pragma once

// A complete saSTIRAP configuration and its single-run evaluation.

#include <optional>
#include <string>

#include "sastirap/dynamics.hpp"
#include "sastirap/hamiltonians.hpp"
#include "sastirap/metrics.hpp"
#include "sastirap/pulses.hpp"
#include "sastirap/su3.hpp"

namespace sastirap {

enum class CdMode {
    Off,
    AnalyticEffective,  // Omega02 = 2 dTheta/dt applied directly to the 0-2 transition
    PhysicalTwoPhoton,  // realized by a detuned tone with Omega~(t) ~ sqrt(Omega02(t))
};

const char* to_string(CdMode mode);
CdMode cd_mode_from_string(const std::string& name);

enum class ReadoutMode {
    WindowEnd,      // end of the pulse windows plus `readout_offset`
    AfterPumpPeak,  // `readout_offset` after the maximum of the 0-1 pulse (t = 0)
    Peak,           // maximum of p2 along the trajectory ending at WindowEnd
};

const char* to_string(ReadoutMode mode);
ReadoutMode readout_mode_from_string(const std::string& name);

struct ProtocolSpec {
    double sigma = 30.0;          // ns
    double t_s = -45.0;           // ns, negative for counterintuitive order
    double omega01_peak = mhz_to_angular(25.0);
    double omega12_peak = mhz_to_angular(16.0);
    // Multiplies both STIRAP drive amplitudes; the CD shape is derived from
    // the unscaled pair, so a zero scale leaves a CD-only protocol.
    double stirap_scale = 1.0;
    LoopPhases phases{};
    CdMode cd = CdMode::AnalyticEffective;
    double cd_area_scale = 1.0;
    double two_photon_ratio = std::numbers::sqrt2;
    FidelityTier tier = FidelityTier::IdealRwa;
    bool dissipation = true;
    bool stark_correction = false;
    ReadoutMode readout = ReadoutMode::WindowEnd;
    double readout_offset = 20.0;  // ns
    std::optional<IntegratorConfig> integrator;  // defaults to IntegratorConfig::for_tier
    TransferThresholds thresholds{};

    // Unscaled pair that defines the mixing angle and the CD envelope.
    StirapPair shape_pair() const;
    // Pair actually driving the system (peaks times stirap_scale).
    StirapPair drive_pair() const;
    // Analytic CD envelope with cd_area_scale; empty when cd == Off.
    std::optional<CdEnvelope> cd_envelope() const;

    // Start of the STIRAP/CD window union; end according to `readout`.
    TimeWindow evolution_window() const;

    IntegratorConfig integrator_config() const;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

// Drive tones realizing the protocol in the interaction picture.
std::vector<DriveTone> protocol_tones(const ProtocolSpec& spec, const QutritParams& params);

// H(t) for the protocol at its tier.
HamiltonianFn protocol_hamiltonian(const ProtocolSpec& spec, const QutritParams& params);

struct ProtocolRun {
    DensityTrajectory trajectory;
    TransferReport report;
    double p2_peak = 0.0;
    double omega02_peak = 0.0;  // peak of the effective 0-2 coupling, rad/ns
};

// Evolves |0><0| over the protocol window and evaluates the observables.
ProtocolRun run_protocol(const ProtocolSpec& spec, const QutritParams& params);

// Final-state observable only; same physics as run_protocol.
double final_p2(const ProtocolSpec& spec, const QutritParams& params);

}  // namespace sastirap
