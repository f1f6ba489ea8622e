#pragma once

// System Hamiltonians at three fidelity tiers, gauge transformations and the
// gauge-invariant loop phase, and the two-photon effective coupling.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sastirap/pulses.hpp"
#include "sastirap/su3.hpp"

namespace sastirap {

// Phases of the two STIRAP tones and of the two-photon tone.
struct LoopPhases {
    double phi01 = 0.0;
    double phi12 = 0.0;
    double phi_tilde = -kPi / 4.0;  // Phi = -pi/2 with phi01 = phi12 = 0

    // 2 phi_tilde + pi, wrapped to (-pi, pi].
    double phi02() const;
    double phi20() const { return -phi02(); }
    // Phi = phi01 + phi12 + phi20 in (-pi, pi].
    double loop_phase() const;

    // Two-photon phase that realizes `loop_phase` for the given STIRAP phases.
    static LoopPhases for_loop_phase(double loop_phase, double phi01 = 0.0, double phi12 = 0.0);
};

enum class FidelityTier {
    IdealRwa,                // loop Hamiltonian with the effective 0-2 coupling
    CrossCouplingRwa,        // co-rotating terms of every tone in every transition
    FullInteractionPicture,  // all oscillatory terms, no rotating-wave approximation
};

const char* to_string(FidelityTier tier);
FidelityTier tier_from_string(const std::string& name);

// H0 = 1/2 Omega01 n01.Lambda01 + 1/2 Omega12 n12.Lambda12.
Mat3 build_stirap_rwa(const StirapPair& pair, const LoopPhases& phases, double t);

// H0 + 1/2 Omega02 n02.Lambda02 with phi02 = 2 phi_tilde + pi.
Mat3 build_loop_rwa(const StirapPair& pair, const CdEnvelope& cd, const LoopPhases& phases,
                    double t);

// U H U^dagger with U = diag(e^{-i chi_k}).
Mat3 gauge_transform(const Mat3& h, const std::array<double, 3>& chi);

class UndefinedPhaseError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// arg(H01 H12 H20) in (-pi, pi]; throws UndefinedPhaseError if an entry vanishes.
double extract_loop_phase(const Mat3& h);

struct TwoPhotonCoupling {
    double omega02;  // rad/ns
    double phi02;    // radians, (-pi, pi]
    bool perturbative = true;  // false when a tone amplitude exceeds delta/2
};

// Omega02 = Omega~01 Omega~12 / (2 delta), phi02 = 2 phi~ + pi.
TwoPhotonCoupling two_photon_effective(double omega_t01, double omega_t12, double delta,
                                       double phi_tilde);

// Omega~01 for which two_photon_effective gives `omega02` when Omega~12 = ratio12 Omega~01.
double two_photon_tone_amplitude(double omega02, double delta,
                                 double ratio12 = std::numbers::sqrt2);

// Amplitude envelope of a drive tone.
class ToneEnvelope {
public:
    struct Constant {
        double amplitude;
        TimeWindow window;
    };
    struct Gaussian {
        GaussianPulse pulse;
        TimeWindow window;
    };
    // Omega02(t) used directly.
    struct CdDirect {
        CdEnvelope cd;
    };
    // Omega~01(t) = sqrt(2 delta Omega02(t) / ratio12).
    struct CdTwoPhoton {
        CdEnvelope cd;
        double delta;
        double ratio12;
    };

    ToneEnvelope(Constant c) : shape_(c) {}
    ToneEnvelope(Gaussian g) : shape_(std::move(g)) {}
    ToneEnvelope(CdDirect c) : shape_(std::move(c)) {}
    ToneEnvelope(CdTwoPhoton c) : shape_(std::move(c)) {}

    double operator()(double t) const;
    // Maximum amplitude over time.
    double peak() const;
    // Same envelope with amplitude multiplied by `factor`.
    ToneEnvelope scaled(double factor) const;

private:
    std::variant<Constant, Gaussian, CdDirect, CdTwoPhoton> shape_;
};

enum class ToneRole {
    Resonant,   // drives the transition nearest to its carrier
    TwoPhoton,  // detuned tone at (omega01 + omega12)/2 realizing the 0-2 coupling
};

// Coupling of a tone into one transition with a relative matrix-element factor.
struct ToneCoupling {
    LevelPair pair;
    double factor;
};

// One microwave tone: carrier, phase, envelope and the transitions it couples to.
struct DriveTone {
    ToneRole role = ToneRole::Resonant;
    double carrier = 0.0;  // rad/ns
    double phase = 0.0;
    ToneEnvelope envelope;
    std::vector<ToneCoupling> couplings;

    // Transmon ladder tone with envelope equal to the 0-1 Rabi frequency:
    // couples with factor 1 into 0-1 and sqrt(2) into 1-2.
    static DriveTone ladder(ToneRole role, double carrier, double phase, ToneEnvelope envelope);
};

class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Tolerance for 2 omega~ = omega01 + omega12.
inline constexpr double kTwoPhotonResonanceTolerance = 1e-9;

// Checks carriers and the two-photon resonance condition; throws ConfigurationError.
void validate_tones(const std::vector<DriveTone>& tones, const QutritParams& params);

// Interaction-picture Hamiltonian of `tones` at time t.
//   FullInteractionPicture: sum of f E(t) cos(w t + phi) e^{-i w_kl t} per coupling.
//   CrossCouplingRwa: keeps only the difference-frequency (co-rotating) part
//     f E(t)/2 e^{i((w - w_kl) t + phi)}; sum-frequency terms are dropped.
//   IdealRwa: resonant tones contribute only to their own transition and
//     two-photon tones through their effective 0-2 coupling.
Mat3 build_full_interaction(const std::vector<DriveTone>& tones, const QutritParams& params,
                            double t, FidelityTier tier);

// Static carrier offsets (delta01, delta12) that put the STIRAP tones on
// resonance with the levels shifted by the two-photon tones at peak amplitude.
std::pair<double, double> stark_offset_correction(const QutritParams& params,
                                                  const std::vector<DriveTone>& tones);

}  // namespace sastirap
