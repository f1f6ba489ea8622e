#include "sastirap/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sastirap {

const char* to_string(CdMode mode) {
    switch (mode) {
        case CdMode::Off: return "off";
        case CdMode::AnalyticEffective: return "analytic-effective";
        case CdMode::PhysicalTwoPhoton: return "physical-two-photon";
    }
    return "?";
}

CdMode cd_mode_from_string(const std::string& name) {
    if (name == "off") return CdMode::Off;
    if (name == "on" || name == "analytic-effective") return CdMode::AnalyticEffective;
    if (name == "physical-two-photon") return CdMode::PhysicalTwoPhoton;
    throw std::invalid_argument("unknown CD mode '" + name +
                                "' (off | analytic-effective | physical-two-photon)");
}

const char* to_string(ReadoutMode mode) {
    switch (mode) {
        case ReadoutMode::WindowEnd: return "window-end";
        case ReadoutMode::AfterPumpPeak: return "after-pump-peak";
        case ReadoutMode::Peak: return "peak";
    }
    return "?";
}

ReadoutMode readout_mode_from_string(const std::string& name) {
    if (name == "window-end") return ReadoutMode::WindowEnd;
    if (name == "after-pump-peak") return ReadoutMode::AfterPumpPeak;
    if (name == "peak") return ReadoutMode::Peak;
    throw std::invalid_argument("unknown readout mode '" + name +
                                "' (window-end | after-pump-peak | peak)");
}

StirapPair ProtocolSpec::shape_pair() const { return {omega01_peak, omega12_peak, sigma, t_s}; }

StirapPair ProtocolSpec::drive_pair() const { return shape_pair().scaled(stirap_scale); }

std::optional<CdEnvelope> ProtocolSpec::cd_envelope() const {
    if (cd == CdMode::Off) return std::nullopt;
    return CdEnvelope::analytic(shape_pair(), cd_area_scale);
}

TimeWindow ProtocolSpec::evolution_window() const {
    TimeWindow w = shape_pair().window();
    if (const auto env = cd_envelope()) {
        const TimeWindow s = env->support_window();
        w.t_min = std::min(w.t_min, s.t_min);
        w.t_max = std::max(w.t_max, s.t_max);
    }
    if (readout == ReadoutMode::AfterPumpPeak) {
        w.t_max = readout_offset;
    } else {
        w.t_max += readout_offset;
    }
    if (!(w.t_max > w.t_min)) {
        throw std::invalid_argument("protocol: readout time precedes the start of the pulses");
    }
    return w;
}

IntegratorConfig ProtocolSpec::integrator_config() const {
    return integrator.value_or(IntegratorConfig::for_tier(tier));
}

void ProtocolSpec::validate() const {
    if (!(sigma > 0.0) || sigma > 1000.0) {
        throw std::invalid_argument("protocol.sigma_ns must lie in (0, 1000]");
    }
    if (!std::isfinite(t_s)) throw std::invalid_argument("protocol.t_s_ns must be finite");
    if (omega01_peak < 0.0) throw std::invalid_argument("protocol.omega01_mhz must be >= 0");
    if (omega12_peak < 0.0) throw std::invalid_argument("protocol.omega12_mhz must be >= 0");
    if (stirap_scale < 0.0) throw std::invalid_argument("protocol.stirap_scale must be >= 0");
    if (cd_area_scale < 0.0) throw std::invalid_argument("protocol.cd_area_scale must be >= 0");
    if (!(two_photon_ratio > 0.0)) {
        throw std::invalid_argument("protocol.two_photon_ratio must be positive");
    }
    if (cd != CdMode::Off) {
        if (t_s == 0.0) {
            throw std::invalid_argument("protocol.t_s_ns: CD envelope is undefined for t_s = 0");
        }
        if (!(omega01_peak > 0.0) || !(omega12_peak > 0.0)) {
            throw std::invalid_argument("protocol: CD envelope needs both STIRAP peaks > 0");
        }
    }
    if (readout_offset < 0.0 && readout != ReadoutMode::AfterPumpPeak) {
        throw std::invalid_argument("protocol.readout_offset_ns must be >= 0");
    }
    if (thresholds.p0_start <= 0.0 || thresholds.p0_start > 1.0 || thresholds.p2_end <= 0.0 ||
        thresholds.p2_end > 1.0) {
        throw std::invalid_argument("protocol thresholds must lie in (0, 1]");
    }
    integrator_config().validate();
    (void)evolution_window();
}

std::vector<DriveTone> protocol_tones(const ProtocolSpec& spec, const QutritParams& params) {
    const StirapPair drive = spec.drive_pair();
    const TimeWindow pulse_window = drive.window();
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

    std::vector<DriveTone> tones;
    const auto cd = spec.cd_envelope();
    if (cd && spec.cd == CdMode::PhysicalTwoPhoton) {
        tones.push_back(DriveTone{ToneRole::TwoPhoton, 0.5 * params.omega02(),
                                  spec.phases.phi_tilde,
                                  ToneEnvelope::CdTwoPhoton{*cd, params.delta(),
                                                            spec.two_photon_ratio},
                                  {{kPair01, 1.0}, {kPair12, spec.two_photon_ratio}}});
    } else if (cd) {
        tones.push_back(DriveTone{ToneRole::Resonant, params.omega02(), spec.phases.phi02(),
                                  ToneEnvelope::CdDirect{*cd},
                                  {{kPair02, 1.0}}});
    }

    double delta01 = 0.0;
    double delta12 = 0.0;
    if (spec.stark_correction) std::tie(delta01, delta12) = stark_offset_correction(params, tones);

    tones.push_back(DriveTone{ToneRole::Resonant, params.omega01() + delta01, spec.phases.phi01,
                              ToneEnvelope::Gaussian{drive.pump(), pulse_window},
                              {{kPair01, 1.0}, {kPair12, std::numbers::sqrt2}}});
    tones.push_back(DriveTone{ToneRole::Resonant, params.omega12() + delta12, spec.phases.phi12,
                              ToneEnvelope::Gaussian{drive.stokes(), pulse_window},
                              {{kPair01, inv_sqrt2}, {kPair12, 1.0}}});
    return tones;
}

HamiltonianFn protocol_hamiltonian(const ProtocolSpec& spec, const QutritParams& params) {
    spec.validate();
    if (spec.tier == FidelityTier::IdealRwa) {
        const StirapPair drive = spec.drive_pair();
        const LoopPhases phases = spec.phases;
        if (const auto cd = spec.cd_envelope()) {
            return [drive, phases, cd = *cd](double t) {
                return build_loop_rwa(drive, cd, phases, t);
            };
        }
        return [drive, phases](double t) { return build_stirap_rwa(drive, phases, t); };
    }
    std::vector<DriveTone> tones = protocol_tones(spec, params);
    validate_tones(tones, params);
    return [tones = std::move(tones), params, tier = spec.tier](double t) {
        return build_full_interaction(tones, params, t, tier);
    };
}

namespace {

DensityTrajectory evolve_protocol(const ProtocolSpec& spec, const QutritParams& params) {
    const HamiltonianFn h = protocol_hamiltonian(spec, params);
    const TimeWindow window = spec.evolution_window();
    const IntegratorConfig cfg = spec.integrator_config();
    const LindbladSpec lindblad =
        spec.dissipation ? LindbladSpec::from_params(params) : LindbladSpec{};
    if (lindblad.empty()) {
        return to_density(evolve_state(StateVector::basis(0), h, window, cfg));
    }
    return evolve_density(DensityMatrix::basis(0), h, lindblad, window, cfg);
}

double readout_p2(const ProtocolSpec& spec, const DensityTrajectory& traj) {
    if (spec.readout == ReadoutMode::Peak) {
        double best = 0.0;
        for (const Mat3& rho : traj.rho) best = std::max(best, rho(2, 2).real());
        return best;
    }
    return traj.rho.back()(2, 2).real();
}

}  // namespace

ProtocolRun run_protocol(const ProtocolSpec& spec, const QutritParams& params) {
    ProtocolRun run;
    run.trajectory = evolve_protocol(spec, params);
    const PopulationTrace pops = populations(run.trajectory);

    run.p2_peak = *std::max_element(pops.p2.begin(), pops.p2.end());
    const auto cd = spec.cd_envelope();
    run.omega02_peak = cd ? cd->peak() : 0.0;

    TransferReport& r = run.report;
    r.p2_final = readout_p2(spec, run.trajectory);
    r.t_tr = transfer_time(pops, spec.thresholds);
    if (run.omega02_peak > 0.0) {
        const auto [theta_i, theta_f] = threshold_angles(spec.thresholds);
        r.qsl = qsl_bhattacharyya(theta_i, theta_f, run.omega02_peak);
    }
    const PulseAreas areas = pulse_areas(spec.drive_pair(), cd);
    r.area_stirap = areas.stirap;
    r.area_cd = areas.cd;
    r.phi_used = spec.phases.loop_phase();
    return run;
}

double final_p2(const ProtocolSpec& spec, const QutritParams& params) {
    return readout_p2(spec, evolve_protocol(spec, params));
}

}  // namespace sastirap
