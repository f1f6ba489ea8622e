#include "sastirap/hamiltonians.hpp"

#include <cmath>
#include <stdexcept>

namespace sastirap {

double LoopPhases::phi02() const { return wrap_phase(2.0 * phi_tilde + kPi); }

double LoopPhases::loop_phase() const { return wrap_phase(phi01 + phi12 + phi20()); }

LoopPhases LoopPhases::for_loop_phase(double loop_phase, double phi01, double phi12) {
    return {phi01, phi12, 0.5 * (phi01 + phi12 - kPi - loop_phase)};
}

const char* to_string(FidelityTier tier) {
    switch (tier) {
        case FidelityTier::IdealRwa: return "ideal-rwa";
        case FidelityTier::CrossCouplingRwa: return "cross-coupling-rwa";
        case FidelityTier::FullInteractionPicture: return "full-interaction";
    }
    return "?";
}

FidelityTier tier_from_string(const std::string& name) {
    if (name == "ideal-rwa") return FidelityTier::IdealRwa;
    if (name == "cross-coupling-rwa") return FidelityTier::CrossCouplingRwa;
    if (name == "full-interaction") return FidelityTier::FullInteractionPicture;
    throw std::invalid_argument("unknown fidelity tier '" + name +
                                "' (ideal-rwa | cross-coupling-rwa | full-interaction)");
}

namespace {

// Adds c to the (k,l) entry and conj(c) to (l,k).
void add_coupling(Mat3& h, LevelPair pair, cplx c) {
    h(pair.k, pair.l) += c;
    h(pair.l, pair.k) += std::conj(c);
}

double transition_frequency(const QutritParams& params, LevelPair pair) {
    switch (pair_index(pair)) {
        case 0: return params.omega01();
        case 1: return params.omega12();
        default: return params.omega02();
    }
}

}  // namespace

Mat3 build_stirap_rwa(const StirapPair& pair, const LoopPhases& phases, double t) {
    Mat3 h = Mat3::Zero();
    add_coupling(h, kPair01, 0.5 * pair.omega01(t) * std::polar(1.0, phases.phi01));
    add_coupling(h, kPair12, 0.5 * pair.omega12(t) * std::polar(1.0, phases.phi12));
    return h;
}

Mat3 build_loop_rwa(const StirapPair& pair, const CdEnvelope& cd, const LoopPhases& phases,
                    double t) {
    Mat3 h = build_stirap_rwa(pair, phases, t);
    add_coupling(h, kPair02, 0.5 * cd(t) * std::polar(1.0, phases.phi02()));
    return h;
}

Mat3 gauge_transform(const Mat3& h, const std::array<double, 3>& chi) {
    Mat3 out = h;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            out(r, c) *= std::polar(1.0, chi[static_cast<std::size_t>(c)] -
                                             chi[static_cast<std::size_t>(r)]);
        }
    }
    return out;
}

double extract_loop_phase(const Mat3& h) {
    const cplx h01 = h(0, 1);
    const cplx h12 = h(1, 2);
    const cplx h20 = h(2, 0);
    if (h01 == 0.0 || h12 == 0.0 || h20 == 0.0) {
        throw UndefinedPhaseError("loop phase undefined: an off-diagonal pair coupling is zero");
    }
    return wrap_phase(std::arg(h01 * h12 * h20));
}

TwoPhotonCoupling two_photon_effective(double omega_t01, double omega_t12, double delta,
                                       double phi_tilde) {
    if (delta == 0.0) throw std::invalid_argument("two_photon_effective: zero detuning");
    if (delta < 0.0) throw std::invalid_argument("two_photon_effective: detuning must be positive");
    TwoPhotonCoupling c;
    c.omega02 = omega_t01 * omega_t12 / (2.0 * delta);
    c.phi02 = wrap_phase(2.0 * phi_tilde + kPi);
    c.perturbative = std::abs(omega_t01) <= 0.5 * delta && std::abs(omega_t12) <= 0.5 * delta;
    return c;
}

double two_photon_tone_amplitude(double omega02, double delta, double ratio12) {
    if (!(delta > 0.0)) throw std::invalid_argument("two-photon detuning must be positive");
    if (!(ratio12 > 0.0)) throw std::invalid_argument("two-photon coupling ratio must be positive");
    return std::sqrt(2.0 * delta * std::max(omega02, 0.0) / ratio12);
}

double ToneEnvelope::operator()(double t) const {
    struct Visitor {
        double t;
        double operator()(const Constant& c) const {
            return c.window.contains(t) ? c.amplitude : 0.0;
        }
        double operator()(const Gaussian& g) const {
            return g.window.contains(t) ? g.pulse(t) : 0.0;
        }
        double operator()(const CdDirect& c) const { return c.cd(t); }
        double operator()(const CdTwoPhoton& c) const {
            return two_photon_tone_amplitude(c.cd(t), c.delta, c.ratio12);
        }
    };
    return std::visit(Visitor{t}, shape_);
}

double ToneEnvelope::peak() const {
    struct Visitor {
        double operator()(const Constant& c) const { return c.amplitude; }
        double operator()(const Gaussian& g) const { return g.pulse.peak(); }
        double operator()(const CdDirect& c) const { return c.cd.peak(); }
        double operator()(const CdTwoPhoton& c) const {
            return two_photon_tone_amplitude(c.cd.peak(), c.delta, c.ratio12);
        }
    };
    return std::visit(Visitor{}, shape_);
}

ToneEnvelope ToneEnvelope::scaled(double factor) const {
    struct Visitor {
        double f;
        ToneEnvelope operator()(const Constant& c) const {
            return Constant{c.amplitude * f, c.window};
        }
        ToneEnvelope operator()(const Gaussian& g) const {
            return Gaussian{GaussianPulse(g.pulse.peak() * f, g.pulse.center(), g.pulse.sigma()),
                            g.window};
        }
        ToneEnvelope operator()(const CdDirect& c) const {
            return CdDirect{c.cd.with_area_scale(c.cd.area_scale() * f)};
        }
        // Amplitude f on the tone is f^2 on the effective coupling.
        ToneEnvelope operator()(const CdTwoPhoton& c) const {
            return CdTwoPhoton{c.cd.with_area_scale(c.cd.area_scale() * f * f), c.delta,
                               c.ratio12};
        }
    };
    return std::visit(Visitor{factor}, shape_);
}

DriveTone DriveTone::ladder(ToneRole role, double carrier, double phase, ToneEnvelope envelope) {
    return DriveTone{role, carrier, phase, std::move(envelope),
                     {{kPair01, 1.0}, {kPair12, std::numbers::sqrt2}}};
}

void validate_tones(const std::vector<DriveTone>& tones, const QutritParams& params) {
    for (const DriveTone& tone : tones) {
        if (!(tone.carrier > 0.0)) throw ConfigurationError("drive tone carrier must be positive");
        if (tone.couplings.empty()) throw ConfigurationError("drive tone couples to no transition");
        for (const ToneCoupling& c : tone.couplings) validate_pair(c.pair);
        if (tone.role == ToneRole::TwoPhoton) {
            if (std::abs(2.0 * tone.carrier - params.omega02()) > kTwoPhotonResonanceTolerance) {
                throw ConfigurationError(
                    "two-photon tone violates 2 omega~ = omega01 + omega12 (mismatch " +
                    std::to_string(2.0 * tone.carrier - params.omega02()) + " rad/ns)");
            }
            bool has01 = false;
            bool has12 = false;
            for (const ToneCoupling& c : tone.couplings) {
                has01 = has01 || c.pair == kPair01;
                has12 = has12 || c.pair == kPair12;
            }
            if (!has01 || !has12) {
                throw ConfigurationError("two-photon tone must couple into both 0-1 and 1-2");
            }
        }
    }
}

namespace {

double coupling_factor(const DriveTone& tone, LevelPair pair) {
    for (const ToneCoupling& c : tone.couplings) {
        if (c.pair == pair) return c.factor;
    }
    return 0.0;
}

const ToneCoupling& nearest_coupling(const DriveTone& tone, const QutritParams& params) {
    const ToneCoupling* best = &tone.couplings.front();
    double best_detuning = std::abs(tone.carrier - transition_frequency(params, best->pair));
    for (const ToneCoupling& c : tone.couplings) {
        const double d = std::abs(tone.carrier - transition_frequency(params, c.pair));
        if (d < best_detuning) {
            best = &c;
            best_detuning = d;
        }
    }
    return *best;
}

}  // namespace

Mat3 build_full_interaction(const std::vector<DriveTone>& tones, const QutritParams& params,
                            double t, FidelityTier tier) {
    validate_tones(tones, params);
    Mat3 h = Mat3::Zero();
    for (const DriveTone& tone : tones) {
        const double amplitude = tone.envelope(t);
        if (amplitude == 0.0) continue;
        if (tier == FidelityTier::IdealRwa) {
            if (tone.role == ToneRole::TwoPhoton) {
                const TwoPhotonCoupling eff = two_photon_effective(
                    amplitude * coupling_factor(tone, kPair01),
                    amplitude * coupling_factor(tone, kPair12), params.delta(), tone.phase);
                add_coupling(h, kPair02, 0.5 * eff.omega02 * std::polar(1.0, eff.phi02));
            } else {
                const ToneCoupling& c = nearest_coupling(tone, params);
                add_coupling(h, c.pair, 0.5 * amplitude * c.factor * std::polar(1.0, tone.phase));
            }
            continue;
        }
        for (const ToneCoupling& c : tone.couplings) {
            const double w_kl = transition_frequency(params, c.pair);
            const double a = amplitude * c.factor;
            if (tier == FidelityTier::CrossCouplingRwa) {
                add_coupling(h, c.pair,
                             0.5 * a * std::polar(1.0, (tone.carrier - w_kl) * t + tone.phase));
            } else {
                add_coupling(h, c.pair, a * std::cos(tone.carrier * t + tone.phase) *
                                            std::polar(1.0, -w_kl * t));
            }
        }
    }
    return h;
}

std::pair<double, double> stark_offset_correction(const QutritParams& params,
                                                  const std::vector<DriveTone>& tones) {
    std::array<double, 3> shift{0.0, 0.0, 0.0};
    for (const DriveTone& tone : tones) {
        if (tone.role != ToneRole::TwoPhoton) continue;
        const double peak = tone.envelope.peak();
        for (const ToneCoupling& c : tone.couplings) {
            const double detuning = tone.carrier - transition_frequency(params, c.pair);
            if (std::abs(detuning) < 1e-12) continue;
            const double rabi = c.factor * peak;
            // Second-order light shift: lower level by +Omega^2/(4 d), upper by -Omega^2/(4 d).
            const double s = rabi * rabi / (4.0 * detuning);
            shift[static_cast<std::size_t>(c.pair.k)] += s;
            shift[static_cast<std::size_t>(c.pair.l)] -= s;
        }
    }
    return {shift[1] - shift[0], shift[2] - shift[1]};
}

}  // namespace sastirap
