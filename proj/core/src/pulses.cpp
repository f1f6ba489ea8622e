#include "sastirap/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace sastirap {

GaussianPulse::GaussianPulse(double peak, double center, double sigma)
    : peak_(peak), center_(center), sigma_(sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("GaussianPulse: sigma must be positive");
    if (peak < 0.0) throw std::invalid_argument("GaussianPulse: peak must be non-negative");
}

double GaussianPulse::operator()(double t) const {
    const double x = (t - center_) / sigma_;
    return peak_ * std::exp(-0.5 * x * x);
}

double GaussianPulse::area() const { return peak_ * sigma_ * std::sqrt(kTwoPi); }

StirapPair::StirapPair(double omega01_peak, double omega12_peak, double sigma, double t_s)
    : omega01_peak_(omega01_peak), omega12_peak_(omega12_peak), sigma_(sigma), t_s_(t_s) {
    if (!(sigma > 0.0)) throw std::invalid_argument("StirapPair: sigma must be positive");
    if (omega01_peak < 0.0 || omega12_peak < 0.0) {
        throw std::invalid_argument("StirapPair: peak amplitudes must be non-negative");
    }
}

TimeWindow StirapPair::window() const {
    const double half = kTruncationSigmas * sigma_;
    return {-half + std::min(t_s_, 0.0), half + std::max(t_s_, 0.0)};
}

double StirapPair::omega01(double t) const {
    if (!window().contains(t)) return 0.0;
    return pump()(t);
}

double StirapPair::omega12(double t) const {
    if (!window().contains(t)) return 0.0;
    return stokes()(t);
}

StirapPair StirapPair::scaled(double factor) const {
    return {omega01_peak_ * factor, omega12_peak_ * factor, sigma_, t_s_};
}

double mixing_angle(const StirapPair& pair, double t) {
    const double a = pair.omega01_peak();
    const double b = pair.omega12_peak();
    if (a == 0.0 && b == 0.0) {
        throw std::invalid_argument("mixing_angle: both STIRAP envelopes vanish");
    }
    if (b == 0.0) return kPi / 2.0;
    if (a == 0.0) return 0.0;
    // ln(Omega01(t)/Omega12(t)) for equal-width Gaussians, valid for all t.
    const double s2 = pair.sigma() * pair.sigma();
    const double ts = pair.t_s();
    const double log_ratio = std::log(a / b) + (ts * ts - 2.0 * t * ts) / (2.0 * s2);
    if (log_ratio > 0.0) return kPi / 2.0 - std::atan(std::exp(-log_ratio));
    return std::atan(std::exp(log_ratio));
}

CdEnvelope CdEnvelope::analytic(const StirapPair& pair, double area_scale) {
    if (pair.t_s() == 0.0) {
        throw std::invalid_argument(
            "counterdiabatic envelope undefined for t_s = 0 (mixing angle is constant)");
    }
    if (!(pair.omega01_peak() > 0.0) || !(pair.omega12_peak() > 0.0)) {
        throw std::invalid_argument("counterdiabatic envelope needs both STIRAP peaks > 0");
    }
    const double s2 = pair.sigma() * pair.sigma();
    CdEnvelope cd;
    cd.rate_ = -pair.t_s() / s2;
    cd.log_kappa_ = std::log(pair.omega01_peak() / pair.omega12_peak()) +
                    pair.t_s() * pair.t_s() / (2.0 * s2);
    cd.area_scale_ = area_scale;
    return cd;
}

CdEnvelope CdEnvelope::sampled(std::vector<double> times, std::vector<double> values,
                               double area_scale) {
    if (times.size() < 2 || times.size() != values.size()) {
        throw std::invalid_argument("CdEnvelope::sampled: need >= 2 matching samples");
    }
    if (!std::is_sorted(times.begin(), times.end()) ||
        std::adjacent_find(times.begin(), times.end()) != times.end()) {
        throw std::invalid_argument("CdEnvelope::sampled: times must be strictly increasing");
    }
    CdEnvelope cd;
    cd.times_ = std::move(times);
    cd.values_ = std::move(values);
    cd.area_scale_ = area_scale;
    return cd;
}

double CdEnvelope::operator()(double t) const {
    if (is_analytic()) {
        return area_scale_ * rate_ / std::cosh(rate_ * t + log_kappa_);
    }
    if (t < times_.front() || t > times_.back()) return 0.0;
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.end()) return area_scale_ * values_.back();
    const auto i = static_cast<std::size_t>(it - times_.begin());
    const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return area_scale_ * ((1.0 - w) * values_[i - 1] + w * values_[i]);
}

double CdEnvelope::peak() const {
    if (is_analytic()) return area_scale_ * rate_;
    return area_scale_ * *std::max_element(values_.begin(), values_.end());
}

double CdEnvelope::peak_time() const {
    if (is_analytic()) return -log_kappa_ / rate_;
    auto it = std::max_element(values_.begin(), values_.end());
    return times_[static_cast<std::size_t>(it - values_.begin())];
}

double CdEnvelope::total_area() const {
    if (is_analytic()) return area_scale_ * (rate_ > 0.0 ? kPi : -kPi);
    double sum = 0.0;
    for (std::size_t i = 1; i < times_.size(); ++i) {
        sum += 0.5 * (values_[i] + values_[i - 1]) * (times_[i] - times_[i - 1]);
    }
    return area_scale_ * sum;
}

TimeWindow CdEnvelope::support_window() const {
    if (!is_analytic()) return {times_.front(), times_.back()};
    // sech(x) < e^{-12.5} for |x| > 12.5 + ln 2
    const double half = (12.5 + std::log(2.0)) / std::abs(rate_);
    const double center = peak_time();
    return {center - half, center + half};
}

CdEnvelope CdEnvelope::with_area_scale(double scale) const {
    CdEnvelope cd = *this;
    cd.area_scale_ = scale;
    return cd;
}

CdEnvelope cd_envelope_analytic(const StirapPair& pair) { return CdEnvelope::analytic(pair); }


namespace {

struct Spectrum {
    Eigen::Vector3d values;
    Mat3 vectors;
};

Spectrum diagonalize(const Mat3& h, double min_gap, double t) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(h);
    Spectrum s{es.eigenvalues(), es.eigenvectors()};
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    const double gap = std::min(s.values[1] - s.values[0], s.values[2] - s.values[1]);
    if (gap < min_gap * scale) {
        throw DegenerateSpectrumError("cd_general_oracle: degenerate spectrum near t = " +
                                      std::to_string(t) + " ns (gap " + std::to_string(gap) +
                                      ")");
    }
    return s;
}

// Re-phase each column of `shifted` so that <ref_n|shifted_n> is real and positive.
Mat3 align_phases(const Mat3& ref, Mat3 shifted, double t) {
    for (int n = 0; n < 3; ++n) {
        const cplx overlap = ref.col(n).dot(shifted.col(n));
        if (std::abs(overlap) < 0.5) {
            throw DegenerateSpectrumError(
                "cd_general_oracle: eigenvector ordering changed within the stencil near t = " +
                std::to_string(t) + " ns");
        }
        shifted.col(n) *= std::conj(overlap) / std::abs(overlap);
    }
    return shifted;
}

Mat3 central_derivative(const HamiltonianFn& h0, const Mat3& ref, double t, double h,
                        double min_gap) {
    const Mat3 plus = align_phases(ref, diagonalize(h0(t + h), min_gap, t).vectors, t);
    const Mat3 minus = align_phases(ref, diagonalize(h0(t - h), min_gap, t).vectors, t);
    return (plus - minus) / (2.0 * h);
}

}  // namespace

Mat3 cd_general_oracle(const HamiltonianFn& h0, double t, const OracleOptions& options) {
    if (!(options.h > 0.0)) throw std::invalid_argument("cd_general_oracle: step must be positive");
    const Mat3 ref = diagonalize(h0(t), options.min_gap, t).vectors;
    Mat3 dn = central_derivative(h0, ref, t, options.h, options.min_gap);
    if (options.richardson) {
        const Mat3 half = central_derivative(h0, ref, t, 0.5 * options.h, options.min_gap);
        dn = (4.0 * half - dn) / 3.0;
    }
    Mat3 hcd = Mat3::Zero();
    for (int n = 0; n < 3; ++n) {
        const Vec3 v = ref.col(n);
        const Vec3 transverse = dn.col(n) - v * v.dot(dn.col(n));
        hcd += kI * transverse * v.adjoint();
    }
    return hcd;
}

void write_envelope_csv(std::ostream& out, const StirapPair& pair,
                        const std::optional<CdEnvelope>& cd, const TimeWindow& window,
                        double step_ns) {
    if (!(step_ns > 0.0)) throw std::invalid_argument("envelope export: step must be positive");
    out << "# sastirap envelopes v1 (MHz, linear frequency)\n";
    out << "t_ns,omega01_mhz,omega12_mhz,omega02_mhz\n";
    const auto n = static_cast<long>(std::floor(window.length() / step_ns + 1e-9));
    char line[160];
    for (long i = 0; i <= n; ++i) {
        const double t = window.t_min + static_cast<double>(i) * step_ns;
        const double w02 = cd ? (*cd)(t) : 0.0;
        std::snprintf(line, sizeof line, "%.6f,%.9g,%.9g,%.9g\n", t,
                      angular_to_mhz(pair.omega01(t)), angular_to_mhz(pair.omega12(t)),
                      angular_to_mhz(w02));
        out << line;
    }
}

}  // namespace sastirap
