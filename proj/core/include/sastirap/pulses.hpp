#pragma once

// Drive envelopes: the Gaussian STIRAP pair, the analytic counterdiabatic
// envelope 2 dTheta/dt, and a numeric transitionless-driving oracle.

#include <cmath>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sastirap/su3.hpp"

namespace sastirap {

struct TimeWindow {
    double t_min = 0.0;
    double t_max = 0.0;

    double length() const { return t_max - t_min; }
    bool contains(double t) const { return t >= t_min && t <= t_max; }
};

class GaussianPulse {
public:
    GaussianPulse(double peak, double center, double sigma);

    double peak() const { return peak_; }
    double center() const { return center_; }
    double sigma() const { return sigma_; }

    double operator()(double t) const;
    // Integral over the real line, peak * sigma * sqrt(2 pi).
    double area() const;

private:
    double peak_;
    double center_;
    double sigma_;
};

// Counterintuitive Gaussian pair: Omega01 centered at 0, Omega12 at t_s.
class StirapPair {
public:
    // Half-width of the truncation window in units of sigma.
    static constexpr double kTruncationSigmas = 5.0;

    StirapPair(double omega01_peak, double omega12_peak, double sigma, double t_s);

    double omega01_peak() const { return omega01_peak_; }
    double omega12_peak() const { return omega12_peak_; }
    double sigma() const { return sigma_; }
    double t_s() const { return t_s_; }

    GaussianPulse pump() const { return {omega01_peak_, 0.0, sigma_}; }
    GaussianPulse stokes() const { return {omega12_peak_, t_s_, sigma_}; }

    // [-5 sigma + min(t_s, 0), 5 sigma + max(t_s, 0)].
    TimeWindow window() const;

    // Envelopes clamped to exactly zero outside window().
    double omega01(double t) const;
    double omega12(double t) const;

    // Same shape, both peaks multiplied by `factor` (ratio preserved).
    StirapPair scaled(double factor) const;

private:
    double omega01_peak_;
    double omega12_peak_;
    double sigma_;
    double t_s_;
};

// Theta(t) = atan(Omega01/Omega12), continued analytically beyond the
// truncation window. Throws std::invalid_argument if both peaks are zero.
double mixing_angle(const StirapPair& pair, double t);

// Omega02(t) = area_scale * 2 dTheta/dt. Either the closed form
// rate * sech(rate * t + ln kappa) or linearly interpolated samples.
class CdEnvelope {
public:
    // Closed form for an equal-width Gaussian pair; throws for t_s == 0.
    static CdEnvelope analytic(const StirapPair& pair, double area_scale = 1.0);

    // Linear interpolation of (t, Omega02) samples, zero outside the sample range.
    static CdEnvelope sampled(std::vector<double> times, std::vector<double> values,
                              double area_scale = 1.0);

    double operator()(double t) const;

    // Maximum of Omega02 (area_scale * rate for the closed form).
    double peak() const;
    // Time of the maximum.
    double peak_time() const;
    // Integral over the real line (area_scale * pi for the closed form),
    // or over the sample range.
    double total_area() const;

    double area_scale() const { return area_scale_; }
    CdEnvelope with_area_scale(double scale) const;

    // Interval outside which Omega02 is below e^{-12.5} of its peak (the
    // Gaussian truncation level); the sample range for sampled envelopes.
    TimeWindow support_window() const;

    // Loop phase Phi for which this envelope cancels nonadiabatic couplings.
    double phase_offset() const { return phase_offset_; }

    bool is_analytic() const { return times_.empty(); }

private:
    CdEnvelope() = default;

    double rate_ = 0.0;
    double log_kappa_ = 0.0;
    std::vector<double> times_;
    std::vector<double> values_;
    double area_scale_ = 1.0;
    double phase_offset_ = -kPi / 2.0;
};

CdEnvelope cd_envelope_analytic(const StirapPair& pair);

class DegenerateSpectrumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using HamiltonianFn = std::function<Mat3(double)>;

struct OracleOptions {
    double h = 1e-3;
    bool richardson = false;
    // Minimum eigenvalue gap (relative to max(1, |H|)) accepted as nondegenerate.
    double min_gap = 1e-9;
};

// H_cd(t) = i sum_n (1 - |n><n|) |d_t n><n| from instantaneous eigenvectors of
// `h0`, differentiated by central differences in a parallel-transport gauge.
Mat3 cd_general_oracle(const HamiltonianFn& h0, double t, const OracleOptions& options = {});

// CSV with columns t_ns, omega01, omega12, omega02 (MHz, linear frequency).
void write_envelope_csv(std::ostream& out, const StirapPair& pair,
                        const std::optional<CdEnvelope>& cd, const TimeWindow& window,
                        double step_ns);

}  // namespace sastirap
