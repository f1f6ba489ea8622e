#include "sastirap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <ostream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace sastirap {

Vec3 dark_state(double theta, const LoopPhases& phases) {
    return Vec3(std::cos(theta) * std::polar(1.0, phases.phi12), 0.0,
                -std::sin(theta) * std::polar(1.0, -phases.phi01));
}

AdiabaticBasis dark_bright_states(const StirapPair& pair, const LoopPhases& phases, double t) {
    const double w01 = pair.omega01(t);
    const double w12 = pair.omega12(t);
    if (w01 == 0.0 && w12 == 0.0) {
        throw std::invalid_argument("dark_bright_states: both STIRAP envelopes vanish at t = " +
                                    std::to_string(t) + " ns");
    }
    AdiabaticBasis b;
    b.theta = std::atan2(w01, w12);
    b.omega_rms = std::hypot(w01, w12);
    b.dark = dark_state(b.theta, phases);
    b.bright = Vec3(std::sin(b.theta) * std::polar(1.0, phases.phi01), 0.0,
                    std::cos(b.theta) * std::polar(1.0, -phases.phi12));
    const Vec3 one(0.0, 1.0, 0.0);
    b.plus = (b.bright + one) / std::sqrt(2.0);
    b.minus = (b.bright - one) / std::sqrt(2.0);
    return b;
}

namespace {

double integrate(const std::function<double(double)>& f, double a, double b) {
    if (!(b > a)) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-10);
}

}  // namespace

PulseAreas pulse_areas(const StirapPair& pair, const std::optional<CdEnvelope>& cd,
                       const std::optional<TimeWindow>& window) {
    const TimeWindow stirap_window = window.value_or(pair.window());
    PulseAreas areas{};
    areas.stirap = integrate(
        [&pair](double t) { return std::hypot(pair.omega01(t), pair.omega12(t)); },
        stirap_window.t_min, stirap_window.t_max);
    if (cd) {
        TimeWindow cd_window = stirap_window;
        if (!window) {
            const TimeWindow support = cd->support_window();
            cd_window = {std::min(support.t_min, cd_window.t_min),
                         std::max(support.t_max, cd_window.t_max)};
        }
        // Split at the peak so the sech shoulder is resolved on long windows.
        const double split = std::clamp(cd->peak_time(), cd_window.t_min, cd_window.t_max);
        auto f = [&cd](double t) { return (*cd)(t); };
        areas.cd = integrate(f, cd_window.t_min, split) + integrate(f, split, cd_window.t_max);
    }
    return areas;
}

std::optional<double> transfer_time(const PopulationTrace& trace,
                                    const TransferThresholds& thresholds) {
    const std::size_t n = trace.times.size();
    if (n < 2 || trace.p0.size() != n || trace.p2.size() != n) return std::nullopt;

    const auto min_it = std::min_element(trace.p0.begin(), trace.p0.end());
    const auto i_min = static_cast<std::size_t>(min_it - trace.p0.begin());

    std::optional<std::size_t> start;
    for (std::size_t j = i_min + 1; j-- > 0;) {
        if (trace.p0[j] >= thresholds.p0_start) {
            start = j;
            break;
        }
    }
    if (!start || *start >= i_min) return std::nullopt;
    const std::size_t j = *start;
    const double a = trace.p0[j] - thresholds.p0_start;
    const double b = trace.p0[j] - trace.p0[j + 1];
    const double t_i = trace.times[j] + (b > 0.0 ? a / b : 0.0) * (trace.times[j + 1] - trace.times[j]);

    for (std::size_t k = j + 1; k < n; ++k) {
        if (trace.p2[k] >= thresholds.p2_end) {
            const double rise = trace.p2[k] - trace.p2[k - 1];
            const double frac = rise > 0.0 ? (thresholds.p2_end - trace.p2[k - 1]) / rise : 1.0;
            const double t_f = trace.times[k - 1] +
                               std::clamp(frac, 0.0, 1.0) * (trace.times[k] - trace.times[k - 1]);
            return std::max(t_f, t_i) - t_i;
        }
    }
    return std::nullopt;
}

std::pair<double, double> threshold_angles(const TransferThresholds& thresholds) {
    if (thresholds.p0_start <= 0.0 || thresholds.p0_start > 1.0 || thresholds.p2_end < 0.0 ||
        thresholds.p2_end > 1.0) {
        throw std::invalid_argument("transfer thresholds must be probabilities");
    }
    return {std::acos(std::sqrt(thresholds.p0_start)), std::asin(std::sqrt(thresholds.p2_end))};
}

std::optional<double> transfer_time_from_angles(const StirapPair& pair, double theta_i,
                                                double theta_f) {
    if (pair.t_s() == 0.0 || !(pair.omega01_peak() > 0.0) || !(pair.omega12_peak() > 0.0)) {
        return std::nullopt;
    }
    if (!(theta_i > 0.0) || !(theta_f < kPi / 2.0) || theta_f < theta_i) return std::nullopt;
    // ln tan Theta(t) = ln kappa + rate t with rate = -t_s / sigma^2.
    const double rate = -pair.t_s() / (pair.sigma() * pair.sigma());
    const double dt = (std::log(std::tan(theta_f)) - std::log(std::tan(theta_i))) / rate;
    if (dt < 0.0) return std::nullopt;
    return dt;
}

double qsl_bhattacharyya(double theta_i, double theta_f, double omega02_max) {
    if (!(omega02_max > 0.0)) {
        throw std::invalid_argument("qsl_bhattacharyya: coupling must be positive");
    }
    const LoopPhases phases{};
    const double overlap =
        std::min(1.0, std::abs(dark_state(theta_i, phases).dot(dark_state(theta_f, phases))));
    return 2.0 * std::acos(overlap) / omega02_max;
}

void write_report_csv_header(std::ostream& out) {
    out << "# sastirap report v1\n";
    out << "p2_final,t_tr_ns,qsl_ns,area_stirap_pi,area_cd_pi,phi_used_pi\n";
}

void write_report_csv_row(std::ostream& out, const TransferReport& r) {
    char line[256];
    char ttr[32] = "";
    if (r.t_tr) std::snprintf(ttr, sizeof ttr, "%.6f", *r.t_tr);
    std::snprintf(line, sizeof line, "%.10f,%s,%.6f,%.8f,%.8f,%.8f\n", r.p2_final, ttr, r.qsl,
                  r.area_stirap / kPi, r.area_cd / kPi, r.phi_used / kPi);
    out << line;
}

}  // namespace sastirap
