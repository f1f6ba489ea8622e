#pragma once

// Protocol observables: adiabatic basis, pulse areas, transfer time and the
// Bhattacharyya speed-limit bound.

#include <iosfwd>
#include <optional>

#include "sastirap/dynamics.hpp"
#include "sastirap/hamiltonians.hpp"
#include "sastirap/pulses.hpp"

namespace sastirap {

// Instantaneous eigenbasis of the STIRAP Hamiltonian.
struct AdiabaticBasis {
    Vec3 dark;    // cos T e^{i phi12}|0> - sin T e^{-i phi01}|2>, eigenvalue 0
    Vec3 bright;  // sin T e^{i phi01}|0> + cos T e^{-i phi12}|2>
    Vec3 plus;    // (|B> + |1>)/sqrt 2, eigenvalue +Omega_rms/2
    Vec3 minus;   // (|B> - |1>)/sqrt 2, eigenvalue -Omega_rms/2
    double theta;
    double omega_rms;  // sqrt(Omega01^2 + Omega12^2)
};

// Basis at time t. Throws std::invalid_argument when both envelopes vanish.
AdiabaticBasis dark_bright_states(const StirapPair& pair, const LoopPhases& phases, double t);

// Dark state for a given mixing angle (phases as in dark_bright_states).
Vec3 dark_state(double theta, const LoopPhases& phases);

struct PulseAreas {
    double stirap;  // integral of sqrt(Omega01^2 + Omega12^2)
    double cd;      // integral of Omega02
};

// Adaptive Gauss-Kronrod quadrature over `window` (relative tolerance 1e-10).
// Without a window the STIRAP truncation window is used for the STIRAP area
// and the union with the CD support window for the CD area.
PulseAreas pulse_areas(const StirapPair& pair, const std::optional<CdEnvelope>& cd,
                       const std::optional<TimeWindow>& window = std::nullopt);

struct TransferThresholds {
    double p0_start = 0.99;
    double p2_end = 0.8;
};

// t_f - t_i, with t_i the last time p0 >= p0_start before the global minimum of
// p0 and t_f the first time p2 >= p2_end after t_i; both linearly interpolated.
// Empty when either threshold is never crossed.
std::optional<double> transfer_time(const PopulationTrace& trace,
                                    const TransferThresholds& thresholds = {});

// Mixing angles equivalent to population thresholds: acos(sqrt p0), asin(sqrt p2).
std::pair<double, double> threshold_angles(const TransferThresholds& thresholds);

// Dark-state variant: time for Theta(t) to rotate from theta_i to theta_f.
std::optional<double> transfer_time_from_angles(const StirapPair& pair, double theta_i,
                                                double theta_f);

// 2 arccos|<D(theta_i)|D(theta_f)>| / omega02_max.
double qsl_bhattacharyya(double theta_i, double theta_f, double omega02_max);

struct TransferReport {
    double p2_final = 0.0;
    std::optional<double> t_tr;  // ns
    double qsl = 0.0;            // ns, from the run's peak Omega02 (0 without CD)
    double area_stirap = 0.0;
    double area_cd = 0.0;
    double phi_used = 0.0;       // loop phase Phi
};

void write_report_csv_header(std::ostream& out);
void write_report_csv_row(std::ostream& out, const TransferReport& report);

}  // namespace sastirap
