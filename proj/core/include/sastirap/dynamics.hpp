#pragma once

// Schroedinger and Lindblad propagation under time-dependent Hamiltonians.

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "sastirap/hamiltonians.hpp"
#include "sastirap/pulses.hpp"
#include "sastirap/su3.hpp"

namespace sastirap {

// Jump operator sqrt(rate) * op.
struct CollapseOperator {
    double rate;
    Mat3 op;
};

struct LindbladSpec {
    std::vector<CollapseOperator> collapse;

    // sqrt(G10)|0><1|, sqrt(G21)|1><2| and, if gamma_phi > 0, the dephasing
    // operator sqrt(2 gamma_phi) diag(0,1,2), which damps rho_kl at gamma_phi (k-l)^2.
    static LindbladSpec from_params(const QutritParams& params);

    bool empty() const;
};

// L[rho] = sum_k rate_k (A rho A^+ - 1/2 {A^+ A, rho}).
Mat3 dissipator(const LindbladSpec& spec, const Mat3& rho);

enum class IntegratorMethod {
    Rk4,             // classical fixed-step fourth order
    AdaptiveDopri5,  // Dormand-Prince 5(4) with error control
};

struct IntegratorConfig {
    IntegratorMethod method = IntegratorMethod::Rk4;
    double dt = 0.02;          // ns; fixed step, or initial step for adaptive
    double abs_tol = 1e-10;    // adaptive only
    double rel_tol = 1e-10;    // adaptive only
    double sample_every = 0.5; // trajectory sampling cadence, ns
    double min_dt = 1e-9;      // adaptive step-size floor, ns

    // Defaults per tier: 0.02 ns, 0.005 ns, 0.2 ps.
    static IntegratorConfig for_tier(FidelityTier tier);
    void validate() const;
};

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StateTrajectory {
    std::vector<double> times;
    std::vector<Vec3> states;
};

struct DensityTrajectory {
    std::vector<double> times;
    std::vector<Mat3> rho;
};

// Sampled |psi(t)> on [window.t_min, window.t_max] (both ends included).
StateTrajectory evolve_state(const StateVector& psi0, const HamiltonianFn& h,
                             const TimeWindow& window, const IntegratorConfig& config);

// Sampled rho(t) under d rho/dt = -i[H, rho] + L[rho].
DensityTrajectory evolve_density(const DensityMatrix& rho0, const HamiltonianFn& h,
                                 const LindbladSpec& lindblad, const TimeWindow& window,
                                 const IntegratorConfig& config);

DensityTrajectory to_density(const StateTrajectory& traj);

// Worst-case violations of the density-matrix invariants over a trajectory.
struct DensityDefects {
    double trace = 0.0;         // max |tr rho - 1|
    double hermiticity = 0.0;   // max |rho - rho^+|
    double min_eigenvalue = 1.0;
};

DensityDefects density_defects(const DensityTrajectory& traj);

// Populations of a trajectory.
struct PopulationTrace {
    std::vector<double> times;
    std::vector<double> p0;
    std::vector<double> p1;
    std::vector<double> p2;
};

PopulationTrace populations(const DensityTrajectory& traj);

// Columns t_ns, p0, p1, p2, re/im of rho01, rho02, rho12.
void write_trajectory_csv(std::ostream& out, const DensityTrajectory& traj);

}  // namespace sastirap
