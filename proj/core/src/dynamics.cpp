#include "sastirap/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <boost/numeric/odeint.hpp>

namespace sastirap {

namespace odeint = boost::numeric::odeint;

LindbladSpec LindbladSpec::from_params(const QutritParams& params) {
    LindbladSpec spec;
    if (params.gamma10() > 0.0) {
        Mat3 a = Mat3::Zero();
        a(0, 1) = 1.0;
        spec.collapse.push_back({params.gamma10(), a});
    }
    if (params.gamma21() > 0.0) {
        Mat3 a = Mat3::Zero();
        a(1, 2) = 1.0;
        spec.collapse.push_back({params.gamma21(), a});
    }
    if (params.gamma_phi() > 0.0) {
        Mat3 n = Mat3::Zero();
        n(1, 1) = 1.0;
        n(2, 2) = 2.0;
        spec.collapse.push_back({2.0 * params.gamma_phi(), n});
    }
    return spec;
}

bool LindbladSpec::empty() const {
    return std::none_of(collapse.begin(), collapse.end(),
                        [](const CollapseOperator& c) { return c.rate > 0.0; });
}

Mat3 dissipator(const LindbladSpec& spec, const Mat3& rho) {
    Mat3 out = Mat3::Zero();
    for (const CollapseOperator& c : spec.collapse) {
        const Mat3 ad = c.op.adjoint();
        const Mat3 ada = ad * c.op;
        out += c.rate * (c.op * rho * ad - 0.5 * (ada * rho + rho * ada));
    }
    return out;
}

IntegratorConfig IntegratorConfig::for_tier(FidelityTier tier) {
    IntegratorConfig cfg;
    switch (tier) {
        case FidelityTier::IdealRwa: cfg.dt = 0.02; break;
        case FidelityTier::CrossCouplingRwa: cfg.dt = 0.005; break;
        case FidelityTier::FullInteractionPicture: cfg.dt = 2e-4; break;
    }
    return cfg;
}

void IntegratorConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("integrator: dt must be positive");
    if (!(sample_every > 0.0)) throw std::invalid_argument("integrator: sample cadence must be positive");
    if (method == IntegratorMethod::AdaptiveDopri5) {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
            throw std::invalid_argument("integrator: tolerances must be positive");
        }
        if (!(min_dt > 0.0)) throw std::invalid_argument("integrator: min_dt must be positive");
    }
}

namespace {

template <std::size_t N>
using State = std::array<cplx, N>;

std::vector<double> sample_times(const TimeWindow& window, double cadence) {
    if (!(window.t_max > window.t_min)) {
        throw std::invalid_argument("evolution window must have t_max > t_min");
    }
    std::vector<double> times;
    const auto n = static_cast<long>(std::floor(window.length() / cadence + 1e-9));
    times.reserve(static_cast<std::size_t>(n) + 2);
    for (long i = 0; i <= n; ++i) times.push_back(window.t_min + static_cast<double>(i) * cadence);
    if (window.t_max - times.back() > 1e-9 * cadence) times.push_back(window.t_max);
    else times.back() = window.t_max;
    return times;
}

// Integrates `system` from sample to sample, calling `record(x)` at each sample time.
template <std::size_t N, class System, class Record>
void propagate(System&& system, State<N>& x, const std::vector<double>& times,
               const IntegratorConfig& config, Record&& record) {
    record(x);
    if (config.method == IntegratorMethod::Rk4) {
        odeint::runge_kutta4<State<N>, double, State<N>, double, odeint::array_algebra> stepper;
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double span = times[i] - times[i - 1];
            const auto steps = static_cast<long>(std::ceil(span / config.dt - 1e-9));
            const double h = span / static_cast<double>(std::max(steps, 1L));
            double t = times[i - 1];
            for (long s = 0; s < steps; ++s) {
                stepper.do_step(system, x, t, h);
                t = times[i - 1] + static_cast<double>(s + 1) * h;
            }
            record(x);
        }
        return;
    }

    using Dopri = odeint::runge_kutta_dopri5<State<N>, double, State<N>, double,
                                             odeint::array_algebra>;
    auto stepper = odeint::make_controlled(config.abs_tol, config.rel_tol, Dopri());
    double t = times.front();
    double dt = config.dt;
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double target = times[i];
        while (target - t > 1e-12) {
            double trial = std::min(dt, target - t);
            const bool clipped = trial < dt;
            const odeint::controlled_step_result result = stepper.try_step(system, x, t, trial);
            if (result == odeint::success) {
                if (!clipped) dt = trial;
            } else {
                dt = trial;
                if (dt < config.min_dt) {
                    throw IntegrationError("adaptive integrator step underflow at t = " +
                                           std::to_string(t) + " ns (dt = " + std::to_string(dt) +
                                           " ns, tolerances " + std::to_string(config.abs_tol) +
                                           "/" + std::to_string(config.rel_tol) + ")");
                }
            }
        }
        t = target;
        record(x);
    }
}

}  // namespace

StateTrajectory evolve_state(const StateVector& psi0, const HamiltonianFn& h,
                             const TimeWindow& window, const IntegratorConfig& config) {
    config.validate();
    const std::vector<double> times = sample_times(window, config.sample_every);
    StateTrajectory traj;
    traj.times = times;
    traj.states.reserve(times.size());

    State<3> x{};
    for (int k = 0; k < 3; ++k) x[static_cast<std::size_t>(k)] = psi0.amplitudes()[k];

    auto system = [&h](const State<3>& in, State<3>& out, double t) {
        Eigen::Map<const Vec3> psi(in.data());
        Eigen::Map<Vec3> dpsi(out.data());
        dpsi.noalias() = -kI * (h(t) * psi);
    };
    propagate<3>(system, x, times, config,
                 [&traj](const State<3>& s) { traj.states.emplace_back(s[0], s[1], s[2]); });
    return traj;
}

DensityTrajectory evolve_density(const DensityMatrix& rho0, const HamiltonianFn& h,
                                 const LindbladSpec& lindblad, const TimeWindow& window,
                                 const IntegratorConfig& config) {
    config.validate();
    const std::vector<double> times = sample_times(window, config.sample_every);
    DensityTrajectory traj;
    traj.times = times;
    traj.rho.reserve(times.size());

    // Precomputed jump terms: rate A, A^+, and the anticommutator sum.
    struct Jump {
        Mat3 a;
        Mat3 ad;
    };
    std::vector<Jump> jumps;
    Mat3 anti = Mat3::Zero();
    for (const CollapseOperator& c : lindblad.collapse) {
        if (c.rate <= 0.0) continue;
        jumps.push_back({std::sqrt(c.rate) * c.op, std::sqrt(c.rate) * c.op.adjoint()});
        anti += 0.5 * c.rate * c.op.adjoint() * c.op;
    }

    State<9> x{};
    Eigen::Map<Mat3>(x.data()) = rho0.matrix();

    auto system = [&](const State<9>& in, State<9>& out, double t) {
        Eigen::Map<const Mat3> rho(in.data());
        Eigen::Map<Mat3> drho(out.data());
        // -i (H - i K) rho + h.c. collects the commutator and anticommutator terms.
        const Mat3 heff = h(t) - kI * anti;
        const Mat3 left = -kI * (heff * rho);
        drho = left + left.adjoint();
        for (const Jump& j : jumps) drho.noalias() += j.a * rho * j.ad;
    };
    propagate<9>(system, x, times, config,
                 [&traj](const State<9>& s) { traj.rho.push_back(Eigen::Map<const Mat3>(s.data())); });
    return traj;
}

DensityTrajectory to_density(const StateTrajectory& traj) {
    DensityTrajectory out;
    out.times = traj.times;
    out.rho.reserve(traj.states.size());
    for (const Vec3& v : traj.states) out.rho.push_back(v * v.adjoint());
    return out;
}

DensityDefects density_defects(const DensityTrajectory& traj) {
    DensityDefects d;
    for (const Mat3& rho : traj.rho) {
        d.trace = std::max(d.trace, std::abs(rho.trace() - 1.0));
        d.hermiticity = std::max(d.hermiticity, hermiticity_defect(rho));
        const Mat3 herm = 0.5 * (rho + rho.adjoint());
        Eigen::SelfAdjointEigenSolver<Mat3> es(herm, Eigen::EigenvaluesOnly);
        d.min_eigenvalue = std::min(d.min_eigenvalue, es.eigenvalues().minCoeff());
    }
    return d;
}

PopulationTrace populations(const DensityTrajectory& traj) {
    PopulationTrace p;
    p.times = traj.times;
    for (const Mat3& rho : traj.rho) {
        p.p0.push_back(rho(0, 0).real());
        p.p1.push_back(rho(1, 1).real());
        p.p2.push_back(rho(2, 2).real());
    }
    return p;
}

void write_trajectory_csv(std::ostream& out, const DensityTrajectory& traj) {
    out << "# sastirap trajectory v1\n";
    out << "t_ns,p0,p1,p2,re_rho01,im_rho01,re_rho02,im_rho02,re_rho12,im_rho12\n";
    char line[320];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const Mat3& r = traj.rho[i];
        std::snprintf(line, sizeof line,
                      "%.6f,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      traj.times[i], r(0, 0).real(), r(1, 1).real(), r(2, 2).real(),
                      r(0, 1).real(), r(0, 1).imag(), r(0, 2).real(), r(0, 2).imag(),
                      r(1, 2).real(), r(1, 2).imag());
        out << line;
    }
}

}  // namespace sastirap
