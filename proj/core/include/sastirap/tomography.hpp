#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sastirap/su3.hpp"

namespace sastirap {

// One readout trace r(tau), complex I + iQ.
struct Trace {
    double cadence = 1.0;  // ns
    Eigen::VectorXcd samples;

    Trace() = default;
    Trace(double cadence_ns, Eigen::VectorXcd s);
    Eigen::Index size() const { return samples.size(); }
};

// Calibration responses for |0>, |1>, |2>.
struct CalibrationSet {
    std::array<Trace, 3> traces;

    explicit CalibrationSet(std::array<Trace, 3> t);
    const Trace& operator[](int i) const { return traces[static_cast<std::size_t>(i)]; }
    Eigen::Index size() const { return traces[0].size(); }
    double cadence() const { return traces[0].cadence; }
};

struct EpsilonMatrix {
    double eps01 = 0.0;
    double eps12 = 0.0;
    double eps02 = 0.0;

    void validate() const;
    static EpsilonMatrix measured_default() { return {0.043, 0.05, 0.066}; }
};

class IllConditionedError : public std::runtime_error {
public:
    IllConditionedError(const std::string& what, double condition)
        : std::runtime_error(what), condition_number(condition) {}
    double condition_number;
};

// Decaying oscillation template: a * exp(-tau/decay) * exp(i(2 pi f tau + phase)) + offset.
struct TraceTemplate {
    cplx amplitude{1.0, 0.0};
    double decay_ns = 200.0;
    double freq_mhz = 0.0;
    double phase = 0.0;
    cplx offset{0.0, 0.0};
};

Trace make_trace(const TraceTemplate& tpl, double cadence_ns, int n_samples);
CalibrationSet make_calibration(const std::array<TraceTemplate, 3>& templates, double cadence_ns,
                                int n_samples);
// Well-separated default templates for synthetic studies.
std::array<TraceTemplate, 3> default_templates();

Trace synthesize_measured_trace(const Eigen::Vector3d& p, const CalibrationSet& cal, double noise_sigma = 0.0,
                                std::uint64_t seed = 0);

struct ExtractOptions {
    bool project_simplex = false;
    double max_condition = 1e8;
};

struct Extraction {
    Eigen::Vector3d p_raw;  // unconstrained least-squares solution
    Eigen::Vector3d p;      // reported (projected if requested)
    double condition = 0.0;
    double residual_rms = 0.0;
};

Extraction extract_populations(const Trace& meas, const CalibrationSet& cal,
                               const ExtractOptions& options = {});

// Euclidean projection onto {p >= 0, sum p = 1}.
Eigen::Vector3d project_to_simplex(const Eigen::Vector3d& v);

// Remove relaxation leakage from raw calibration traces, and the forward model that adds it.
CalibrationSet correct_calibration(const CalibrationSet& raw, const EpsilonMatrix& eps);
CalibrationSet contaminate_calibration(const CalibrationSet& ideal, const EpsilonMatrix& eps);

// CSV: "# sastirap trace v1" then tau_ns,I,Q.
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);
Trace read_trace_csv(const std::filesystem::path& path);
// key=value lines: eps01=..., eps12=..., eps02=...; '#' comments allowed.
EpsilonMatrix read_epsilon_sidecar(const std::filesystem::path& path);
void write_epsilon_sidecar(const std::filesystem::path& path, const EpsilonMatrix& eps);

}  // namespace sastirap
