#include "sastirap/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace sastirap {

Trace::Trace(double cadence_ns, Eigen::VectorXcd s) : cadence(cadence_ns), samples(std::move(s)) {
    if (!(cadence > 0.0)) throw std::invalid_argument("trace cadence must be > 0");
}

CalibrationSet::CalibrationSet(std::array<Trace, 3> t) : traces(std::move(t)) {
    for (const Trace& tr : traces) {
        if (tr.size() != traces[0].size() || tr.size() == 0) {
            throw std::invalid_argument("calibration traces must be non-empty and of equal length");
        }
        if (std::abs(tr.cadence - traces[0].cadence) > 1e-12 * traces[0].cadence) {
            throw std::invalid_argument("calibration traces must share one cadence");
        }
    }
}

void EpsilonMatrix::validate() const {
    for (double e : {eps01, eps12, eps02}) {
        if (!(e >= 0.0 && e < 1.0)) throw std::invalid_argument("epsilon entries must lie in [0, 1)");
    }
    if (!(eps02 + eps12 < 1.0)) throw std::invalid_argument("eps02 + eps12 must be < 1");
}

Trace make_trace(const TraceTemplate& tpl, double cadence_ns, int n_samples) {
    if (n_samples <= 0) throw std::invalid_argument("trace needs at least one sample");
    Eigen::VectorXcd s(n_samples);
    for (int k = 0; k < n_samples; ++k) {
        const double tau = k * cadence_ns;
        const double arg = kTwoPi * tpl.freq_mhz * 1e-3 * tau + tpl.phase;
        s[k] = tpl.amplitude * std::exp(-tau / tpl.decay_ns) * std::polar(1.0, arg) + tpl.offset;
    }
    return Trace(cadence_ns, std::move(s));
}

CalibrationSet make_calibration(const std::array<TraceTemplate, 3>& templates, double cadence_ns,
                                int n_samples) {
    return CalibrationSet({make_trace(templates[0], cadence_ns, n_samples),
                           make_trace(templates[1], cadence_ns, n_samples),
                           make_trace(templates[2], cadence_ns, n_samples)});
}

std::array<TraceTemplate, 3> default_templates() {
    // Cavity responses rotating in the IQ plane at different rates, so the
    // three columns are far from collinear.
    return {TraceTemplate{{1.0, 0.0}, 400.0, 0.0, 0.0, {0.1, 0.0}},
            TraceTemplate{{0.0, 1.0}, 300.0, 2.0, 0.6, {0.0, 0.1}},
            TraceTemplate{{-0.8, -0.4}, 250.0, -3.5, 1.9, {-0.05, 0.05}}};
}

Trace synthesize_measured_trace(const Eigen::Vector3d& p, const CalibrationSet& cal,
                                double noise_sigma, std::uint64_t seed) {
    if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-9) {
        throw std::invalid_argument("populations must be non-negative and sum to 1");
    }
    if (noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
    Eigen::VectorXcd s = p[0] * cal[0].samples + p[1] * cal[1].samples + p[2] * cal[2].samples;
    if (noise_sigma > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (Eigen::Index k = 0; k < s.size(); ++k) {
            const double i = noise(rng);
            const double q = noise(rng);
            s[k] += cplx(i, q);
        }
    }
    return Trace(cal.cadence(), std::move(s));
}

Eigen::Vector3d project_to_simplex(const Eigen::Vector3d& v) {
    std::array<double, 3> u{v[0], v[1], v[2]};
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (int j = 0; j < 3; ++j) {
        cumulative += u[static_cast<std::size_t>(j)];
        const double t = (cumulative - 1.0) / (j + 1);
        if (u[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
    }
    Eigen::Vector3d out = (v.array() - theta).max(0.0);
    // Feasible input comes back untouched.
    if ((v.array() >= 0.0).all() && std::abs(v.sum() - 1.0) < 1e-15) return v;
    return out;
}

Extraction extract_populations(const Trace& meas, const CalibrationSet& cal,
                               const ExtractOptions& options) {
    const Eigen::Index n = cal.size();
    if (meas.size() != n) throw std::invalid_argument("measured trace length differs from calibration");
    if (std::abs(meas.cadence - cal.cadence()) > 1e-12 * cal.cadence()) {
        throw std::invalid_argument("measured trace cadence differs from calibration");
    }
    Eigen::MatrixXd a(2 * n, 3);
    Eigen::VectorXd b(2 * n);
    for (int i = 0; i < 3; ++i) {
        a.col(i).head(n) = cal[i].samples.real();
        a.col(i).tail(n) = cal[i].samples.imag();
    }
    b.head(n) = meas.samples.real();
    b.tail(n) = meas.samples.imag();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double condition = sv[2] > 0.0 ? sv[0] / sv[2] : std::numeric_limits<double>::infinity();
    if (!(condition <= options.max_condition)) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "calibration traces are nearly collinear (condition number %.3g)",
                      condition);
        throw IllConditionedError(msg, condition);
    }
    Extraction out;
    out.condition = condition;
    out.p_raw = svd.solve(b);
    out.residual_rms = std::sqrt((a * out.p_raw - b).squaredNorm() / static_cast<double>(2 * n));
    out.p = options.project_simplex ? project_to_simplex(out.p_raw) : out.p_raw;
    return out;
}

CalibrationSet correct_calibration(const CalibrationSet& raw, const EpsilonMatrix& eps) {
    eps.validate();
    const double d1 = 1.0 - eps.eps01;
    const double d2 = 1.0 - eps.eps02 - eps.eps12;
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("epsilon correction denominator <= 0");
    const Eigen::VectorXcd& r0 = raw[0].samples;
    Eigen::VectorXcd r1 = (raw[1].samples - eps.eps01 * r0) / d1;
    Eigen::VectorXcd r2 = (raw[2].samples - eps.eps02 * r0 - eps.eps12 * r1) / d2;
    const double c = raw.cadence();
    return CalibrationSet({Trace(c, r0), Trace(c, std::move(r1)), Trace(c, std::move(r2))});
}

CalibrationSet contaminate_calibration(const CalibrationSet& ideal, const EpsilonMatrix& eps) {
    eps.validate();
    const Eigen::VectorXcd& r0 = ideal[0].samples;
    const Eigen::VectorXcd& r1 = ideal[1].samples;
    Eigen::VectorXcd m1 = eps.eps01 * r0 + (1.0 - eps.eps01) * r1;
    Eigen::VectorXcd m2 =
        eps.eps02 * r0 + eps.eps12 * r1 + (1.0 - eps.eps02 - eps.eps12) * ideal[2].samples;
    const double c = ideal.cadence();
    return CalibrationSet({Trace(c, r0), Trace(c, std::move(m1)), Trace(c, std::move(m2))});
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# sastirap trace v1\ntau_ns,I,Q\n";
    char line[128];
    for (Eigen::Index k = 0; k < trace.size(); ++k) {
        std::snprintf(line, sizeof line, "%.6f,%.17g,%.17g\n", static_cast<double>(k) * trace.cadence,
                      trace.samples[k].real(), trace.samples[k].imag());
        out << line;
    }
}

Trace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read trace file " + path.string());
    std::vector<double> tau;
    std::vector<cplx> s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.rfind("tau_ns", 0) == 0) continue;
        double t = 0.0;
        double i = 0.0;
        double q = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &i, &q) != 3) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected tau_ns,I,Q");
        }
        tau.push_back(t);
        s.emplace_back(i, q);
    }
    if (s.size() < 2) throw std::runtime_error(path.string() + ": need at least two samples");
    const double cadence = tau[1] - tau[0];
    for (std::size_t k = 1; k < tau.size(); ++k) {
        if (std::abs(tau[k] - tau[k - 1] - cadence) > 1e-6 * std::max(1.0, cadence)) {
            throw std::runtime_error(path.string() + ": samples are not uniformly spaced");
        }
    }
    return Trace(cadence, Eigen::Map<Eigen::VectorXcd>(s.data(), static_cast<Eigen::Index>(s.size())));
}

EpsilonMatrix read_epsilon_sidecar(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read epsilon file " + path.string());
    EpsilonMatrix eps;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw std::runtime_error(path.string() + ": expected key=value, got '" + line + "'");
            }
            continue;
        }
        std::string key = line.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
        const double value = std::stod(line.substr(eq + 1));
        if (key == "eps01") eps.eps01 = value;
        else if (key == "eps12") eps.eps12 = value;
        else if (key == "eps02") eps.eps02 = value;
        else throw std::runtime_error(path.string() + ": unknown key '" + key + "'");
    }
    eps.validate();
    return eps;
}

void write_epsilon_sidecar(const std::filesystem::path& path, const EpsilonMatrix& eps) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "eps01=" << eps.eps01 << "\neps12=" << eps.eps12 << "\neps02=" << eps.eps02 << '\n';
}

}  // namespace sastirap
