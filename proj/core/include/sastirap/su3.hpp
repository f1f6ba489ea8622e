#pragma once

// Three-level state space: operator basis, physical parameters, state containers.
//
// Units used throughout the library: time in ns, angular frequency in rad/ns,
// rates in 1/ns, hbar = 1.

#include <array>
#include <complex>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

namespace sastirap {

using cplx = std::complex<double>;
using Mat3 = Eigen::Matrix3cd;
using Vec3 = Eigen::Vector3cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// Linear frequency in MHz to angular frequency in rad/ns.
constexpr double mhz_to_angular(double f_mhz) { return kTwoPi * f_mhz * 1e-3; }
// Angular frequency in rad/ns to linear frequency in MHz.
constexpr double angular_to_mhz(double w) { return w / kTwoPi * 1e3; }

// Wraps an angle into (-pi, pi].
double wrap_phase(double phase);

// Unordered level pair k < l.
struct LevelPair {
    int k = 0;
    int l = 1;

    friend bool operator==(const LevelPair&, const LevelPair&) = default;
};

inline constexpr LevelPair kPair01{0, 1};
inline constexpr LevelPair kPair12{1, 2};
inline constexpr LevelPair kPair02{0, 2};

// Throws std::invalid_argument unless 0 <= k < l <= 2.
void validate_pair(LevelPair pair);

// Index of a pair in the canonical order (0,1), (1,2), (0,2).
int pair_index(LevelPair pair);

// How the quoted relaxation/dephasing numbers map to rates in 1/ns.
enum class RateConvention {
    Plain,    // value in MHz is a rate in 1/us: Gamma = value * 1e-3 / ns
    Angular,  // value in MHz is Gamma/(2 pi): Gamma = 2 pi value * 1e-3 / ns
};

// Transition frequencies and decoherence rates of the ladder.
class QutritParams {
public:
    QutritParams(double omega01, double omega12, double gamma10, double gamma21,
                 double gamma_phi = 0.0);

    // Build from user units (MHz linear frequencies, MHz rates).
    static QutritParams from_mhz(double f01_mhz, double f12_mhz, double gamma10_mhz,
                                 double gamma21_mhz, double gamma_phi_mhz = 0.0,
                                 RateConvention convention = RateConvention::Plain);

    // Transmon device used in the loop-driving experiment (7.381 / 7.099 GHz,
    // Gamma10 = 5 MHz, Gamma21 = 7 MHz as plain rates).
    static QutritParams transmon_default();

    double omega01() const { return omega01_; }
    double omega12() const { return omega12_; }
    double gamma10() const { return gamma10_; }
    double gamma21() const { return gamma21_; }
    double gamma_phi() const { return gamma_phi_; }

    // Detuning of the two-photon tone from either transition, (omega01 - omega12)/2.
    double delta() const { return 0.5 * (omega01_ - omega12_); }
    double omega02() const { return omega01_ + omega12_; }

    QutritParams without_dissipation() const {
        return QutritParams(omega01_, omega12_, 0.0, 0.0, 0.0);
    }

private:
    double omega01_;
    double omega12_;
    double gamma10_;
    double gamma21_;
    double gamma_phi_;
};

// Symmetric and antisymmetric Gell-Mann matrices for the three level pairs.
struct GellMann {
    std::array<Mat3, 3> symmetric;      // indexed by pair_index
    std::array<Mat3, 3> antisymmetric;  // indexed by pair_index

    const Mat3& s(LevelPair pair) const { return symmetric[pair_index(pair)]; }
    const Mat3& a(LevelPair pair) const { return antisymmetric[pair_index(pair)]; }
};

// Lambda^s_kl = |k><l| + |l><k|, Lambda^a_kl = -i|k><l| + i|l><k|.
GellMann build_gellmann();

// Shared, lazily built basis.
const GellMann& gellmann();

// cos(phase) Lambda^s_kl - sin(phase) Lambda^a_kl; its (k,l) entry is e^{i phase}.
Mat3 pair_rotation(double phase, LevelPair pair);

// Normalized complex 3-vector.
class StateVector {
public:
    // Normalizes the input; throws std::invalid_argument for a zero vector.
    explicit StateVector(const Vec3& amplitudes);

    static StateVector basis(int level);

    const Vec3& amplitudes() const { return amplitudes_; }
    double population(int level) const { return std::norm(amplitudes_[level]); }

private:
    Vec3 amplitudes_;
};

// 3x3 Hermitian, unit-trace, positive semidefinite operator.
class DensityMatrix {
public:
    // Validates hermiticity (1e-12), trace (1e-10) and eigenvalues (>= -1e-9).
    explicit DensityMatrix(const Mat3& rho);

    static DensityMatrix from_state(const StateVector& psi);
    static DensityMatrix basis(int level);

    const Mat3& matrix() const { return rho_; }
    double population(int level) const { return rho_(level, level).real(); }
    double purity() const { return (rho_ * rho_).trace().real(); }

private:
    struct Unchecked {};
    DensityMatrix(const Mat3& rho, Unchecked) : rho_(rho) {}

    Mat3 rho_;
};

// Largest entry of |M - M^dagger|.
double hermiticity_defect(const Mat3& m);

}  // namespace sastirap
