#include "sastirap/su3.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sastirap {

double wrap_phase(double phase) {
    double r = std::remainder(phase, kTwoPi);  // [-pi, pi]
    if (r <= -kPi) r += kTwoPi;
    return r;
}

void validate_pair(LevelPair pair) {
    if (pair.k < 0 || pair.l > 2 || pair.k >= pair.l) {
        throw std::invalid_argument("invalid level pair (" + std::to_string(pair.k) + "," +
                                    std::to_string(pair.l) + "); need 0 <= k < l <= 2");
    }
}

int pair_index(LevelPair pair) {
    validate_pair(pair);
    if (pair == kPair01) return 0;
    if (pair == kPair12) return 1;
    return 2;
}

QutritParams::QutritParams(double omega01, double omega12, double gamma10, double gamma21,
                           double gamma_phi)
    : omega01_(omega01),
      omega12_(omega12),
      gamma10_(gamma10),
      gamma21_(gamma21),
      gamma_phi_(gamma_phi) {
    if (!(omega12 > 0.0) || !(omega01 > omega12)) {
        throw std::invalid_argument("QutritParams: need omega01 > omega12 > 0");
    }
    if (gamma10 < 0.0 || gamma21 < 0.0 || gamma_phi < 0.0) {
        throw std::invalid_argument("QutritParams: rates must be non-negative");
    }
}

QutritParams QutritParams::from_mhz(double f01_mhz, double f12_mhz, double gamma10_mhz,
                                    double gamma21_mhz, double gamma_phi_mhz,
                                    RateConvention convention) {
    const double rate_scale = convention == RateConvention::Plain ? 1e-3 : kTwoPi * 1e-3;
    return QutritParams(mhz_to_angular(f01_mhz), mhz_to_angular(f12_mhz),
                        gamma10_mhz * rate_scale, gamma21_mhz * rate_scale,
                        gamma_phi_mhz * rate_scale);
}

QutritParams QutritParams::transmon_default() {
    return from_mhz(7381.0, 7099.0, 5.0, 7.0, 0.0, RateConvention::Plain);
}

GellMann build_gellmann() {
    GellMann g;
    for (LevelPair p : {kPair01, kPair12, kPair02}) {
        Mat3 s = Mat3::Zero();
        Mat3 a = Mat3::Zero();
        s(p.k, p.l) = 1.0;
        s(p.l, p.k) = 1.0;
        a(p.k, p.l) = -kI;
        a(p.l, p.k) = kI;
        g.symmetric[pair_index(p)] = s;
        g.antisymmetric[pair_index(p)] = a;
    }
    return g;
}

const GellMann& gellmann() {
    static const GellMann basis = build_gellmann();
    return basis;
}

Mat3 pair_rotation(double phase, LevelPair pair) {
    const GellMann& g = gellmann();
    return std::cos(phase) * g.s(pair) - std::sin(phase) * g.a(pair);
}

StateVector::StateVector(const Vec3& amplitudes) : amplitudes_(amplitudes) {
    const double n = amplitudes_.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw std::invalid_argument("StateVector: cannot normalize zero or non-finite vector");
    }
    amplitudes_ /= n;
}

StateVector StateVector::basis(int level) {
    if (level < 0 || level > 2) throw std::invalid_argument("basis level must be 0, 1 or 2");
    Vec3 v = Vec3::Zero();
    v[level] = 1.0;
    return StateVector(v);
}

double hermiticity_defect(const Mat3& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(const Mat3& rho) : rho_(rho) {
    if (hermiticity_defect(rho) > 1e-12) {
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    }
    if (std::abs(rho.trace() - 1.0) > 1e-10) {
        throw std::invalid_argument("DensityMatrix: trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::from_state(const StateVector& psi) {
    const Vec3& v = psi.amplitudes();
    return DensityMatrix(Mat3(v * v.adjoint()), Unchecked{});
}

DensityMatrix DensityMatrix::basis(int level) {
    return from_state(StateVector::basis(level));
}

}  // namespace sastirap

namespace sastirap {

const char* version() { return SASTIRAP_VERSION; }

}  // namespace sastirap
