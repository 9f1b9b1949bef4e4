#ifndef ESCAPELAB_MAT_HPP
#define ESCAPELAB_MAT_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "escapelab/arith.hpp"
#include "escapelab/errors.hpp"
#include "escapelab/seq.hpp"

namespace escapelab::matops {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline CMat identity_like(const CMat& A) { return CMat::Identity(A.rows(), A.cols()); }

// Largest singular value (spectral norm).
inline double op_norm(const CMat& A) {
    if (A.rows() == 1 && A.cols() == 1) return std::abs(A(0, 0));
    return A.jacobiSvd().singularValues()(0);
}

struct Spectrum {
    CVec values;                            // with multiplicity
    bool diagonalizable = false;            // eigenvector condition below threshold
    double eigenvector_condition = std::numeric_limits<double>::infinity();
};

inline constexpr double kDiagCondThreshold = 1e8;

inline Spectrum eig(const CMat& A, Eigen::MatrixXcd* vectors = nullptr) {
    if (A.rows() != A.cols()) throw UsageError("eig needs a square matrix");
    Eigen::ComplexEigenSolver<CMat> solver(A, true);
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("complex eigensolver did not converge");
    Spectrum sp;
    sp.values = solver.eigenvalues();
    const CMat& V = solver.eigenvectors();
    auto sv = V.jacobiSvd().singularValues();
    double smin = sv(sv.size() - 1);
    sp.eigenvector_condition = smin > 0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    sp.diagonalizable = sp.eigenvector_condition <= kDiagCondThreshold;
    if (vectors) *vectors = V;
    return sp;
}

struct HermitianPart {
    CMat H;
    double min_eig = 0.0;
    double max_eig = 0.0;
};

inline HermitianPart hermitian_part(const CMat& A) {
    HermitianPart out;
    out.H = (A + A.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMat> solver(out.H);
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("Hermitian eigensolver did not converge");
    out.min_eig = solver.eigenvalues()(0);
    out.max_eig = solver.eigenvalues()(solver.eigenvalues().size() - 1);
    return out;
}

// ---------------------------------------------------------------------------
// numerical range boundary via support half-planes

// Sector {r e^{i t} : r >= 0, |t| <= half_opening} around the positive reals.
struct SectorSpec {
    double half_opening = M_PI;

    bool contains(Complex z, double tol = 0.0) const { return distance(z) <= tol; }

    double distance(Complex z) const {
        const double r = std::abs(z);
        if (r == 0.0) return 0.0;
        const double beta = std::abs(std::arg(z));
        if (beta <= half_opening) return 0.0;
        const double delta = beta - half_opening;
        return delta >= M_PI / 2 ? r : r * std::sin(delta);
    }
};

struct NumericalRangeBoundary {
    std::size_t angles = 0;
    std::vector<Complex> points;    // boundary samples <Av, v>, one per angle
    std::vector<double> support;    // max eig of Re(e^{i phi_j} A)

    // Soundness direction: if the support half-planes leave no room on the
    // ray {-t : t >= clearance}, then W(A) itself excludes it.
    bool excludes_negative_reals(double clearance) const {
        double t_lo = clearance, t_hi = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < angles; ++j) {
            const double c = std::cos(2 * M_PI * static_cast<double>(j) / static_cast<double>(angles));
            if (c > 1e-14) {
                t_lo = std::max(t_lo, -support[j] / c);
            } else if (c < -1e-14) {
                t_hi = std::min(t_hi, support[j] / (-c));
            } else if (support[j] < 0) {
                return true;  // half-plane already misses the whole real axis side
            }
        }
        return t_lo > t_hi;
    }

    // Max distance of the sampled boundary points from the sector; interior
    // points are covered by convexity.
    double max_sector_distance(const SectorSpec& sector) const {
        double worst = 0.0;
        for (const Complex& z : points) worst = std::max(worst, sector.distance(z));
        return worst;
    }

    double max_abs() const {
        double m = 0.0;
        for (const Complex& z : points) m = std::max(m, std::abs(z));
        return m;
    }
};

inline NumericalRangeBoundary numerical_range(const CMat& A, std::size_t M = 1024) {
    if (M < 8) throw UsageError("numerical_range needs at least 8 angles");
    NumericalRangeBoundary out;
    out.angles = M;
    out.points.reserve(M);
    out.support.reserve(M);
    for (std::size_t j = 0; j < M; ++j) {
        const double phi = 2 * M_PI * static_cast<double>(j) / static_cast<double>(M);
        const Complex rot(std::cos(phi), std::sin(phi));
        CMat B = rot * A;
        CMat H = (B + B.adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<CMat> solver(H);
        if (solver.info() != Eigen::Success) throw ConvergenceFailure("numerical range eigensolver failed");
        const auto n = solver.eigenvalues().size();
        out.support.push_back(solver.eigenvalues()(n - 1));
        CVec v = solver.eigenvectors().col(n - 1);
        out.points.push_back((v.adjoint() * A * v)(0, 0));
    }
    return out;
}

// ---------------------------------------------------------------------------
// principal logarithm and m-th root

namespace detail {

inline bool spectrum_touches_cut(const Spectrum& sp, bool include_zero) {
    for (Eigen::Index i = 0; i < sp.values.size(); ++i) {
        const Complex z = sp.values(i);
        const double tol = 1e-12 * (1.0 + std::abs(z));
        if (std::abs(z.imag()) <= tol && z.real() < tol && (include_zero || z.real() < -tol)) return true;
    }
    return false;
}

// log(I + B) = sum (-1)^{j-1} B^j / j, truncated at j_max.
inline CMat log_series(const CMat& B, std::size_t j_max) {
    CMat term = B;
    CMat acc = B;
    for (std::size_t j = 2; j <= j_max; ++j) {
        term = term * B;
        const double tn = term.norm();
        acc += (j % 2 == 0 ? -1.0 : 1.0) / static_cast<double>(j) * term;
        if (tn / static_cast<double>(j) < 1e-18 * std::max(1.0, acc.norm())) break;
    }
    return acc;
}

}  // namespace detail

inline CMat principal_log(const CMat& A) {
    CMat V;
    Spectrum sp = eig(A, &V);
    if (detail::spectrum_touches_cut(sp, /*include_zero=*/true))
        throw SpectrumOnCut("principal_log needs the spectrum off (-inf, 0]");
    if (sp.diagonalizable) {
        CVec logs(sp.values.size());
        for (Eigen::Index i = 0; i < sp.values.size(); ++i) logs(i) = std::log(sp.values(i));
        return V * logs.asDiagonal() * V.inverse();
    }
    const CMat B = A - identity_like(A);
    const double nb = op_norm(B);
    const auto d = static_cast<std::size_t>(A.rows());
    // Unipotent case: (A - I)^d vanishes and the series is a polynomial.
    CMat Bd = B;
    for (std::size_t i = 1; i < d; ++i) Bd = Bd * B;
    if (op_norm(Bd) <= 1e-9 * std::pow(std::max(1.0, nb), static_cast<double>(d)))
        return detail::log_series(B, d > 1 ? d - 1 : 1);
    if (nb < 1.0) return detail::log_series(B, 100000);
    throw NotDiagonalizable("principal_log: matrix is defective and outside the series disc");
}

inline CMat principal_root(const CMat& A, unsigned m) {
    if (m < 2) throw UsageError("principal_root needs m >= 2");
    CMat V;
    Spectrum sp = eig(A, &V);
    if (detail::spectrum_touches_cut(sp, /*include_zero=*/false))
        throw SpectrumOnCut("principal_root needs the spectrum off the negative reals");
    if (!sp.diagonalizable)
        throw NotDiagonalizable("principal_root is restricted to diagonalizable matrices (eigenvector condition " +
                                std::to_string(sp.eigenvector_condition) + ")");
    CVec roots(sp.values.size());
    for (Eigen::Index i = 0; i < sp.values.size(); ++i) {
        const Complex z = sp.values(i);
        roots(i) = z == Complex(0, 0) ? Complex(0, 0)
                                      : std::polar(std::pow(std::abs(z), 1.0 / m), std::arg(z) / m);
    }
    return V * roots.asDiagonal() * V.inverse();
}

// ---------------------------------------------------------------------------
// matrix exponential: scaling and squaring with the degree-13 Pade approximant

inline CMat expm(const CMat& G, double t = 1.0) {
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
                               129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
                               1323241920.0,        40840800.0,          960960.0,           16380.0,
                               182.0,               1.0};
    const CMat I = identity_like(G);
    CMat A = t * G;
    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    const double theta13 = 5.371920351148152;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        A /= std::pow(2.0, squarings);
    }
    const CMat A2 = A * A;
    const CMat A4 = A2 * A2;
    const CMat A6 = A4 * A2;
    CMat U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    CMat Vp = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
    CMat R = (Vp - U).partialPivLu().solve(Vp + U);
    for (int s = 0; s < squarings; ++s) R = R * R;
    return R;
}

// ---------------------------------------------------------------------------
// powers along a sequence

// A^n by binary powering over the bits of n; nullopt on overflow past 1e300.
inline std::optional<CMat> mat_pow(const CMat& A, const BigInt& n) {
    if (n < 0) throw UsageError("mat_pow needs n >= 0");
    const CMat I = identity_like(A);
    if (n == 0) return I;
    const std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
    CMat R = A;
    for (std::size_t i = bits - 1; i-- > 0;) {
        R = R * R;
        if (mpz_tstbit(n.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) R = R * A;
        if (!R.allFinite() || R.norm() > 1e300) return std::nullopt;
    }
    if (!R.allFinite() || R.norm() > 1e300) return std::nullopt;
    return R;
}

struct PowerDeviation {
    double sup = 0.0;
    std::optional<std::size_t> argmax_k;
    std::vector<double> per_k;  // +inf marks overflow at that k
    bool overflow = false;
};

inline PowerDeviation power_deviation(const CMat& A, const seqcore::SequenceSpec& spec, std::size_t K) {
    PowerDeviation out;
    std::vector<BigInt> terms = seqcore::generate(spec, K);
    const CMat I = identity_like(A);
    for (std::size_t k = 0; k < terms.size(); ++k) {
        std::optional<CMat> P = mat_pow(A, terms[k]);
        double v;
        if (!P) {
            v = std::numeric_limits<double>::infinity();
            out.overflow = true;
        } else {
            v = op_norm(*P - I);
        }
        out.per_k.push_back(v);
        if (!out.argmax_k || v > out.sup) out.sup = v;
        if (!out.argmax_k) out.argmax_k = k;
    }
    // First index attaining the max, with slack for rounding-induced ties.
    const double cut =
        std::isinf(out.sup) ? out.sup : out.sup - 1e-12 * (1.0 + std::abs(out.sup));
    for (std::size_t k = 0; k < out.per_k.size(); ++k) {
        if (out.per_k[k] >= cut) {
            out.argmax_k = k;
            break;
        }
    }
    return out;
}

}  // namespace escapelab::matops

#endif
