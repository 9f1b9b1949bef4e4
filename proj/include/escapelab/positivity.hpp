#ifndef ESCAPELAB_POSITIVITY_HPP
#define ESCAPELAB_POSITIVITY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "escapelab/arith.hpp"
#include "escapelab/circle.hpp"
#include "escapelab/errors.hpp"
#include "escapelab/mat.hpp"
#include "escapelab/seq.hpp"

namespace escapelab::positivity {

using matops::CMat;
using seqcore::SequenceSpec;

enum class AccretiveVerdict { AllStrictlyAccretive, AllAccretive, FailsAt };

inline const char* to_string(AccretiveVerdict v) {
    switch (v) {
        case AccretiveVerdict::AllStrictlyAccretive: return "all_strictly_accretive";
        case AccretiveVerdict::AllAccretive: return "all_accretive";
        case AccretiveVerdict::FailsAt: return "fails_at";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// scalar scans: exact over the full orbit for rational angles

struct PolarScalar {
    double modulus = 1.0;
    circle::UnimodularPoint angle = circle::UnimodularPoint::rational(BigInt(0), BigInt(1));

    static PolarScalar from_complex(std::complex<double> c) {
        PolarScalar s;
        s.modulus = std::abs(c);
        double t = std::arg(c) / (2 * M_PI);
        if (t < 0) t += 1.0;
        if (t >= 1.0) t = 0.0;
        s.angle = circle::UnimodularPoint::from_theta(t);
        return s;
    }
};

struct ScalarAccretiveResult {
    bool strict = false;
    AccretiveVerdict verdict = AccretiveVerdict::AllStrictlyAccretive;
    std::optional<std::size_t> fails_at;
    // min over visited phases of cos(2 pi s / q); exactly 0.0 when a residue
    // sits on the quarter boundary.
    double margin = 1.0;
    bool exact = false;
    std::size_t coverage = 0;
};

// Re c^{n_k} has the sign of cos(2 pi n_k theta); for theta = p/q that is an
// integer test on s = n_k p mod q: accretive iff 4s <= q or 4s >= 3q.
inline ScalarAccretiveResult scalar_accretive_scan(const PolarScalar& c, const SequenceSpec& spec, bool strict,
                                                   std::size_t K = 64) {
    ScalarAccretiveResult out;
    out.strict = strict;
    if (c.modulus == 0.0) {
        // 0^{n_k} = 0: accretive, never strictly.
        out.exact = true;
        out.coverage = 1;
        out.margin = 0.0;
        out.verdict = strict ? AccretiveVerdict::FailsAt : AccretiveVerdict::AllAccretive;
        if (strict) out.fails_at = 0;
        return out;
    }
    const BigInt& q = c.angle.q();
    const BigInt& p = c.angle.p();
    bool boundary = false;
    std::optional<std::size_t> first_nonstrict_fail, first_strict_fail;
    double min_cos = 1.0;
    std::size_t k = 0;
    auto visit = [&](const BigInt& r) {
        BigInt s = mod_floor(r * p, q);
        const int lo = cmp(4 * s, q);      // 4s vs q
        const int hi = cmp(4 * s, 3 * q);  // 4s vs 3q
        const bool on_boundary = lo == 0 || hi == 0;
        const bool inside_bad = lo > 0 && hi < 0;  // cos < 0
        if (on_boundary) {
            boundary = true;
            min_cos = std::min(min_cos, 0.0);
            if (!first_strict_fail) first_strict_fail = k;
        } else {
            min_cos = std::min(min_cos, std::cos(2 * M_PI * make_rat(s, q).get_d()));
            if (inside_bad) {
                if (!first_nonstrict_fail) first_nonstrict_fail = k;
                if (!first_strict_fail) first_strict_fail = k;
            }
        }
        ++k;
    };
    if (c.angle.is_rational()) {
        seqcore::ResidueStream st = seqcore::residues(spec, q);
        for (const auto& r : st.preperiod) visit(r);
        for (const auto& r : st.cycle) visit(r);
        out.exact = st.exact;
        out.coverage = k;
    } else {
        seqcore::ResidueIterator it(spec, q);
        for (std::size_t i = 0; i <= K && it.has_next(); ++i) visit(it.next());
        out.exact = false;
        out.coverage = k;
    }
    out.margin = min_cos;
    const auto fail = strict ? first_strict_fail : first_nonstrict_fail;
    if (fail) {
        out.verdict = AccretiveVerdict::FailsAt;
        out.fails_at = fail;
    } else {
        out.verdict = boundary ? AccretiveVerdict::AllAccretive : AccretiveVerdict::AllStrictlyAccretive;
    }
    return out;
}

// ---------------------------------------------------------------------------
// matrix scans

struct AccretivePerK {
    std::size_t k = 0;
    std::string n_k;
    double min_eig = 0.0;
};

struct MatrixAccretiveResult {
    bool strict = false;
    double tol = 0.0;
    AccretiveVerdict verdict = AccretiveVerdict::AllStrictlyAccretive;
    std::optional<std::size_t> fails_at;
    double margin = 0.0;  // min over k of the smallest eigenvalue of Re A^{n_k}
    std::vector<AccretivePerK> per_k;
    bool overflow = false;
};

inline MatrixAccretiveResult matrix_accretive_scan(const CMat& A, const SequenceSpec& spec, std::size_t K,
                                                   double tol, bool strict) {
    if (tol < 0) throw UsageError("tolerance must be nonnegative");
    MatrixAccretiveResult out;
    out.strict = strict;
    out.tol = tol;
    std::vector<BigInt> terms = seqcore::generate(spec, K);
    bool first = true;
    bool any_below_strict = false;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        std::optional<CMat> P = matops::mat_pow(A, terms[k]);
        if (!P) {
            out.overflow = true;
            out.verdict = AccretiveVerdict::FailsAt;
            out.fails_at = k;
            out.per_k.push_back({k, terms[k].get_str(), -std::numeric_limits<double>::infinity()});
            return out;
        }
        const double m = matops::hermitian_part(*P).min_eig;
        out.per_k.push_back({k, terms[k].get_str(), m});
        out.margin = first ? m : std::min(out.margin, m);
        first = false;
        const double pass_line = strict ? tol : -tol;
        if (m < pass_line) {
            out.verdict = AccretiveVerdict::FailsAt;
            out.fails_at = k;
            return out;
        }
        if (m < tol) any_below_strict = true;
    }
    out.verdict = any_below_strict ? AccretiveVerdict::AllAccretive : AccretiveVerdict::AllStrictlyAccretive;
    return out;
}

// ---------------------------------------------------------------------------
// positivity

enum class PositivityVerdict { Positive, PositiveInvertible, NotPositive };

inline const char* to_string(PositivityVerdict v) {
    switch (v) {
        case PositivityVerdict::Positive: return "positive";
        case PositivityVerdict::PositiveInvertible: return "positive_invertible";
        case PositivityVerdict::NotPositive: return "not_positive";
    }
    return "?";
}

struct PositivityResult {
    PositivityVerdict verdict = PositivityVerdict::NotPositive;
    double min_eig = 0.0;
    double max_eig = 0.0;
    double hermiticity_defect = 0.0;  // ||A - A*||
    std::string reason;
};

inline PositivityResult positivity_check(const CMat& A, double tol = 1e-9) {
    if (tol < 0) throw UsageError("tolerance must be nonnegative");
    PositivityResult out;
    out.hermiticity_defect = matops::op_norm(A - CMat(A.adjoint()));
    const double scale = matops::op_norm(A);
    matops::HermitianPart h = matops::hermitian_part(A);
    out.min_eig = h.min_eig;
    out.max_eig = h.max_eig;
    if (out.hermiticity_defect > tol * scale) {
        out.reason = "not Hermitian within tolerance";
        return out;
    }
    if (out.min_eig >= tol) {
        out.verdict = PositivityVerdict::PositiveInvertible;
    } else if (out.min_eig >= -tol) {
        out.verdict = PositivityVerdict::Positive;
    } else {
        out.reason = "negative eigenvalue " + std::to_string(out.min_eig);
    }
    return out;
}

// ---------------------------------------------------------------------------
// accretive powers vs positivity, cross-referenced with the circle condition
//
// Strict scan (Re A^{n_k} > 0) pairs with the plain sqrt(2) Jamison pair;
// the non-strict scan pairs with the strict circle condition.

enum class CrossCheckVerdict {
    ConsistentPositive,
    ExpectedCounterexample,
    HypothesisFails,
    TheoremViolation,
    InconclusiveCertificate
};

inline const char* to_string(CrossCheckVerdict v) {
    switch (v) {
        case CrossCheckVerdict::ConsistentPositive: return "consistent_positive";
        case CrossCheckVerdict::ExpectedCounterexample: return "expected_counterexample";
        case CrossCheckVerdict::HypothesisFails: return "hypothesis_fails";
        case CrossCheckVerdict::TheoremViolation: return "theorem_violation";
        case CrossCheckVerdict::InconclusiveCertificate: return "inconclusive_certificate";
    }
    return "?";
}

struct CrossCheckResult {
    CrossCheckVerdict verdict = CrossCheckVerdict::InconclusiveCertificate;
    bool strict = false;
    MatrixAccretiveResult scan;
    PositivityResult positivity;
    circle::PairVerdict circle_verdict = circle::PairVerdict::Unknown;
    bool circle_strict_mode = false;
    std::optional<circle::UnimodularPoint> circle_witness;
};

inline CrossCheckResult positivity_cross_check(const CMat& A, const SequenceSpec& spec, std::size_t K, double tol,
                                               bool strict) {
    if (K < 1) throw UsageError("cross check needs K >= 1");
    CrossCheckResult out;
    out.strict = strict;
    out.scan = matrix_accretive_scan(A, spec, K, tol, strict);
    out.positivity = positivity_check(A, tol);
    out.circle_strict_mode = !strict;
    circle::Sqrt2PairResult pair = circle::pair_check_sqrt2(spec, out.circle_strict_mode);
    out.circle_verdict = pair.verdict;
    out.circle_witness = pair.witness;
    if (out.scan.verdict == AccretiveVerdict::FailsAt) {
        out.verdict = CrossCheckVerdict::HypothesisFails;
        return out;
    }
    const bool pos_ok = strict ? out.positivity.verdict == PositivityVerdict::PositiveInvertible
                               : out.positivity.verdict != PositivityVerdict::NotPositive;
    switch (pair.verdict) {
        case circle::PairVerdict::CertifiedYes:
            out.verdict = pos_ok ? CrossCheckVerdict::ConsistentPositive : CrossCheckVerdict::TheoremViolation;
            break;
        case circle::PairVerdict::CertifiedNo:
            out.verdict = pos_ok ? CrossCheckVerdict::ConsistentPositive : CrossCheckVerdict::ExpectedCounterexample;
            break;
        case circle::PairVerdict::Unknown:
            out.verdict = CrossCheckVerdict::InconclusiveCertificate;
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// sectorial m-th roots

enum class SectorRootStage { Verified, NegativeRealInRange, NotDiagonalizable, RootResidual, SectorContainment };

inline const char* to_string(SectorRootStage s) {
    switch (s) {
        case SectorRootStage::Verified: return "verified";
        case SectorRootStage::NegativeRealInRange: return "negative_real_in_range";
        case SectorRootStage::NotDiagonalizable: return "not_diagonalizable";
        case SectorRootStage::RootResidual: return "root_residual";
        case SectorRootStage::SectorContainment: return "sector_containment";
    }
    return "?";
}

struct SectorRootOptions {
    std::size_t angles = 1024;
    double residual_tol = 1e-8;   // ||S^m - A|| <= residual_tol * ||A||
    double sector_tol = 1e-6;     // sector inflated by this distance
    double negative_tol = 1e-9;   // clearance for the negative-real exclusion
};

struct SectorRootResult {
    SectorRootStage stage = SectorRootStage::Verified;
    unsigned m = 2;
    std::optional<CMat> root;
    double residual = 0.0;
    double max_sector_distance = 0.0;
    double half_opening = 0.0;
    std::string detail;
};

inline SectorRootResult sector_root_check(const CMat& A, unsigned m, const SectorRootOptions& opt = {}) {
    if (m < 2) throw UsageError("sector root check needs m >= 2");
    SectorRootResult out;
    out.m = m;
    out.half_opening = M_PI / m;
    const double scale = matops::op_norm(A);
    matops::NumericalRangeBoundary wa = matops::numerical_range(A, opt.angles);
    if (!wa.excludes_negative_reals(opt.negative_tol * std::max(1.0, scale))) {
        out.stage = SectorRootStage::NegativeRealInRange;
        out.detail = "numerical range support half-planes leave room on the negative real axis";
        return out;
    }
    CMat S;
    try {
        S = matops::principal_root(A, m);
    } catch (const NotDiagonalizable& e) {
        out.stage = SectorRootStage::NotDiagonalizable;
        out.detail = e.what();
        return out;
    } catch (const SpectrumOnCut& e) {
        out.stage = SectorRootStage::NegativeRealInRange;
        out.detail = e.what();
        return out;
    }
    out.root = S;
    std::optional<CMat> Sm = matops::mat_pow(S, BigInt(m));
    out.residual = Sm ? matops::op_norm(*Sm - A) : std::numeric_limits<double>::infinity();
    if (!(out.residual <= opt.residual_tol * std::max(scale, 1e-300))) {
        out.stage = SectorRootStage::RootResidual;
        return out;
    }
    matops::NumericalRangeBoundary ws = matops::numerical_range(S, opt.angles);
    out.max_sector_distance = ws.max_sector_distance(matops::SectorSpec{out.half_opening});
    if (out.max_sector_distance > opt.sector_tol) {
        out.stage = SectorRootStage::SectorContainment;
        return out;
    }
    out.stage = SectorRootStage::Verified;
    return out;
}

// ---------------------------------------------------------------------------
// the unit-interval equivalence: sup_k ||A^{n_k} - I|| <= 1  <=>  0 <= A <= I

enum class EquivalenceVerdict { EquivalenceHolds, Violation, HypothesisNotCertified };

inline const char* to_string(EquivalenceVerdict v) {
    switch (v) {
        case EquivalenceVerdict::EquivalenceHolds: return "equivalence_holds";
        case EquivalenceVerdict::Violation: return "violation";
        case EquivalenceVerdict::HypothesisNotCertified: return "hypothesis_not_certified";
    }
    return "?";
}

struct EquivalenceResult {
    EquivalenceVerdict verdict = EquivalenceVerdict::HypothesisNotCertified;
    bool side_norm = false;      // sup_k ||A^{n_k} - I|| <= 1 + tol
    bool side_interval = false;  // 0 <= A <= I within tol
    bool norm_side_certified = false;  // false when a truncated scan backs a pass
    double norm_max = 0.0;
    std::optional<std::size_t> norm_fail_k;
    double spectral_radius = 0.0;
    PositivityResult positivity;
    double tol = 0.0;
    std::size_t K = 0;
};

inline EquivalenceResult unit_interval_equivalence(const CMat& A, const SequenceSpec& spec, std::size_t K,
                                                   double tol = 1e-9) {
    EquivalenceResult out;
    out.tol = tol;
    out.K = K;
    circle::Sqrt2PairResult hyp = circle::pair_check_sqrt2(spec, /*strict=*/true);
    if (hyp.verdict != circle::PairVerdict::CertifiedYes) {
        out.verdict = EquivalenceVerdict::HypothesisNotCertified;
        return out;
    }
    out.positivity = positivity_check(A, tol);
    out.side_interval =
        out.positivity.verdict != PositivityVerdict::NotPositive && out.positivity.max_eig <= 1.0 + tol;

    matops::Spectrum sp = matops::eig(A);
    for (Eigen::Index i = 0; i < sp.values.size(); ++i)
        out.spectral_radius = std::max(out.spectral_radius, std::abs(sp.values(i)));
    if (out.spectral_radius > 1.0 + tol) {
        // |lambda^{n_k} - 1| <= ||A^{n_k} - I|| diverges: the norm side fails
        // for certain, no truncation caveat.
        out.side_norm = false;
        out.norm_side_certified = true;
        matops::PowerDeviation dev = matops::power_deviation(A, spec, std::min<std::size_t>(K, 16));
        out.norm_max = dev.sup;
    } else {
        matops::PowerDeviation dev = matops::power_deviation(A, spec, K);
        out.norm_max = dev.sup;
        if (dev.sup > 1.0 + tol) {
            out.side_norm = false;
            out.norm_side_certified = true;
            out.norm_fail_k = dev.argmax_k;
        } else {
            out.side_norm = true;
            out.norm_side_certified = false;  // holds up to K only
        }
    }
    out.verdict =
        out.side_norm == out.side_interval ? EquivalenceVerdict::EquivalenceHolds : EquivalenceVerdict::Violation;
    return out;
}

}  // namespace escapelab::positivity

#endif
