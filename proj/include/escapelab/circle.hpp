#ifndef ESCAPELAB_CIRCLE_HPP
#define ESCAPELAB_CIRCLE_HPP

#include <algorithm>
#include <complex>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "escapelab/arith.hpp"
#include "escapelab/errors.hpp"
#include "escapelab/seq.hpp"

namespace escapelab::circle {

using seqcore::ResidueIterator;
using seqcore::ResidueStream;
using seqcore::SequenceSpec;

// A point lambda = e^{2 pi i theta} on the unit circle. theta is always held
// exactly: as the user's rational p/q, or as the dyadic rational equal to the
// given double. Only the `rational` flavor qualifies for exact evaluation of
// the full sup over k.
class UnimodularPoint {
public:
    static UnimodularPoint rational(BigInt p, BigInt q) {
        if (q < 1) throw UsageError("rational point needs q >= 1");
        BigRat t = make_rat(mod_floor(p, q), q);
        return UnimodularPoint(frac_part(t), true);
    }
    static UnimodularPoint rational(const BigRat& theta) { return UnimodularPoint(frac_part(theta), true); }
    static UnimodularPoint from_theta(double theta) {
        if (!std::isfinite(theta) || theta < 0.0 || theta >= 1.0)
            throw UsageError("float theta must lie in [0, 1)");
        return UnimodularPoint(rat_of_double(theta), false);
    }

    bool is_rational() const { return rational_; }
    const BigRat& ratio() const { return theta_; }
    const BigInt& p() const { return theta_.get_num(); }
    const BigInt& q() const { return theta_.get_den(); }
    double theta() const { return theta_.get_d(); }
    std::complex<double> lambda() const {
        const double t = theta();
        return {std::cos(2 * M_PI * t), std::sin(2 * M_PI * t)};
    }
    bool is_one() const { return theta_ == 0; }

    std::string to_string() const {
        if (rational_) return escapelab::to_string(theta_);
        return std::to_string(theta());
    }

private:
    UnimodularPoint(BigRat theta, bool rational) : theta_(std::move(theta)), rational_(rational) {}
    BigRat theta_;   // exact, in [0, 1)
    bool rational_;
};

enum class DevExactness { ExactAlgebraic, Truncated };

// value = sup_k |lambda^{n_k} - 1| over the checked range of k; when exact,
// value = 2 sin(pi s / q) for the recorded (s, q).
struct DeviationResult {
    double value = 0.0;
    std::optional<std::size_t> argmax_k;
    DevExactness exactness = DevExactness::Truncated;
    std::size_t truncation_K = 0;
    std::optional<std::pair<BigInt, BigInt>> algebraic;
};

namespace detail {

// Larger deviation term == smaller |2s - q|.
inline BigInt folded_metric(const BigInt& s, const BigInt& q) { return abs(2 * s - q); }

struct ExactMax {
    BigInt s;
    std::size_t index = 0;
};

// Scan every residue the stream visits (preperiod then one cycle pass) and
// return the first index maximizing 2 sin(pi * (r*p mod q) / q).
inline ExactMax exact_max_scan(const ResidueStream& st, const BigInt& p) {
    ExactMax best;
    bool have = false;
    BigInt best_metric;
    std::size_t k = 0;
    auto visit = [&](const BigInt& r) {
        BigInt s = mod_floor(r * p, st.modulus);
        BigInt m = folded_metric(s, st.modulus);
        if (!have || m < best_metric) {
            best = {s, k};
            best_metric = m;
            have = true;
        }
        ++k;
    };
    for (const auto& r : st.preperiod) visit(r);
    for (const auto& r : st.cycle) visit(r);
    if (!have) throw Error("internal", "empty residue stream");
    return best;
}

// True iff the exact deviation of p/q is < bound (full orbit). Bails out as
// soon as one term reaches the bound.
inline bool exact_deviation_below(const ResidueStream& st, const BigInt& p, double bound) {
    std::size_t k = 0;
    auto ok = [&](const BigInt& r) {
        BigInt s = mod_floor(r * p, st.modulus);
        double term = two_sin_pi(make_rat(s, st.modulus));
        ++k;
        return term < bound;
    };
    for (const auto& r : st.preperiod)
        if (!ok(r)) return false;
    for (const auto& r : st.cycle)
        if (!ok(r)) return false;
    return true;
}

// Exact three-way comparison of the full deviation against sqrt(2):
// 2 sin(pi s/q) vs sqrt(2)  <=>  4*min(s, q-s) vs q.
inline int cmp_deviation_sqrt2(const ResidueStream& st, const BigInt& p) {
    ExactMax m = exact_max_scan(st, p);
    BigInt folded = st.modulus - m.s;
    if (m.s < folded) folded = m.s;
    return cmp(BigInt(4 * folded), st.modulus);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// deviation

inline DeviationResult exact_deviation(const UnimodularPoint& point, const SequenceSpec& spec,
                                       std::size_t state_cap = seqcore::kDefaultStateCap) {
    if (!point.is_rational()) throw UsageError("exact_deviation needs a rational point");
    ResidueStream st = seqcore::residues(spec, point.q(), state_cap);
    if (!st.exact)
        throw InexactTail("residue stream for modulus " + point.q().get_str() +
                          " is truncated; fall back to deviation()");
    detail::ExactMax m = detail::exact_max_scan(st, point.p());
    DeviationResult out;
    out.value = two_sin_pi(make_rat(m.s, st.modulus));
    out.argmax_k = m.index;
    out.exactness = DevExactness::ExactAlgebraic;
    out.algebraic = std::make_pair(m.s, st.modulus);
    return out;
}

inline DeviationResult deviation(const UnimodularPoint& point, const SequenceSpec& spec, std::size_t K,
                                 std::size_t state_cap = seqcore::kDefaultStateCap) {
    // Rational fast path: once the residue orbit is fully known and fits below
    // K, the truncated max equals the exact sup. The probe cap keeps huge
    // moduli from paying the full cycle-detection budget before falling back.
    if (point.is_rational()) {
        try {
            const std::size_t probe_cap = std::min(state_cap, K + 66);
            ResidueStream st = seqcore::residues(spec, point.q(), probe_cap);
            if (st.exact && st.coverage() <= K + 1) {
                detail::ExactMax m = detail::exact_max_scan(st, point.p());
                DeviationResult out;
                out.value = two_sin_pi(make_rat(m.s, st.modulus));
                out.argmax_k = m.index;
                out.exactness = DevExactness::ExactAlgebraic;
                out.algebraic = std::make_pair(m.s, st.modulus);
                return out;
            }
        } catch (const InexactTail&) {
        }
    }
    const BigInt& q = point.q();
    const BigInt& p = point.p();
    ResidueIterator it(spec, q);
    DeviationResult out;
    out.exactness = DevExactness::Truncated;
    std::size_t used = 0;
    for (std::size_t k = 0; k <= K && it.has_next(); ++k, ++used) {
        BigInt s = mod_floor(it.next() * p, q);
        double term = two_sin_pi(make_rat(s, q));
        if (!out.argmax_k || term > out.value) {
            out.value = term;
            out.argmax_k = k;
        }
    }
    out.truncation_K = used == 0 ? 0 : used - 1;
    if (!out.argmax_k) throw UsageError("deviation: no terms available");
    return out;
}

// ---------------------------------------------------------------------------
// certified lower bounds

struct LowerBoundOptions {
    double theta0 = 1e-3;
    std::size_t K = 48;
    std::size_t budget = 10000;  // branch-and-bound node evaluations
};

struct LowerBoundResult {
    std::optional<double> global;      // analytic 2 sin(pi/(c+1)) when quotients are bounded
    std::optional<BigRat> quotient_c;  // certified quotient bound behind it
    double region_value = 0.0;         // certified inf of f_K over [theta0, 1/2]
    double theta0 = 0.0;
    std::size_t region_K = 0;
    std::size_t nodes = 0;
    bool converged = false;
    bool region_computed = false;

    double value() const { return global ? *global : region_value; }
    bool is_global() const { return global.has_value(); }
};

namespace detail {

// Certified lower range bound of theta |-> 2|sin(pi n theta)| on [lo, hi].
// The argument interval [n*lo, n*hi] is computed exactly; on a span without an
// integer the term is minimized at an endpoint (single interior maximum).
inline double term_low(const BigInt& n, const BigRat& lo, const BigRat& width) {
    BigRat u_lo = BigRat(n) * lo;
    BigRat w = BigRat(n) * width;
    if (w >= 1) return 0.0;
    BigRat fa = frac_part(u_lo);
    if (fa == 0) return 0.0;
    BigRat fb = fa + w;
    if (fb >= 1) return 0.0;
    return std::min(two_sin_pi(fa), two_sin_pi(fb));
}

struct BBNode {
    BigRat lo, hi;
    double lb;
};
struct BBNodeWorse {
    bool operator()(const BBNode& a, const BBNode& b) const { return a.lb > b.lb; }
};

struct BBOutcome {
    double certified = 0.0;
    double sampled_min = 2.0;
    std::size_t nodes = 0;
    bool converged = false;
};

inline BBOutcome branch_and_bound_inf(const std::vector<BigInt>& terms, const BigRat& lo0, const BigRat& hi0,
                                      std::size_t budget) {
    constexpr double kSlack = 1e-12;
    auto node_lb = [&](const BigRat& lo, const BigRat& width) {
        double best = 0.0;
        for (const auto& n : terms) best = std::max(best, term_low(n, lo, width));
        return best;
    };
    auto f_at = [&](const BigRat& theta) {
        double best = 0.0;
        for (const auto& n : terms) best = std::max(best, two_sin_pi(frac_part(BigRat(n) * theta)));
        return best;
    };
    BBOutcome out;
    std::priority_queue<BBNode, std::vector<BBNode>, BBNodeWorse> heap;
    heap.push({lo0, hi0, node_lb(lo0, hi0 - lo0)});
    out.sampled_min = f_at((lo0 + hi0) / 2);
    while (out.nodes < budget && !heap.empty()) {
        BBNode node = heap.top();
        if (node.lb >= out.sampled_min - kSlack) {
            out.converged = true;
            break;
        }
        heap.pop();
        ++out.nodes;
        BigRat mid = (node.lo + node.hi) / 2;
        mid.canonicalize();
        out.sampled_min = std::min(out.sampled_min, f_at(mid));
        heap.push({node.lo, mid, node_lb(node.lo, mid - node.lo)});
        heap.push({mid, node.hi, node_lb(mid, node.hi - mid)});
    }
    out.certified = heap.empty() ? out.sampled_min : heap.top().lb;
    out.certified = std::max(0.0, out.certified - kSlack);
    return out;
}

inline std::size_t bb_term_cap(const SequenceSpec& spec, std::size_t K) {
    const SequenceSpec* root = &spec;
    while (root->family() == seqcore::Family::Patch) root = &root->base();
    if (root->family() == seqcore::Family::DoubleExp) K = std::min<std::size_t>(K, 16);
    if (auto len = spec.length_limit()) K = std::min(K, *len - 1);
    return K;
}

}  // namespace detail

inline LowerBoundResult jamison_lower_bound(const SequenceSpec& spec, const LowerBoundOptions& opt = {}) {
    if (!(opt.theta0 > 0.0 && opt.theta0 <= 0.5)) throw UsageError("theta0 must lie in (0, 1/2]");
    LowerBoundResult out;
    out.theta0 = opt.theta0;
    seqcore::QuotientReport quot = seqcore::quotient_bound(spec);
    if (quot.bound && quot.certificate == seqcore::QuotientCertificate::ExactForFamily) {
        out.quotient_c = quot.bound;
        BigRat x = BigRat(1) / (*quot.bound + 1);
        x.canonicalize();
        out.global = two_sin_pi(x);
        return out;
    }
    // No family-wide quotient certificate: certify an infimum over the
    // requested region [theta0, 1/2] by interval branch-and-bound. This does
    // NOT bound the Jamison constant below (witnesses may live in (0, theta0)).
    std::size_t K = detail::bb_term_cap(spec, opt.K);
    std::vector<BigInt> terms = seqcore::generate(spec, K);
    detail::BBOutcome bb =
        detail::branch_and_bound_inf(terms, frac_part(rat_of_double(opt.theta0)), BigRat(1, 2), opt.budget);
    out.region_computed = true;
    out.region_value = bb.certified;
    out.region_K = K;
    out.nodes = bb.nodes;
    out.converged = bb.converged;
    if (!(out.region_value > 0.0))
        throw NoCertificate("branch-and-bound budget exhausted without a positive regional bound");
    return out;
}

// Default truncation for float-theta scans: the smallest K with
// n_K >= 1/((c+1) theta0) when the quotient bound c is certified, else a flat
// fallback of 64.
inline std::size_t suggested_truncation(const SequenceSpec& spec, double theta0 = 1e-3) {
    if (!(theta0 > 0 && theta0 <= 0.5)) throw UsageError("theta0 must lie in (0, 1/2]");
    seqcore::QuotientReport quot = seqcore::quotient_bound(spec);
    if (!quot.bound || quot.certificate != seqcore::QuotientCertificate::ExactForFamily) return 64;
    BigRat threshold = BigRat(1) / ((*quot.bound + 1) * rat_of_double(theta0));
    threshold.canonicalize();
    std::size_t hi = 1;
    while (hi < 1'000'000) {
        if (BigRat(seqcore::generate(spec, hi).back()) >= threshold) break;
        hi *= 2;
    }
    if (hi >= 1'000'000) return 64;
    std::vector<BigInt> terms = seqcore::generate(spec, hi);
    for (std::size_t k = 0; k < terms.size(); ++k)
        if (BigRat(terms[k]) >= threshold) return k;
    return hi;
}

// ---------------------------------------------------------------------------
// witness enumeration (shared by upper bounds, pair checks, lambda sets)

struct WitnessEnumOptions {
    unsigned long Q = 64;                 // generic denominator range 2..Q
    std::size_t factorial_N_max = 8;      // family pattern 1/N!
    std::size_t doubleexp_m_max = 4;      // family pattern 2^-(2^m)
    std::size_t state_cap = seqcore::kDefaultStateCap;
};

namespace detail {

inline seqcore::Family root_family(const SequenceSpec& spec) {
    const SequenceSpec* s = &spec;
    while (s->family() == seqcore::Family::Patch) s = &s->base();
    return s->family();
}

// Deterministic candidate order: reduced p/q with q ascending (p ascending
// within q), then family-specific witness moduli, ascending. The callback
// receives the point plus the exact residue stream of its denominator and
// returns true to stop the enumeration.
template <typename F>
void for_each_witness(const SequenceSpec& spec, const WitnessEnumOptions& opt, F&& f) {
    for (unsigned long q = 2; q <= opt.Q; ++q) {
        ResidueStream st = seqcore::residues(spec, BigInt(q), opt.state_cap);
        if (!st.exact) continue;
        for (unsigned long p = 1; p < q; ++p) {
            BigInt g;
            mpz_gcd_ui(g.get_mpz_t(), BigInt(q).get_mpz_t(), p);
            if (g != 1) continue;
            if (f(UnimodularPoint::rational(BigInt(p), BigInt(q)), st)) return;
        }
    }
    const seqcore::Family fam = root_family(spec);
    if (fam == seqcore::Family::Factorial) {
        for (std::size_t N = 2; N <= opt.factorial_N_max; ++N) {
            BigInt q = big_factorial(static_cast<unsigned long>(N));
            if (q <= opt.Q) continue;  // already covered by the generic scan
            ResidueStream st = seqcore::residues(spec, q, opt.state_cap);
            if (!st.exact) continue;
            if (f(UnimodularPoint::rational(BigInt(1), q), st)) return;
        }
    } else if (fam == seqcore::Family::DoubleExp) {
        for (std::size_t m = 1; m <= opt.doubleexp_m_max; ++m) {
            BigInt q = big_pow2(1ul << m);  // 2^(2^m)
            if (q <= opt.Q) continue;
            ResidueStream st = seqcore::residues(spec, q, opt.state_cap);
            if (!st.exact) continue;
            if (f(UnimodularPoint::rational(BigInt(1), q), st)) return;
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// upper bounds

struct UpperBoundResult {
    double value = 2.0;
    UnimodularPoint witness = UnimodularPoint::rational(BigInt(1), BigInt(2));
    bool attains = false;
    bool unverified_tail = false;
    std::optional<std::pair<BigInt, BigInt>> algebraic;
    std::size_t candidates = 0;
};

inline UpperBoundResult jamison_upper_bound(const SequenceSpec& spec, const WitnessEnumOptions& opt = {}) {
    if (opt.Q < 2) throw UsageError("upper bound scan needs Q >= 2");
    UpperBoundResult best;
    bool have = false;
    detail::for_each_witness(spec, opt, [&](const UnimodularPoint& point, const ResidueStream& st) {
        ++best.candidates;
        detail::ExactMax m = detail::exact_max_scan(st, point.p());
        double value = two_sin_pi(make_rat(m.s, st.modulus));
        if (!have || value < best.value - 1e-15) {
            best.value = value;
            best.witness = point;
            best.algebraic = std::make_pair(m.s, st.modulus);
            have = true;
        }
        return false;
    });
    if (spec.rule_based()) {
        best.attains = have;  // the sup is realized on the finite residue orbit
    } else {
        // Prefix of an unknown sequence: evaluate truncated deviations instead.
        std::size_t len = spec.length_limit().value_or(1);
        for (unsigned long q = 2; q <= opt.Q; ++q) {
            for (unsigned long p = 1; p < q; ++p) {
                BigInt g;
                mpz_gcd_ui(g.get_mpz_t(), BigInt(q).get_mpz_t(), p);
                if (g != 1) continue;
                ++best.candidates;
                DeviationResult d = deviation(UnimodularPoint::rational(BigInt(p), BigInt(q)), spec, len - 1);
                if (!have || d.value < best.value - 1e-15) {
                    best.value = d.value;
                    best.witness = UnimodularPoint::rational(BigInt(p), BigInt(q));
                    best.algebraic.reset();
                    have = true;
                }
            }
        }
        best.attains = false;
        best.unverified_tail = true;
    }
    return best;
}

// ---------------------------------------------------------------------------
// the combined estimate

enum class LowerRegion { Global, ThetaAtLeast };

struct JamisonEstimate {
    double lower_bound = 0.0;
    LowerRegion lower_region = LowerRegion::Global;
    double upper_bound = 2.0;
    UnimodularPoint witness = UnimodularPoint::rational(BigInt(1), BigInt(2));
    bool witness_attains = false;
    std::size_t truncation_K = 0;  // nonzero when prefix semantics forced truncation
    std::optional<std::pair<BigInt, BigInt>> upper_algebraic;
    LowerBoundResult lower_detail;
    UpperBoundResult upper_detail;
};

struct ConstantOptions {
    LowerBoundOptions lower;
    WitnessEnumOptions upper;
};

inline JamisonEstimate jamison_constant(const SequenceSpec& spec, ConstantOptions opt = {}) {
    // Make sure the generic scan reaches the sharp witness 1/(c+1) of
    // bounded-quotient families.
    seqcore::QuotientReport quot = seqcore::quotient_bound(spec);
    if (quot.bound && quot.certificate == seqcore::QuotientCertificate::ExactForFamily) {
        BigInt ceil_c = floor_of(*quot.bound) + (quot.bound->get_den() == 1 ? 0 : 1);
        if (ceil_c < 4096 && opt.upper.Q < ceil_c.get_ui() + 2)
            opt.upper.Q = static_cast<unsigned long>(ceil_c.get_ui() + 2);
    }
    JamisonEstimate est;
    try {
        est.lower_detail = jamison_lower_bound(spec, opt.lower);
    } catch (const NoCertificate&) {
        est.lower_detail = LowerBoundResult{};
        est.lower_detail.theta0 = opt.lower.theta0;
    }
    est.upper_detail = jamison_upper_bound(spec, opt.upper);
    // Only a global certificate bounds the constant from below; a regional
    // branch-and-bound value is reported but does not enter the bracket.
    est.lower_bound = est.lower_detail.is_global() ? est.lower_detail.value() : 0.0;
    est.lower_region = LowerRegion::Global;
    est.upper_bound = est.upper_detail.value;
    est.witness = est.upper_detail.witness;
    est.witness_attains = est.upper_detail.attains;
    est.upper_algebraic = est.upper_detail.algebraic;
    if (est.upper_detail.unverified_tail) {
        std::size_t len = spec.length_limit().value_or(1);
        est.truncation_K = len - 1;
    }
    if (est.lower_bound > est.upper_bound + 1e-12)
        throw Error("internal", "lower bound exceeds upper bound; certificate logic is broken");
    return est;
}

// ---------------------------------------------------------------------------
// pair decisions

enum class PairVerdict { CertifiedYes, CertifiedNo, Unknown };

inline const char* to_string(PairVerdict v) {
    switch (v) {
        case PairVerdict::CertifiedYes: return "certified_yes";
        case PairVerdict::CertifiedNo: return "certified_no";
        case PairVerdict::Unknown: return "unknown";
    }
    return "?";
}

struct PairOptions {
    WitnessEnumOptions enumeration{.Q = 64, .factorial_N_max = 2000, .doubleexp_m_max = 7};
    // Tolerance for matching a user-typed epsilon against an exactly attained
    // algebraic deviation in strict mode.
    double attain_tol = 1e-6;
};

struct PairResult {
    PairVerdict verdict = PairVerdict::Unknown;
    bool strict = false;
    double epsilon = 0.0;
    std::optional<UnimodularPoint> witness;
    std::optional<double> witness_value;
    std::optional<std::pair<BigInt, BigInt>> witness_algebraic;
    std::optional<double> certificate_lb;
    bool witness_attains_epsilon = false;
    unsigned long Q_searched = 0;
    std::string note;
};

inline PairResult pair_check(const SequenceSpec& spec, double epsilon, bool strict, const PairOptions& opt = {}) {
    if (!(epsilon > 0.0 && epsilon <= 2.0)) throw UsageError("epsilon must lie in (0, 2]");
    constexpr double kGuard = 1e-12;
    PairResult out;
    out.strict = strict;
    out.epsilon = epsilon;
    out.Q_searched = opt.enumeration.Q;

    seqcore::QuotientReport quot = seqcore::quotient_bound(spec);
    if (quot.bound && quot.certificate == seqcore::QuotientCertificate::ExactForFamily) {
        BigRat x = BigRat(1) / (*quot.bound + 1);
        x.canonicalize();
        double lb = two_sin_pi(x);
        out.certificate_lb = lb;
        const bool yes = strict ? lb > epsilon + opt.attain_tol : lb >= epsilon - kGuard;
        if (yes) {
            out.verdict = PairVerdict::CertifiedYes;
            out.note = "analytic bounded-quotient certificate";
            return out;
        }
    }
    detail::for_each_witness(spec, opt.enumeration, [&](const UnimodularPoint& point, const ResidueStream& st) {
        if (detail::exact_deviation_below(st, point.p(), epsilon - kGuard)) {
            detail::ExactMax m = detail::exact_max_scan(st, point.p());
            out.verdict = PairVerdict::CertifiedNo;
            out.witness = point;
            out.witness_value = two_sin_pi(make_rat(m.s, st.modulus));
            out.witness_algebraic = std::make_pair(m.s, st.modulus);
            return true;
        }
        if (strict) {
            detail::ExactMax m = detail::exact_max_scan(st, point.p());
            double value = two_sin_pi(make_rat(m.s, st.modulus));
            if (std::abs(value - epsilon) <= opt.attain_tol) {
                out.verdict = PairVerdict::CertifiedNo;
                out.witness = point;
                out.witness_value = value;
                out.witness_algebraic = std::make_pair(m.s, st.modulus);
                out.witness_attains_epsilon = true;
                out.note = "witness attains epsilon (within attain tolerance " + std::to_string(opt.attain_tol) + ")";
                return true;
            }
        }
        return false;
    });
    if (out.verdict == PairVerdict::Unknown)
        out.note = "no certificate: searched reduced rationals with q <= " + std::to_string(opt.enumeration.Q) +
                   " plus family witness patterns";
    return out;
}

// Exact decision for the sqrt(2) pairs of the positivity characterizations;
// every comparison here is integer arithmetic.
struct Sqrt2PairResult {
    PairVerdict verdict = PairVerdict::Unknown;
    bool strict = false;
    std::optional<UnimodularPoint> witness;
    bool witness_attains = false;  // witness deviation == sqrt(2) exactly
};

inline Sqrt2PairResult pair_check_sqrt2(const SequenceSpec& spec, bool strict, const WitnessEnumOptions& opt = {}) {
    Sqrt2PairResult out;
    out.strict = strict;
    seqcore::QuotientReport quot = seqcore::quotient_bound(spec);
    if (quot.bound && quot.certificate == seqcore::QuotientCertificate::ExactForFamily) {
        // 2 sin(pi/(c+1)) >= sqrt(2) iff c <= 3; strictly above iff c < 3.
        int c_vs_3 = cmp(*quot.bound, BigRat(3));
        if ((strict && c_vs_3 < 0) || (!strict && c_vs_3 <= 0)) {
            out.verdict = PairVerdict::CertifiedYes;
            return out;
        }
    }
    detail::for_each_witness(spec, opt, [&](const UnimodularPoint& point, const ResidueStream& st) {
        int c = detail::cmp_deviation_sqrt2(st, point.p());
        if (c < 0 || (strict && c == 0)) {
            out.verdict = PairVerdict::CertifiedNo;
            out.witness = point;
            out.witness_attains = (c == 0);
            return true;
        }
        return false;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Lambda_eps exploration

struct LambdaMember {
    UnimodularPoint point;
    DeviationResult deviation;
};

struct LambdaSetResult {
    double epsilon = 0.0;
    BigInt Q;
    std::vector<LambdaMember> members;  // includes theta = 0 first
    std::size_t nontrivial_count = 0;
    unsigned long generic_q_max = 0;
};

inline LambdaSetResult lambda_set(const SequenceSpec& spec, double epsilon, const BigInt& Q,
                                  WitnessEnumOptions opt = {}) {
    // Deviations never exceed 2, so epsilon > 2 simply keeps every point.
    if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
    if (Q < 2) throw UsageError("lambda_set needs Q >= 2");
    LambdaSetResult out;
    out.epsilon = epsilon;
    out.Q = Q;
    // Generic denominators up to min(Q, cap); family patterns up to Q itself.
    constexpr unsigned long kGenericCap = 2048;
    unsigned long generic_q =
        mpz_fits_ulong_p(Q.get_mpz_t()) ? std::min<unsigned long>(Q.get_ui(), kGenericCap) : kGenericCap;
    out.generic_q_max = generic_q;
    opt.Q = generic_q;
    // Family patterns range over every modulus up to Q (within fixed caps).
    std::size_t nmax = 2;
    while (nmax < 256 && big_factorial(static_cast<unsigned long>(nmax) + 1) <= Q) ++nmax;
    opt.factorial_N_max = nmax;
    std::size_t mmax = 1;
    while (mmax < 7 && big_pow2(1ul << (mmax + 1)) <= Q) ++mmax;
    opt.doubleexp_m_max = mmax;

    DeviationResult trivial;
    trivial.exactness = DevExactness::ExactAlgebraic;
    trivial.argmax_k = 0;
    trivial.algebraic = std::make_pair(BigInt(0), BigInt(1));
    out.members.push_back({UnimodularPoint::rational(BigInt(0), BigInt(1)), trivial});

    detail::for_each_witness(spec, opt, [&](const UnimodularPoint& point, const ResidueStream& st) {
        if (detail::exact_deviation_below(st, point.p(), epsilon)) {
            detail::ExactMax m = detail::exact_max_scan(st, point.p());
            DeviationResult d;
            d.value = two_sin_pi(make_rat(m.s, st.modulus));
            d.argmax_k = m.index;
            d.exactness = DevExactness::ExactAlgebraic;
            d.algebraic = std::make_pair(m.s, st.modulus);
            out.members.push_back({point, d});
            ++out.nontrivial_count;
        }
        return false;
    });
    return out;
}

// ---------------------------------------------------------------------------
// eta-density modulo 1

struct EtaDensityResult {
    bool eta_dense = false;
    double gap_lo = 0.0;  // maximal empty gap (gap_hi may exceed 1: wraparound)
    double gap_hi = 0.0;
    std::size_t points_used = 0;
    bool exact_orbit = false;
};

inline EtaDensityResult eta_density_scan(const UnimodularPoint& point, const SequenceSpec& spec, std::size_t K,
                                         double eta, std::size_t state_cap = seqcore::kDefaultStateCap) {
    if (!(eta > 0.0 && eta < 1.0)) throw UsageError("eta must lie in (0, 1)");
    std::vector<double> orbit;
    EtaDensityResult out;
    const BigInt& q = point.q();
    const BigInt& p = point.p();
    // Use the full exact orbit when it is known to repeat within range.
    if (point.is_rational()) {
        ResidueStream st = seqcore::residues(spec, q, state_cap);
        if (st.exact && st.coverage() <= K + 1) {
            for (const auto& r : st.preperiod) orbit.push_back(make_rat(mod_floor(r * p, q), q).get_d());
            for (const auto& r : st.cycle) orbit.push_back(make_rat(mod_floor(r * p, q), q).get_d());
            out.exact_orbit = true;
        }
    }
    if (orbit.empty()) {
        ResidueIterator it(spec, q);
        for (std::size_t k = 0; k <= K && it.has_next(); ++k)
            orbit.push_back(make_rat(mod_floor(it.next() * p, q), q).get_d());
    }
    std::sort(orbit.begin(), orbit.end());
    orbit.erase(std::unique(orbit.begin(), orbit.end()), orbit.end());
    out.points_used = orbit.size();
    double max_gap = 0.0;
    for (std::size_t i = 0; i < orbit.size(); ++i) {
        double lo = orbit[i];
        double hi = i + 1 < orbit.size() ? orbit[i + 1] : orbit.front() + 1.0;
        if (hi - lo > max_gap) {
            max_gap = hi - lo;
            out.gap_lo = lo;
            out.gap_hi = hi;
        }
    }
    out.eta_dense = max_gap <= eta;
    return out;
}

}  // namespace escapelab::circle

#endif
