#ifndef ESCAPELAB_ESCAPE_HPP
#define ESCAPELAB_ESCAPE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "escapelab/arith.hpp"
#include "escapelab/circle.hpp"
#include "escapelab/errors.hpp"
#include "escapelab/mat.hpp"
#include "escapelab/seq.hpp"

namespace escapelab::escape {

using matops::CMat;
using seqcore::SequenceSpec;

// Escape thresholds are strict (value > epsilon): a power sequence whose
// norms only approach the threshold in the limit (delta*I under rounding)
// stays trapped.
struct EscapeReport {
    bool escaped = false;
    std::size_t k = 0;          // first escape index
    double value = 0.0;         // measured value at escape
    std::size_t K = 0;          // scan horizon when trapped
    double max_value = 0.0;     // largest value seen when trapped
    double epsilon = 0.0;
    std::string spec_echo;
    std::vector<double> trace;  // per-k values
    std::string exactness = "per_k_float_norms";
    bool overflow = false;
    std::optional<std::string> warning;
    std::vector<double> projection_norms;  // torus runs: norms of the P_i
};

inline EscapeReport algebra_escape(const CMat& A, const SequenceSpec& spec, double epsilon, std::size_t K) {
    if (!(epsilon > 0)) throw UsageError("epsilon must be positive");
    EscapeReport rep;
    rep.epsilon = epsilon;
    rep.K = K;
    rep.spec_echo = spec.to_string();
    const CMat I = matops::identity_like(A);
    std::vector<BigInt> terms = seqcore::generate(spec, K);
    for (std::size_t k = 0; k < terms.size(); ++k) {
        std::optional<CMat> P = matops::mat_pow(A, terms[k]);
        double v = P ? matops::op_norm(*P - I) : std::numeric_limits<double>::infinity();
        rep.trace.push_back(v);
        rep.max_value = std::max(rep.max_value, v);
        if (!P) {
            rep.escaped = true;
            rep.overflow = true;
            rep.k = k;
            rep.value = v;
            return rep;
        }
        if (v > epsilon) {
            rep.escaped = true;
            rep.k = k;
            rep.value = v;
            return rep;
        }
    }
    // Trapped. If the pair (spec, eps') is certified with eps' <= epsilon and
    // A != I, theory says the powers cannot stay strictly below eps' forever.
    if (matops::op_norm(A - I) > 1e-14) {
        try {
            circle::LowerBoundResult lb = circle::jamison_lower_bound(spec);
            if (lb.is_global()) {
                const double nss_eps = std::min(lb.value(), 1.0);  // normed-algebra certificates cap at 1
                if (nss_eps <= epsilon) {
                    rep.warning = "A != I while (spec, " + std::to_string(nss_eps) +
                                  ") is a certified NSS pair: sup_k ||A^{n_k} - I|| must reach at least " +
                                  std::to_string(nss_eps) + "; observed max " + std::to_string(rep.max_value) +
                                  " up to K";
                }
            }
        } catch (const NoCertificate&) {
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// lattice quotients: exact rational nearest-point machinery

struct LatticeBasis {
    std::size_t ambient = 0;
    std::vector<std::vector<double>> vectors;  // r vectors of length `ambient`

    std::size_t rank() const { return vectors.size(); }

    static LatticeBasis standard(std::size_t n) {
        LatticeBasis b;
        b.ambient = n;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> e(n, 0.0);
            e[i] = 1.0;
            b.vectors.push_back(e);
        }
        return b;
    }
};

namespace detail {

using RatVec = std::vector<BigRat>;
using RatMat = std::vector<RatVec>;

inline RatVec solve_exact(RatMat A, RatVec b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && A[piv][col] == 0) ++piv;
        if (piv == n) throw InvalidSpec("lattice basis is singular");
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col || A[row][col] == 0) continue;
            BigRat f = A[row][col] / A[col][col];
            for (std::size_t j = col; j < n; ++j) A[row][j] -= f * A[col][j];
            b[row] -= f * b[col];
        }
    }
    RatVec x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = b[i] / A[i][i];
        x[i].canonicalize();
    }
    return x;
}

struct LatticeContext {
    std::size_t ambient = 0;
    std::size_t rank = 0;
    RatMat basis;  // ambient x rank, exact
    RatMat gram;   // rank x rank

    explicit LatticeContext(const LatticeBasis& b) {
        if (b.rank() > 4) throw RankTooLarge("lattice rank is limited to 4");
        if (b.rank() == 0 || b.ambient == 0) throw InvalidSpec("lattice basis must be nonempty");
        ambient = b.ambient;
        rank = b.rank();
        basis.assign(ambient, RatVec(rank, BigRat(0)));
        for (std::size_t j = 0; j < rank; ++j) {
            if (b.vectors[j].size() != ambient) throw InvalidSpec("basis vector dimension mismatch");
            for (std::size_t i = 0; i < ambient; ++i) basis[i][j] = rat_of_double(b.vectors[j][i]);
        }
        gram.assign(rank, RatVec(rank, BigRat(0)));
        for (std::size_t i = 0; i < rank; ++i)
            for (std::size_t j = 0; j < rank; ++j) {
                BigRat s = 0;
                for (std::size_t a = 0; a < ambient; ++a) s += basis[a][i] * basis[a][j];
                s.canonicalize();
                gram[i][j] = s;
            }
        // Conditioning gate (1e-10) on top of the exact singularity check.
        Eigen::MatrixXd Gd(rank, rank);
        for (std::size_t i = 0; i < rank; ++i)
            for (std::size_t j = 0; j < rank; ++j) Gd(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = gram[i][j].get_d();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gd);
        if (es.eigenvalues()(0) < 1e-10) throw InvalidSpec("lattice Gram matrix is singular to tolerance 1e-10");
    }

    // Least-squares coordinates of w in the basis (exact normal equations).
    RatVec coords(const RatVec& w) const {
        RatVec rhs(rank, BigRat(0));
        for (std::size_t j = 0; j < rank; ++j) {
            BigRat s = 0;
            for (std::size_t a = 0; a < ambient; ++a) s += basis[a][j] * w[a];
            s.canonicalize();
            rhs[j] = s;
        }
        return solve_exact(gram, rhs);
    }

    BigRat residual_norm2(const RatVec& w, const RatVec& beta) const {
        BigRat s = 0;
        for (std::size_t a = 0; a < ambient; ++a) {
            BigRat r = w[a];
            for (std::size_t j = 0; j < rank; ++j) r -= basis[a][j] * beta[j];
            s += r * r;
        }
        s.canonicalize();
        return s;
    }

    BigRat quad_form(const RatVec& delta) const {
        BigRat s = 0;
        for (std::size_t i = 0; i < rank; ++i)
            for (std::size_t j = 0; j < rank; ++j) s += delta[i] * gram[i][j] * delta[j];
        s.canonicalize();
        return s;
    }

    // Norms of the coordinate projections P_i : x -> alpha_i u_i (rank-one
    // operators u_i d_i^T with d the dual basis). Reported so users can judge
    // how small epsilon must be for coordinatewise conclusions.
    std::vector<double> projection_norms() const {
        std::vector<double> out(rank);
        for (std::size_t i = 0; i < rank; ++i) {
            RatVec e(rank, BigRat(0));
            e[i] = 1;
            RatVec coeff = solve_exact(gram, e);
            double dual2 = 0, u2 = 0;
            for (std::size_t a = 0; a < ambient; ++a) {
                double da = 0;
                for (std::size_t j = 0; j < rank; ++j) da += basis[a][j].get_d() * coeff[j].get_d();
                dual2 += da * da;
                u2 += basis[a][i].get_d() * basis[a][i].get_d();
            }
            out[i] = std::sqrt(dual2) * std::sqrt(u2);
        }
        return out;
    }

    // Babai rounding plus exhaustive offsets in {-2..2}^rank; exact distance^2
    // in the lattice span (perpendicular part handled by the caller).
    struct Nearest {
        BigRat dist2;
        std::vector<BigInt> lattice_coeffs;
    };
    Nearest nearest_in_span(const RatVec& beta) const {
        std::vector<BigInt> rounded(rank);
        RatVec frac(rank);
        for (std::size_t i = 0; i < rank; ++i) {
            rounded[i] = round_nearest(beta[i]);
            frac[i] = beta[i] - BigRat(rounded[i]);
            frac[i].canonicalize();
        }
        Nearest best;
        bool have = false;
        std::vector<long> off(rank, -2);
        while (true) {
            RatVec delta(rank);
            for (std::size_t i = 0; i < rank; ++i) {
                delta[i] = frac[i] - BigRat(off[i]);
                delta[i].canonicalize();
            }
            BigRat d2 = quad_form(delta);
            if (!have || d2 < best.dist2) {
                best.dist2 = d2;
                best.lattice_coeffs.resize(rank);
                for (std::size_t i = 0; i < rank; ++i) best.lattice_coeffs[i] = rounded[i] + off[i];
                have = true;
            }
            std::size_t i = 0;
            for (; i < rank; ++i) {
                if (off[i] < 2) {
                    ++off[i];
                    break;
                }
                off[i] = -2;
            }
            if (i == rank) break;
        }
        return best;
    }
};

inline RatVec exact_vector(const std::vector<double>& v) {
    RatVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = rat_of_double(v[i]);
    return out;
}

}  // namespace detail

struct LatticeDistance {
    double distance = 0.0;
    std::vector<double> nearest;  // nearest lattice point, ambient coordinates
};

inline LatticeDistance lattice_dist(const std::vector<double>& v, const LatticeBasis& basis) {
    detail::LatticeContext ctx(basis);
    if (v.size() != ctx.ambient) throw UsageError("vector dimension does not match the lattice");
    detail::RatVec w = detail::exact_vector(v);
    detail::RatVec beta = ctx.coords(w);
    BigRat rho = ctx.residual_norm2(w, beta);
    auto near = ctx.nearest_in_span(beta);
    BigRat d2 = near.dist2 + rho;
    d2.canonicalize();
    LatticeDistance out;
    out.distance = std::sqrt(d2.get_d());
    out.nearest.assign(ctx.ambient, 0.0);
    for (std::size_t a = 0; a < ctx.ambient; ++a) {
        BigRat s = 0;
        for (std::size_t j = 0; j < ctx.rank; ++j) s += ctx.basis[a][j] * BigRat(near.lattice_coeffs[j]);
        out.nearest[a] = s.get_d();
    }
    return out;
}

inline EscapeReport torus_escape(const std::vector<BigRat>& x, const LatticeBasis& basis, const SequenceSpec& spec,
                                 double epsilon, std::size_t K) {
    if (!(epsilon > 0)) throw UsageError("epsilon must be positive");
    detail::LatticeContext ctx(basis);
    if (x.size() != ctx.ambient) throw UsageError("point dimension does not match the lattice");
    EscapeReport rep;
    rep.epsilon = epsilon;
    rep.K = K;
    rep.spec_echo = spec.to_string();
    rep.exactness = "exact_rational_distances";
    rep.projection_norms = ctx.projection_norms();
    const detail::RatVec& w = x;
    detail::RatVec beta_x = ctx.coords(w);
    BigRat rho_x = ctx.residual_norm2(w, beta_x);
    BigRat eps2 = rat_of_double(epsilon) * rat_of_double(epsilon);
    eps2.canonicalize();
    std::vector<BigInt> terms = seqcore::generate(spec, K);
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const BigInt& n = terms[k];
        detail::RatVec beta(ctx.rank);
        for (std::size_t i = 0; i < ctx.rank; ++i) {
            beta[i] = BigRat(n) * beta_x[i];
            beta[i].canonicalize();
        }
        auto near = ctx.nearest_in_span(beta);
        BigRat d2 = near.dist2 + BigRat(n) * BigRat(n) * rho_x;
        d2.canonicalize();
        const double v = std::sqrt(d2.get_d());
        rep.trace.push_back(v);
        rep.max_value = std::max(rep.max_value, v);
        if (d2 > eps2) {
            rep.escaped = true;
            rep.k = k;
            rep.value = v;
            return rep;
        }
    }
    return rep;
}

inline EscapeReport torus_escape(const std::vector<double>& x, const LatticeBasis& basis, const SequenceSpec& spec,
                                 double epsilon, std::size_t K) {
    return torus_escape(detail::exact_vector(x), basis, spec, epsilon, K);
}

// ---------------------------------------------------------------------------
// semigroup rigidity

// Finite model of a time set E containing [0, 1]: a uniform grid plus extras.
struct TimeSet {
    double grid_resolution = 1e-3;
    std::vector<double> extra_times;

    std::vector<double> times() const {
        if (!(grid_resolution > 0 && grid_resolution <= 1)) throw UsageError("grid resolution must lie in (0, 1]");
        const auto steps = static_cast<std::size_t>(std::llround(1.0 / grid_resolution));
        std::set<double> ts;
        for (std::size_t i = 0; i <= steps; ++i) ts.insert(static_cast<double>(i) / static_cast<double>(steps));
        for (double t : extra_times) {
            if (!(t >= 0) || !std::isfinite(t)) throw UsageError("extra times must be finite and nonnegative");
            ts.insert(t);
        }
        return {ts.begin(), ts.end()};
    }

    // F + 1 = {floor(t) + 1 : t in E}, sorted; always contains {1, 2}.
    std::vector<BigInt> floor_set_plus_one() const {
        std::set<double> floors = {0.0, 1.0};
        for (double t : extra_times) floors.insert(std::floor(t));
        std::vector<BigInt> out;
        for (double f : floors) out.push_back(BigInt(f) + 1);  // f is integral; mpz takes it exactly
        return out;
    }
};

struct SemigroupResult {
    bool identity_forced = false;
    double violating_t = 0.0;
    double violating_value = 0.0;
    double max_value = 0.0;
    double epsilon = 0.0;
    double eps_F = 0.0;           // certified constant of the F+1 sequence
    double threshold = 0.0;       // min(eps_F/3, 1/3)
    bool quotient_assumed = false;  // prefix-only quotient bound extended to the tail
    double generator_norm = 0.0;
    bool crosscheck_passed = false;
    std::size_t times_used = 0;
};

inline SemigroupResult semigroup_scan(const CMat& G, const TimeSet& times, double epsilon) {
    if (!(epsilon > 0)) throw UsageError("epsilon must be positive");
    SemigroupResult out;
    out.epsilon = epsilon;
    const CMat I = matops::identity_like(G);
    std::vector<double> ts = times.times();
    out.times_used = ts.size();
    double max_v = -1.0, max_t = 0.0;
    for (double t : ts) {
        const double v = matops::op_norm(matops::expm(G, t) - I);
        if (v > max_v) {
            max_v = v;
            max_t = t;
        }
    }
    out.max_value = max_v;
    if (max_v > epsilon) {
        out.identity_forced = false;
        out.violating_t = max_t;
        out.violating_value = max_v;
        return out;
    }
    // The scan stayed within epsilon; decide whether that forces T_t = I.
    std::vector<BigInt> fplus1 = times.floor_set_plus_one();
    SequenceSpec fseq = SequenceSpec::explicit_list(fplus1);
    seqcore::QuotientReport quot = seqcore::quotient_bound(fseq, fplus1.size());
    if (!quot.bound) throw NoCertificate("no quotient bound available for the F+1 sequence");
    BigRat x = BigRat(1) / (*quot.bound + 1);
    x.canonicalize();
    out.eps_F = two_sin_pi(x);
    out.quotient_assumed = quot.certificate == seqcore::QuotientCertificate::PrefixOnly;
    out.threshold = std::min(out.eps_F / 3.0, 1.0 / 3.0);
    if (!(epsilon < out.threshold))
        throw NoCertificate("epsilon " + std::to_string(epsilon) + " is not below the certificate threshold " +
                            std::to_string(out.threshold));
    out.identity_forced = true;
    out.generator_norm = matops::op_norm(G);
    out.crosscheck_passed = out.generator_norm <= 1e-6;
    return out;
}

// ---------------------------------------------------------------------------
// non-Jamison witness construction

// A diagonal unitary with one exact rational phase; the double rendering may
// round to the identity when the phase underflows (factorial witnesses), so
// the exact phase is the authoritative payload.
struct WitnessResult {
    bool found = false;
    std::size_t dimension = 1;
    std::optional<circle::UnimodularPoint> phase;
    circle::DeviationResult exact_dev;
    std::optional<double> certificate_lb;
    circle::PairVerdict pair_verdict = circle::PairVerdict::Unknown;
    std::string note;

    CMat to_matrix() const {
        CMat A = CMat::Identity(static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(dimension));
        if (phase) A(0, 0) = phase->lambda();
        return A;
    }
    bool rendering_differs_from_identity() const { return phase && phase->lambda() != std::complex<double>(1.0, 0.0); }
};

inline WitnessResult non_jamison_witness(const SequenceSpec& spec, double epsilon, std::size_t dimension,
                                         std::size_t budget = 2000) {
    if (!(epsilon > 0 && epsilon <= 2)) throw UsageError("witness search needs epsilon in (0, 2]");
    if (dimension < 1) throw UsageError("dimension must be >= 1");
    circle::PairOptions popt;
    popt.enumeration.factorial_N_max = std::max<std::size_t>(8, std::min<std::size_t>(budget, 2000));
    popt.enumeration.doubleexp_m_max = 7;
    circle::PairResult pair = circle::pair_check(spec, epsilon, /*strict=*/false, popt);
    WitnessResult out;
    out.dimension = dimension;
    out.pair_verdict = pair.verdict;
    switch (pair.verdict) {
        case circle::PairVerdict::CertifiedNo: {
            out.found = true;
            out.phase = pair.witness;
            out.exact_dev.value = *pair.witness_value;
            out.exact_dev.exactness = circle::DevExactness::ExactAlgebraic;
            out.exact_dev.algebraic = pair.witness_algebraic;
            out.note = "diag(e^{2 pi i theta}, 1, ...) with exact phase theta = " + pair.witness->to_string();
            break;
        }
        case circle::PairVerdict::CertifiedYes:
            out.certificate_lb = pair.certificate_lb;
            out.note = "no witness exists: (spec, epsilon) is a certified Jamison pair";
            break;
        case circle::PairVerdict::Unknown:
            out.note = "no witness found within the search budget; pair undecided";
            break;
    }
    return out;
}

}  // namespace escapelab::escape

#endif
