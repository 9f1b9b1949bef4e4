#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "escapelab/positivity.hpp"
#include "generators.hpp"

using namespace escapelab;
using namespace escapelab::positivity;
using circle::UnimodularPoint;
using matops::CMat;
using matops::Complex;
using seqcore::SequenceSpec;

namespace {

PolarScalar scalar_i() { return {1.0, UnimodularPoint::rational(BigInt(1), BigInt(4))}; }
PolarScalar scalar_real(double v) {
    return {std::abs(v), UnimodularPoint::rational(BigInt(v < 0 ? 1 : 0), BigInt(v < 0 ? 2 : 1))};
}

CMat mat2(Complex a, Complex b, Complex c, Complex d) {
    CMat A(2, 2);
    A << a, b, c, d;
    return A;
}

}  // namespace

TEST_CASE("scalar accretive scans match the worked examples", "[positivity]") {
    // Re i^{3^k} = 0 for every k: accretive with exact margin 0.
    auto i3 = scalar_accretive_scan(scalar_i(), SequenceSpec::geometric(3), false);
    CHECK(i3.verdict == AccretiveVerdict::AllAccretive);
    CHECK(i3.margin == 0.0);
    CHECK(i3.exact);

    // Re i^{m_k} >= 0 along the patched doubling sequence 1,3,4,8,16,...
    auto imk = scalar_accretive_scan(scalar_i(), SequenceSpec::patch(SequenceSpec::geometric(2), 1, BigInt(3)), false);
    CHECK(imk.verdict == AccretiveVerdict::AllAccretive);
    CHECK(imk.exact);

    // Strict mode rejects the boundary orbit of i.
    auto strict = scalar_accretive_scan(scalar_i(), SequenceSpec::geometric(3), true);
    CHECK(strict.verdict == AccretiveVerdict::FailsAt);

    auto two = scalar_accretive_scan(scalar_real(2.0), SequenceSpec::double_exp(), true);
    CHECK(two.verdict == AccretiveVerdict::AllStrictlyAccretive);
    CHECK(two.exact);

    // i under n_k = k+1 turns negative at n = 2.
    auto aff = scalar_accretive_scan(scalar_i(), SequenceSpec::affine(), false);
    REQUIRE(aff.verdict == AccretiveVerdict::FailsAt);
    CHECK(*aff.fails_at == 1);

    // Zero is accretive but never strictly.
    auto zero = scalar_accretive_scan({0.0, UnimodularPoint::rational(BigInt(0), BigInt(1))},
                                      SequenceSpec::geometric(2), false);
    CHECK(zero.verdict == AccretiveVerdict::AllAccretive);

    // Float angles only ever give truncated verdicts.
    auto f = scalar_accretive_scan({1.0, UnimodularPoint::from_theta(0.2499999999)}, SequenceSpec::geometric(3),
                                   false, 48);
    CHECK_FALSE(f.exact);
}

TEST_CASE("matrix accretive scans match the worked examples", "[positivity]") {
    std::mt19937_64 rng(21);
    // Hermitian with spectrum inside [0.5, 1]: strictly accretive along k+1.
    CMat H = testgen::random_psd(rng, 4, 0.5) + 0.5 * CMat::Identity(4, 4);
    auto herm = matrix_accretive_scan(H, SequenceSpec::affine(), 32, 1e-12, true);
    CHECK(herm.verdict == AccretiveVerdict::AllStrictlyAccretive);

    auto jordan = matrix_accretive_scan(mat2(0, 1, 0, 0), SequenceSpec::geometric(2), 8, 1e-9, false);
    REQUIRE(jordan.verdict == AccretiveVerdict::FailsAt);
    CHECK(*jordan.fails_at == 0);
    CHECK(jordan.per_k[0].min_eig == Approx(-0.5).margin(1e-12));

    auto i_scan = matrix_accretive_scan(Complex(0, 1) * CMat::Identity(2, 2), SequenceSpec::geometric(3), 32, 1e-9,
                                        false);
    CHECK(i_scan.verdict == AccretiveVerdict::AllAccretive);
    CHECK(i_scan.margin == 0.0);  // powers of i*I have exactly vanishing Hermitian part

    // Norm blowup counts as failure.
    auto blow = matrix_accretive_scan(3.0 * CMat::Identity(2, 2), SequenceSpec::double_exp(), 12, 1e-9, false);
    CHECK(blow.verdict == AccretiveVerdict::FailsAt);
    CHECK(blow.overflow);
}

TEST_CASE("positivity check matches the worked examples", "[positivity]") {
    auto semidef = positivity_check(mat2(0, 0, 0, 1));
    CHECK(semidef.verdict == PositivityVerdict::Positive);

    auto invertible = positivity_check(mat2(1, 0, 0, 2));
    CHECK(invertible.verdict == PositivityVerdict::PositiveInvertible);
    CHECK(invertible.min_eig == Approx(1.0).margin(1e-12));

    auto skew = positivity_check(Complex(0, 1) * CMat::Identity(2, 2));
    CHECK(skew.verdict == PositivityVerdict::NotPositive);
    CHECK(skew.reason == "not Hermitian within tolerance");

    auto negative = positivity_check(mat2(-1, 0, 0, 1));
    CHECK(negative.verdict == PositivityVerdict::NotPositive);
}

TEST_CASE("positivity cross-check matches the worked examples", "[positivity]") {
    std::mt19937_64 rng(22);
    // Random Hermitian PSD: hypothesis and conclusion both hold.
    for (int i = 0; i < 5; ++i) {
        CMat P = testgen::random_psd(rng, 8, 1.0);
        auto res = positivity_cross_check(P, SequenceSpec::geometric(2), 24, 1e-9, false);
        CHECK(res.verdict == CrossCheckVerdict::ConsistentPositive);
        CHECK(res.circle_verdict == circle::PairVerdict::CertifiedYes);
    }

    // iI along powers of 3: scan passes exactly, positivity fails, and the
    // strict circle condition fails (i attains sqrt(2)): expected counterexample.
    auto counter = positivity_cross_check(Complex(0, 1) * CMat::Identity(2, 2), SequenceSpec::geometric(3), 32,
                                          1e-9, false);
    CHECK(counter.verdict == CrossCheckVerdict::ExpectedCounterexample);
    CHECK(counter.scan.verdict == AccretiveVerdict::AllAccretive);
    CHECK(counter.scan.margin == 0.0);
    CHECK(counter.circle_verdict == circle::PairVerdict::CertifiedNo);
    REQUIRE(counter.circle_witness);
    CHECK(counter.circle_witness->to_string() == "1/4");

    // The same matrix under n_k = k+1 already fails the scan at n = 2.
    auto fails = positivity_cross_check(Complex(0, 1) * CMat::Identity(2, 2), SequenceSpec::affine(), 8, 1e-9, false);
    CHECK(fails.verdict == CrossCheckVerdict::HypothesisFails);
    REQUIRE(fails.scan.fails_at);
    CHECK(*fails.scan.fails_at == 1);
    CHECK(fails.scan.per_k[1].n_k == "2");

    // 2I under the strict variant: positive invertible and consistent.
    auto strict2 = positivity_cross_check(2.0 * CMat::Identity(3, 3), SequenceSpec::affine(), 8, 1e-9, true);
    CHECK(strict2.verdict == CrossCheckVerdict::ConsistentPositive);
    CHECK(strict2.positivity.verdict == PositivityVerdict::PositiveInvertible);
}

TEST_CASE("scalar and matrix scans agree on c*I", "[positivity]") {
    const std::vector<SequenceSpec> specs = {SequenceSpec::geometric(2), SequenceSpec::geometric(3),
                                             SequenceSpec::affine()};
    const std::vector<std::pair<long, long>> angles = {{1, 4}, {1, 3}, {1, 8}, {0, 1}};
    for (const auto& spec : specs) {
        for (auto [p, q] : angles) {
            auto angle = UnimodularPoint::rational(BigInt(p), BigInt(q));
            PolarScalar c{1.0, angle};
            const std::size_t K = 10;
            auto mat = matrix_accretive_scan(angle.lambda() * CMat::Identity(2, 2), spec, K, 1e-10, false);
            seqcore::ResidueIterator it(spec, BigInt(q));
            for (std::size_t k = 0; k <= K; ++k) {
                BigInt s = mod_floor(it.next() * BigInt(p), BigInt(q));
                const double expected = std::cos(2 * M_PI * make_rat(s, BigInt(q)).get_d());
                INFO(spec.to_string() << " angle " << p << "/" << q << " k=" << k);
                CHECK(mat.per_k[k].min_eig == Approx(expected).margin(1e-10));
                if (mat.fails_at && *mat.fails_at == k) break;
            }
        }
    }
}

TEST_CASE("Hermitian PSD matrices stay accretive along every sequence", "[positivity]") {
    std::mt19937_64 rng(23);
    for (const auto& spec :
         {SequenceSpec::geometric(2), SequenceSpec::affine(), SequenceSpec::factorial(), SequenceSpec::double_exp()}) {
        for (int i = 0; i < 5; ++i) {
            // Norm comfortably below 1: powers up to 2^(2^8) must not overflow.
            CMat P = testgen::random_psd(rng, 5, 0.95);
            auto res = matrix_accretive_scan(P, spec, 8, 1e-9, false);
            INFO(spec.to_string());
            CHECK(res.verdict != AccretiveVerdict::FailsAt);
        }
    }
}

TEST_CASE("sector roots of the worked examples", "[positivity]") {
    auto id = sector_root_check(CMat::Identity(3, 3), 5);
    CHECK(id.stage == SectorRootStage::Verified);
    CHECK(matops::op_norm(*id.root - CMat::Identity(3, 3)) < 1e-12);

    auto diag = sector_root_check(mat2(1, 0, 0, 4), 2);
    CHECK(diag.stage == SectorRootStage::Verified);
    CHECK(matops::op_norm(*diag.root - mat2(1, 0, 0, 2)) < 1e-10);
    CHECK(diag.max_sector_distance <= 1e-10);

    auto neg = sector_root_check(mat2(-1, 0, 0, 1), 2);
    CHECK(neg.stage == SectorRootStage::NegativeRealInRange);

    auto defective = sector_root_check(mat2(2, 1, 0, 2) + mat2(1, 0, 0, 1), 2);
    CHECK(defective.stage == SectorRootStage::NotDiagonalizable);
}

TEST_CASE("sector roots verify on random accretive matrices", "[positivity]") {
    std::mt19937_64 rng(24);
    for (unsigned m : {2u, 3u, 5u}) {
        for (int i = 0; i < 5; ++i) {
            CMat A = testgen::random_accretive(rng, 5, 0.1);
            auto res = sector_root_check(A, m);
            INFO("m = " << m << " case " << i);
            REQUIRE(res.stage == SectorRootStage::Verified);
            CHECK(res.residual <= 1e-8 * matops::op_norm(A));
            CHECK(res.max_sector_distance <= 1e-6);
        }
    }
}

TEST_CASE("non-principal branches give a different root", "[positivity]") {
    std::mt19937_64 rng(25);
    CMat A = testgen::random_accretive(rng, 4, 0.2);
    const unsigned m = 3;
    CMat S = matops::principal_root(A, m);
    CMat V;
    matops::Spectrum sp = matops::eig(A, &V);
    matops::CVec roots(sp.values.size());
    for (Eigen::Index i = 0; i < sp.values.size(); ++i)
        roots(i) = std::polar(std::pow(std::abs(sp.values(i)), 1.0 / m), std::arg(sp.values(i)) / m);
    roots(0) *= std::polar(1.0, 2 * M_PI / m);  // rotate one eigenvalue off the principal branch
    CMat S2 = V * roots.asDiagonal() * V.inverse();
    CHECK(matops::op_norm(*matops::mat_pow(S2, BigInt(m)) - A) <= 1e-8 * matops::op_norm(A));
    CHECK(matops::op_norm(S2 - S) > 0.1);
    CHECK(std::abs(std::arg(roots(0))) > M_PI / m + 1e-9);
}

TEST_CASE("unit-interval equivalence matches the worked examples", "[positivity]") {
    CMat D = CMat::Zero(3, 3);
    D(1, 1) = 0.5;
    D(2, 2) = 1.0;
    auto both = unit_interval_equivalence(D, SequenceSpec::affine(), 32);
    CHECK(both.verdict == EquivalenceVerdict::EquivalenceHolds);
    CHECK(both.side_norm);
    CHECK(both.side_interval);

    auto bigger = unit_interval_equivalence(1.2 * CMat::Identity(2, 2), SequenceSpec::affine(), 32);
    CHECK(bigger.verdict == EquivalenceVerdict::EquivalenceHolds);
    CHECK_FALSE(bigger.side_norm);
    CHECK_FALSE(bigger.side_interval);
    CHECK(bigger.norm_side_certified);  // spectral radius 1.2 settles it exactly

    auto skew = unit_interval_equivalence(Complex(0, 1) * CMat::Identity(2, 2), SequenceSpec::affine(), 8);
    CHECK(skew.verdict == EquivalenceVerdict::EquivalenceHolds);
    CHECK_FALSE(skew.side_norm);
    CHECK(skew.norm_fail_k);  // |i^2 - 1| = 2 at n = 2
    CHECK_FALSE(skew.side_interval);

    // Hypothesis (strict sqrt(2) circle condition) fails for powers of 3.
    auto no_hyp = unit_interval_equivalence(D, SequenceSpec::geometric(3), 16);
    CHECK(no_hyp.verdict == EquivalenceVerdict::HypothesisNotCertified);
}

TEST_CASE("cross-check produces no theorem violations on seeded generators", "[positivity]") {
    std::mt19937_64 rng(26);
    for (const auto& spec : {SequenceSpec::geometric(2), SequenceSpec::affine()}) {
        for (int i = 0; i < 20; ++i) {
            const Eigen::Index d = 2 + static_cast<Eigen::Index>(i % 7);
            CMat P = testgen::random_psd(rng, d, 1.0);
            for (bool strict : {false, true}) {
                auto res = positivity_cross_check(P, spec, 16, 1e-9, strict);
                INFO(spec.to_string() << " d=" << d << " strict=" << strict);
                CHECK(res.verdict != CrossCheckVerdict::TheoremViolation);
            }
        }
    }
}
