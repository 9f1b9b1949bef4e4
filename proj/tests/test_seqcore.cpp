#include <catch2/catch.hpp>

#include "escapelab/seq.hpp"

using namespace escapelab;
using namespace escapelab::seqcore;

namespace {

std::vector<BigInt> to_big(std::initializer_list<long> xs) {
    std::vector<BigInt> out;
    for (long x : xs) out.emplace_back(x);
    return out;
}

// Brute-force oracle: residues straight from materialized terms.
std::vector<BigInt> residues_by_generate(const SequenceSpec& spec, const BigInt& q, std::size_t K) {
    std::vector<BigInt> out;
    for (const auto& n : generate(spec, K)) out.push_back(mod_floor(n, q));
    return out;
}

std::vector<BigInt> stream_prefix(const ResidueStream& st, std::size_t count) {
    std::vector<BigInt> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(st.at(k));
    return out;
}

}  // namespace

TEST_CASE("generate matches the worked examples", "[seqcore]") {
    CHECK(generate(SequenceSpec::geometric(2), 3) == to_big({1, 2, 4, 8}));
    CHECK(generate(SequenceSpec::affine(), 2) == to_big({1, 2, 3}));
    CHECK(generate(SequenceSpec::patch(SequenceSpec::geometric(2), 1, BigInt(3)), 4) == to_big({1, 3, 4, 8, 16}));
    CHECK(generate(SequenceSpec::factorial(), 3) == to_big({1, 2, 6, 24}));
    CHECK(generate(SequenceSpec::double_exp(), 3) == to_big({1, 4, 16, 256}));
}

TEST_CASE("generate is prefix-stable and strictly increasing from 1", "[seqcore]") {
    const std::vector<SequenceSpec> specs = {
        SequenceSpec::geometric(2),  SequenceSpec::geometric(7), SequenceSpec::affine(),
        SequenceSpec::factorial(),   SequenceSpec::double_exp(),
        SequenceSpec::patch(SequenceSpec::geometric(2), 1, BigInt(3)),
        SequenceSpec::explicit_list(to_big({1, 5, 9, 12, 40}))};
    for (const auto& spec : specs) {
        std::size_t cap = spec.family() == Family::DoubleExp ? 10 : 4;
        if (auto len = spec.length_limit()) cap = *len - 2;
        auto longer = generate(spec, cap + 1);
        auto shorter = generate(spec, cap);
        CHECK(std::equal(shorter.begin(), shorter.end(), longer.begin()));
        CHECK(longer.front() == 1);
        for (std::size_t i = 0; i + 1 < longer.size(); ++i) CHECK(longer[i] < longer[i + 1]);
    }
}

TEST_CASE("invalid specs are rejected", "[seqcore]") {
    CHECK_THROWS_AS(SequenceSpec::geometric(1), InvalidSpec);
    CHECK_THROWS_AS(SequenceSpec::explicit_list(to_big({2, 3})), InvalidSpec);
    CHECK_THROWS_AS(SequenceSpec::explicit_list(to_big({1, 3, 3})), InvalidSpec);
    // 1 < value < 4 required at index 1 of 1,2,4,8.
    CHECK_THROWS_AS(SequenceSpec::patch(SequenceSpec::geometric(2), 1, BigInt(4)), InvalidSpec);
    CHECK_THROWS_AS(SequenceSpec::patch(SequenceSpec::geometric(2), 1, BigInt(1)), InvalidSpec);
    CHECK_NOTHROW(SequenceSpec::patch(SequenceSpec::geometric(2), 1, BigInt(3)));
}

TEST_CASE("spec grammar parses and round-trips", "[seqcore]") {
    const std::vector<std::string> texts = {"geom:2",    "affine",        "factorial",
                                            "doubleexp", "list:1,3,4,10", "patch:geom:2@1=3"};
    for (const auto& t : texts) CHECK(parse_spec(t).to_string() == t);
    CHECK(parse_spec("patch:patch:geom:2@1=3@3=9").to_string() == "patch:patch:geom:2@1=3@3=9");
    CHECK_THROWS_AS(parse_spec("geom:1"), InvalidSpec);
    CHECK_THROWS_AS(parse_spec("geom:x"), InvalidSpec);
    CHECK_THROWS_AS(parse_spec("arith"), InvalidSpec);
    CHECK_THROWS_AS(parse_spec("list:"), InvalidSpec);
    CHECK_THROWS_AS(parse_spec("list:1,2,"), InvalidSpec);
    CHECK_THROWS_AS(parse_spec("patch:geom:2@0=1"), InvalidSpec);
}

TEST_CASE("quotient bounds match the worked examples", "[seqcore]") {
    auto g2 = quotient_bound(SequenceSpec::geometric(2));
    REQUIRE(g2.bound);
    CHECK(*g2.bound == BigRat(2));
    CHECK(g2.certificate == QuotientCertificate::ExactForFamily);

    auto aff = quotient_bound(SequenceSpec::affine());
    REQUIRE(aff.bound);
    CHECK(*aff.bound == BigRat(2));
    CHECK(aff.achieved_at == std::size_t{0});
    CHECK(aff.certificate == QuotientCertificate::ExactForFamily);

    CHECK_FALSE(quotient_bound(SequenceSpec::factorial()).bound);
    CHECK_FALSE(quotient_bound(SequenceSpec::double_exp()).bound);

    auto patched = quotient_bound(SequenceSpec::patch(SequenceSpec::geometric(2), 1, BigInt(3)));
    REQUIRE(patched.bound);
    CHECK(*patched.bound == BigRat(3));
    CHECK(patched.achieved_at == std::size_t{0});
    CHECK(patched.certificate == QuotientCertificate::ExactForFamily);

    auto list = quotient_bound(SequenceSpec::explicit_list(to_big({1, 2, 10, 11})), 3);
    REQUIRE(list.bound);
    CHECK(*list.bound == BigRat(5));
    CHECK(list.achieved_at == std::size_t{1});
    CHECK(list.certificate == QuotientCertificate::PrefixOnly);
}

TEST_CASE("quotient bound of geom:c is exactly c for 2 <= c <= 64", "[seqcore]") {
    for (unsigned long c = 2; c <= 64; ++c) {
        auto rep = quotient_bound(SequenceSpec::geometric(c));
        REQUIRE(rep.bound);
        CHECK(*rep.bound == BigRat(c));
    }
}

TEST_CASE("residue streams match the worked examples", "[seqcore]") {
    auto g = residues(SequenceSpec::geometric(2), BigInt(3));
    CHECK(g.exact);
    CHECK(g.preperiod.empty());
    CHECK(g.cycle == to_big({1, 2}));

    auto f = residues(SequenceSpec::factorial(), BigInt(6));
    CHECK(f.exact);
    CHECK(f.preperiod == to_big({1, 2}));
    CHECK(f.cycle == to_big({0}));

    auto a = residues(SequenceSpec::affine(), BigInt(4));
    CHECK(a.exact);
    CHECK(a.preperiod.empty());
    CHECK(a.cycle == to_big({1, 2, 3, 0}));

    auto p = residues(SequenceSpec::patch(SequenceSpec::geometric(2), 1, BigInt(3)), BigInt(4));
    CHECK(p.exact);
    CHECK(stream_prefix(p, 5) == to_big({1, 3, 0, 0, 0}));
}

TEST_CASE("exact residue streams agree with generate() mod q", "[seqcore]") {
    const std::vector<SequenceSpec> specs = {
        SequenceSpec::geometric(2),  SequenceSpec::geometric(3), SequenceSpec::geometric(10),
        SequenceSpec::affine(),      SequenceSpec::factorial(),  SequenceSpec::double_exp(),
        SequenceSpec::patch(SequenceSpec::geometric(2), 1, BigInt(3)),
        SequenceSpec::patch(SequenceSpec::geometric(3), 1, BigInt(5)),
        // patched index falls inside the base cycle region
        SequenceSpec::patch(SequenceSpec::geometric(2), 4, BigInt(17)),
        SequenceSpec::patch(SequenceSpec::factorial(), 3, BigInt(30))};
    for (const auto& spec : specs) {
        for (unsigned long q : {1ul, 2ul, 3ul, 4ul, 5ul, 6ul, 7ul, 12ul, 30ul, 97ul}) {
            ResidueStream st = residues(spec, BigInt(q));
            REQUIRE(st.exact);
            std::size_t K = 2 * st.coverage();
            if (spec.family() == Family::DoubleExp) K = std::min<std::size_t>(K, 12);
            auto oracle = residues_by_generate(spec, BigInt(q), K);
            for (std::size_t k = 0; k <= K; ++k) {
                INFO(spec.to_string() << " mod " << q << " at k=" << k);
                CHECK(st.at(k) == oracle[k]);
            }
        }
    }
}

TEST_CASE("residue iterator agrees with streams on long prefixes", "[seqcore]") {
    const std::vector<SequenceSpec> specs = {SequenceSpec::geometric(5), SequenceSpec::affine(),
                                             SequenceSpec::factorial(), SequenceSpec::double_exp()};
    for (const auto& spec : specs) {
        for (unsigned long q : {7ul, 64ul, 101ul}) {
            ResidueStream st = residues(spec, BigInt(q));
            REQUIRE(st.exact);
            ResidueIterator it(spec, BigInt(q));
            for (std::size_t k = 0; k < 3 * st.coverage(); ++k) {
                INFO(spec.to_string() << " mod " << q << " k=" << k);
                CHECK(it.next() == st.at(k));
            }
        }
    }
}

TEST_CASE("explicit list streams carry an unverified tail", "[seqcore]") {
    auto spec = SequenceSpec::explicit_list(to_big({1, 2, 4, 8}));
    auto st = residues(spec, BigInt(3));
    CHECK_FALSE(st.exact);
    CHECK(st.preperiod == to_big({1, 2, 1, 2}));
    CHECK_THROWS_AS(st.at(4), InexactTail);
}

TEST_CASE("factorial residues hit the cap for a large prime modulus", "[seqcore]") {
    // (k+1)! mod p stays nonzero until k+1 = p; a small cap forces truncation.
    auto st = residues(SequenceSpec::factorial(), BigInt(1009), 100);
    CHECK_FALSE(st.exact);
    CHECK(st.preperiod.size() == 100);
}
