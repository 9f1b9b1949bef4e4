#ifndef ESCAPELAB_SEQ_HPP
#define ESCAPELAB_SEQ_HPP

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "escapelab/arith.hpp"
#include "escapelab/errors.hpp"

namespace escapelab::seqcore {

// Strictly increasing integer sequences with n_0 = 1.
//
// The factorial family uses the shifted convention n_k = (k+1)!, so that
// n_0 = 1! = 1; every report echoes this convention.
enum class Family { Geometric, Affine, Factorial, DoubleExp, ExplicitList, Patch };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::Geometric: return "geometric";
        case Family::Affine: return "affine";
        case Family::Factorial: return "factorial";
        case Family::DoubleExp: return "doubleexp";
        case Family::ExplicitList: return "explicit_list";
        case Family::Patch: return "patch";
    }
    return "?";
}

// Materialization guard: doubleexp terms have 2^k bits, so generate() is only
// allowed up to this index for that family. Residue computations never
// materialize terms and are not bound by it.
inline constexpr std::size_t kDoubleExpGenerateCap = 24;

class SequenceSpec {
public:
    static SequenceSpec geometric(unsigned long ratio) {
        if (ratio < 2) throw InvalidSpec("geom ratio must be >= 2, got " + std::to_string(ratio));
        SequenceSpec s(Family::Geometric);
        s.ratio_ = ratio;
        return s;
    }
    static SequenceSpec affine() { return SequenceSpec(Family::Affine); }
    static SequenceSpec factorial() { return SequenceSpec(Family::Factorial); }
    static SequenceSpec double_exp() { return SequenceSpec(Family::DoubleExp); }

    static SequenceSpec explicit_list(std::vector<BigInt> terms) {
        if (terms.empty()) throw InvalidSpec("explicit list must not be empty");
        if (terms.front() != 1) throw InvalidSpec("explicit list must start with n_0 = 1");
        for (std::size_t i = 0; i + 1 < terms.size(); ++i) {
            if (terms[i + 1] <= terms[i])
                throw InvalidSpec("explicit list must be strictly increasing at index " + std::to_string(i + 1));
        }
        SequenceSpec s(Family::ExplicitList);
        s.terms_ = std::move(terms);
        return s;
    }

    static SequenceSpec patch(SequenceSpec base, std::size_t index, BigInt value);

    Family family() const { return family_; }
    unsigned long ratio() const { return ratio_; }
    const std::vector<BigInt>& terms() const { return terms_; }
    const SequenceSpec& base() const { return *base_; }
    std::size_t patch_index() const { return patch_index_; }
    const BigInt& patch_value() const { return patch_value_; }

    // True when every downstream sup over the sequence is finitely checkable
    // (rule-based families); explicit lists are prefixes of unknown sequences.
    bool rule_based() const {
        if (family_ == Family::ExplicitList) return false;
        if (family_ == Family::Patch) return base_->rule_based();
        return true;
    }

    std::optional<std::size_t> length_limit() const {
        if (family_ == Family::ExplicitList) return terms_.size();
        if (family_ == Family::Patch) return base_->length_limit();
        return std::nullopt;
    }

    std::string to_string() const {
        switch (family_) {
            case Family::Geometric: return "geom:" + std::to_string(ratio_);
            case Family::Affine: return "affine";
            case Family::Factorial: return "factorial";
            case Family::DoubleExp: return "doubleexp";
            case Family::ExplicitList: {
                std::string s = "list:";
                for (std::size_t i = 0; i < terms_.size(); ++i) {
                    if (i) s += ',';
                    s += terms_[i].get_str();
                }
                return s;
            }
            case Family::Patch:
                return "patch:" + base_->to_string() + "@" + std::to_string(patch_index_) + "=" +
                       patch_value_.get_str();
        }
        return "?";
    }

private:
    explicit SequenceSpec(Family f) : family_(f) {}

    Family family_;
    unsigned long ratio_ = 0;
    std::vector<BigInt> terms_;
    std::shared_ptr<const SequenceSpec> base_;
    std::size_t patch_index_ = 0;
    BigInt patch_value_;
};

// ---------------------------------------------------------------------------
// generate

inline std::vector<BigInt> generate(const SequenceSpec& spec, std::size_t K) {
    std::vector<BigInt> out;
    out.reserve(K + 1);
    switch (spec.family()) {
        case Family::Geometric: {
            BigInt t = 1;
            for (std::size_t k = 0; k <= K; ++k) {
                out.push_back(t);
                t *= spec.ratio();
            }
            break;
        }
        case Family::Affine:
            for (std::size_t k = 0; k <= K; ++k) out.push_back(BigInt(static_cast<unsigned long>(k) + 1));
            break;
        case Family::Factorial: {
            BigInt t = 1;  // n_k = (k+1)!
            for (std::size_t k = 0; k <= K; ++k) {
                t *= static_cast<unsigned long>(k + 1);
                out.push_back(t);
            }
            break;
        }
        case Family::DoubleExp: {
            if (K > kDoubleExpGenerateCap)
                throw InvalidSpec("doubleexp terms beyond index " + std::to_string(kDoubleExpGenerateCap) +
                                  " cannot be materialized; residue operations remain available");
            out.push_back(BigInt(1));
            for (std::size_t k = 1; k <= K; ++k) {
                BigInt t;
                mpz_ui_pow_ui(t.get_mpz_t(), 2, 1ul << k);  // 2^(2^k)
                out.push_back(t);
            }
            break;
        }
        case Family::ExplicitList: {
            if (K >= spec.terms().size())
                throw InvalidSpec("explicit list has " + std::to_string(spec.terms().size()) +
                                  " terms; cannot generate index " + std::to_string(K));
            out.assign(spec.terms().begin(), spec.terms().begin() + static_cast<long>(K + 1));
            break;
        }
        case Family::Patch: {
            out = generate(spec.base(), std::max(K, spec.patch_index()));
            out[spec.patch_index()] = spec.patch_value();
            out.resize(K + 1);
            break;
        }
    }
    return out;
}

inline SequenceSpec SequenceSpec::patch(SequenceSpec base, std::size_t index, BigInt value) {
    if (index < 1) throw InvalidSpec("patch index must be >= 1 (n_0 = 1 is fixed)");
    SequenceSpec s(Family::Patch);
    s.base_ = std::make_shared<SequenceSpec>(std::move(base));
    s.patch_index_ = index;
    s.patch_value_ = std::move(value);
    // Monotonicity at the patched index, checked against the base neighbors.
    if (s.base_->family() == Family::DoubleExp && index + 1 > kDoubleExpGenerateCap)
        throw InvalidSpec("patch index too large for the doubleexp family");
    std::vector<BigInt> around = generate(*s.base_, index + 1);
    if (!(around[index - 1] < s.patch_value_ && s.patch_value_ < around[index + 1]))
        throw InvalidSpec("patch value " + s.patch_value_.get_str() + " breaks strict monotonicity at index " +
                          std::to_string(index));
    return s;
}

// ---------------------------------------------------------------------------
// parsing (CLI grammar): geom:<c> | affine | factorial | doubleexp |
//                        list:<n0>,<n1>,... | patch:<base>@<k>=<v>

inline SequenceSpec parse_spec(std::string_view text) {
    auto fail = [&](const std::string& why) -> SequenceSpec {
        throw InvalidSpec("cannot parse sequence spec '" + std::string(text) + "': " + why);
    };
    auto parse_big = [&](std::string_view tok) {
        if (tok.empty()) fail("empty integer token");
        for (char c : tok)
            if (!std::isdigit(static_cast<unsigned char>(c))) fail("bad integer token '" + std::string(tok) + "'");
        return BigInt(std::string(tok), 10);
    };
    if (text == "affine") return SequenceSpec::affine();
    if (text == "factorial") return SequenceSpec::factorial();
    if (text == "doubleexp") return SequenceSpec::double_exp();
    if (text.rfind("geom:", 0) == 0) {
        std::string_view tok = text.substr(5);
        BigInt c = parse_big(tok);
        if (c < 2 || c > 1'000'000'000) fail("geom ratio must be an integer in [2, 10^9]");
        return SequenceSpec::geometric(c.get_ui());
    }
    if (text.rfind("list:", 0) == 0) {
        std::string_view rest = text.substr(5);
        std::vector<BigInt> terms;
        while (!rest.empty()) {
            auto comma = rest.find(',');
            std::string_view tok = rest.substr(0, comma);
            terms.push_back(parse_big(tok));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
            if (rest.empty()) fail("trailing comma");
        }
        return SequenceSpec::explicit_list(std::move(terms));
    }
    if (text.rfind("patch:", 0) == 0) {
        std::string_view rest = text.substr(6);
        auto at = rest.rfind('@');
        if (at == std::string_view::npos) fail("patch needs '<base>@<k>=<v>'");
        std::string_view base_text = rest.substr(0, at);
        std::string_view kv = rest.substr(at + 1);
        auto eq = kv.find('=');
        if (eq == std::string_view::npos) fail("patch needs '<k>=<v>' after '@'");
        BigInt k = parse_big(kv.substr(0, eq));
        if (k < 1 || k > 1'000'000) fail("patch index out of range");
        BigInt v = parse_big(kv.substr(eq + 1));
        return SequenceSpec::patch(parse_spec(base_text), k.get_ui(), v);
    }
    return fail("unknown family token");
}

// ---------------------------------------------------------------------------
// quotient analysis

enum class QuotientCertificate { ExactForFamily, PrefixOnly };

struct QuotientReport {
    std::optional<BigRat> bound;  // nullopt = unbounded quotients
    std::optional<std::size_t> achieved_at;
    QuotientCertificate certificate = QuotientCertificate::ExactForFamily;
    std::size_t prefix_length = 0;  // meaningful for PrefixOnly
};

namespace detail {

// sup_{k >= m} n_{k+1}/n_k for rule-based families; nullopt = unbounded.
inline std::optional<std::pair<BigRat, std::size_t>> tail_ratio_sup(const SequenceSpec& spec, std::size_t m) {
    switch (spec.family()) {
        case Family::Geometric:
            return std::make_pair(BigRat(spec.ratio()), m);
        case Family::Affine:
            // (k+2)/(k+1) decreases in k; sup on the tail is at k = m.
            return std::make_pair(make_rat(BigInt(static_cast<unsigned long>(m) + 2),
                                           BigInt(static_cast<unsigned long>(m) + 1)),
                                  m);
        case Family::Factorial:
        case Family::DoubleExp:
            return std::nullopt;
        case Family::ExplicitList: {
            const auto& t = spec.terms();
            if (m + 1 >= t.size()) return std::nullopt;  // no ratios left in the prefix
            BigRat best = make_rat(t[m + 1], t[m]);
            std::size_t at = m;
            for (std::size_t k = m + 1; k + 1 < t.size(); ++k) {
                BigRat r = make_rat(t[k + 1], t[k]);
                if (r > best) {
                    best = r;
                    at = k;
                }
            }
            return std::make_pair(best, at);
        }
        case Family::Patch: {
            const std::size_t j = spec.patch_index();
            if (m > j) return tail_ratio_sup(spec.base(), m);
            // Ratios at k in [m, j] involve the patched term; beyond j they are pure base.
            std::vector<BigInt> terms = generate(spec, j + 1);
            std::optional<std::pair<BigRat, std::size_t>> best;
            for (std::size_t k = m; k <= j; ++k) {
                BigRat r = make_rat(terms[k + 1], terms[k]);
                if (!best || r > best->first) best = std::make_pair(r, k);
            }
            auto tail = tail_ratio_sup(spec.base(), j + 1);
            if (!tail) return std::nullopt;
            if (!best || tail->first > best->first) return tail;
            return best;
        }
    }
    return std::nullopt;
}

}  // namespace detail

inline QuotientReport quotient_bound(const SequenceSpec& spec, std::size_t K = 1) {
    QuotientReport rep;
    if (spec.rule_based()) {
        rep.certificate = QuotientCertificate::ExactForFamily;
        auto sup = detail::tail_ratio_sup(spec, 0);
        if (sup) {
            rep.bound = sup->first;
            rep.achieved_at = sup->second;
        }
        return rep;
    }
    // Explicit lists (possibly patched): prefix maximum only.
    std::size_t len = spec.length_limit().value_or(K + 1);
    std::size_t upto = std::min(len - 1, std::max<std::size_t>(K, 1));
    std::vector<BigInt> terms = generate(spec, upto);
    rep.certificate = QuotientCertificate::PrefixOnly;
    rep.prefix_length = upto + 1;
    BigRat best = make_rat(terms[1], terms[0]);
    std::size_t at = 0;
    for (std::size_t k = 1; k + 1 <= upto; ++k) {
        BigRat r = make_rat(terms[k + 1], terms[k]);
        if (r > best) {
            best = r;
            at = k;
        }
    }
    rep.bound = best;
    rep.achieved_at = at;
    return rep;
}

// ---------------------------------------------------------------------------
// residues modulo q
//
// Lazy iterator over n_k mod q; never materializes n_k (doubleexp is iterated
// modular squaring).

class ResidueIterator {
public:
    ResidueIterator(const SequenceSpec& spec, BigInt modulus)
        : family_(spec.family()), modulus_(std::move(modulus)) {
        if (modulus_ < 1) throw UsageError("modulus must be >= 1");
        switch (family_) {
            case Family::Geometric:
                ratio_ = spec.ratio();
                state_ = mod_floor(BigInt(1), modulus_);
                break;
            case Family::Affine:
            case Family::Factorial:
                state_ = mod_floor(BigInt(1), modulus_);
                break;
            case Family::DoubleExp:
                state_ = mod_floor(BigInt(1), modulus_);
                break;
            case Family::ExplicitList:
                terms_ = &spec.terms();
                break;
            case Family::Patch:
                base_ = std::make_unique<ResidueIterator>(spec.base(), modulus_);
                patch_index_ = spec.patch_index();
                patch_residue_ = mod_floor(spec.patch_value(), modulus_);
                break;
        }
    }

    bool has_next() const {
        if (family_ == Family::ExplicitList) return k_ < terms_->size();
        if (family_ == Family::Patch) return base_->has_next();
        return true;
    }

    std::size_t index() const { return k_; }

    BigInt next() {
        const std::size_t k = k_++;
        switch (family_) {
            case Family::Geometric: {
                BigInt r = state_;
                state_ = mod_floor(state_ * ratio_, modulus_);
                return r;
            }
            case Family::Affine: {
                BigInt r = state_;
                state_ += 1;
                if (state_ == modulus_) state_ = 0;
                return r;
            }
            case Family::Factorial: {
                BigInt r = state_;  // (k+1)! mod q
                state_ = mod_floor(state_ * BigInt(static_cast<unsigned long>(k) + 2), modulus_);
                return r;
            }
            case Family::DoubleExp: {
                BigInt r = state_;
                if (k == 0) {
                    state_ = mod_floor(BigInt(4), modulus_);  // n_1 = 2^(2^1)
                } else {
                    state_ = mod_floor(state_ * state_, modulus_);  // n_{k+1} = n_k^2
                }
                return r;
            }
            case Family::ExplicitList: {
                if (k >= terms_->size()) throw InvalidSpec("explicit list exhausted at index " + std::to_string(k));
                return mod_floor((*terms_)[k], modulus_);
            }
            case Family::Patch: {
                BigInt r = base_->next();
                return k == patch_index_ ? patch_residue_ : r;
            }
        }
        throw Error("internal", "unreachable");
    }

private:
    Family family_;
    BigInt modulus_;
    unsigned long ratio_ = 0;
    BigInt state_;
    const std::vector<BigInt>* terms_ = nullptr;
    std::unique_ptr<ResidueIterator> base_;
    std::size_t patch_index_ = 0;
    BigInt patch_residue_;
    std::size_t k_ = 0;
};

struct ResidueStream {
    BigInt modulus;
    std::vector<BigInt> preperiod;
    std::vector<BigInt> cycle;   // empty iff truncated
    bool exact = true;           // Exact vs TruncatedUnverifiedTail(preperiod.size())
    std::size_t state_cap = 0;   // cap in force when truncated

    std::size_t coverage() const { return preperiod.size() + cycle.size(); }

    // Residue visited at index k; for truncated streams only k < preperiod.size().
    const BigInt& at(std::size_t k) const {
        if (k < preperiod.size()) return preperiod[k];
        if (!exact || cycle.empty()) throw InexactTail("residue stream truncated before index " + std::to_string(k));
        return cycle[(k - preperiod.size()) % cycle.size()];
    }
};

inline constexpr std::size_t kDefaultStateCap = 1'000'000;

inline ResidueStream residues(const SequenceSpec& spec, const BigInt& q, std::size_t state_cap = kDefaultStateCap) {
    if (q < 1) throw UsageError("modulus must be >= 1");
    ResidueStream out;
    out.modulus = q;
    out.state_cap = state_cap;
    if (q == 1) {
        out.cycle = {BigInt(0)};
        return out;
    }
    switch (spec.family()) {
        case Family::Geometric:
        case Family::DoubleExp: {
            // Autonomous maps (r -> c*r, r -> r^2) after a fixed prefix; detect
            // the cycle by hashing stored states.
            ResidueIterator it(spec, q);
            std::vector<BigInt> seen;
            std::map<BigInt, std::size_t> where;
            // For doubleexp the k = 0 entry (residue of 1) does not belong to the
            // autonomous squaring orbit, which starts at n_1 = 4.
            std::size_t orbit_start = spec.family() == Family::DoubleExp ? 1 : 0;
            for (std::size_t k = 0; k < orbit_start; ++k) {
                out.preperiod.push_back(it.next());
            }
            while (seen.size() < state_cap) {
                BigInt r = it.next();
                auto found = where.find(r);
                if (found != where.end()) {
                    std::size_t start = found->second;
                    out.preperiod.insert(out.preperiod.end(), seen.begin(), seen.begin() + static_cast<long>(start));
                    out.cycle.assign(seen.begin() + static_cast<long>(start), seen.end());
                    return out;
                }
                where.emplace(r, seen.size());
                seen.push_back(r);
            }
            out.preperiod.insert(out.preperiod.end(), seen.begin(), seen.end());
            out.exact = false;
            return out;
        }
        case Family::Affine: {
            // n_k = k+1 walks every residue with period q.
            if (mpz_fits_ulong_p(q.get_mpz_t()) && q.get_ui() <= state_cap) {
                unsigned long qe = q.get_ui();
                out.cycle.reserve(qe);
                for (unsigned long v = 1; v <= qe; ++v) out.cycle.push_back(BigInt(v % qe));
                return out;
            }
            ResidueIterator it(spec, q);
            for (std::size_t k = 0; k < state_cap; ++k) out.preperiod.push_back(it.next());
            out.exact = false;
            return out;
        }
        case Family::Factorial: {
            // (k+1)! mod q reaches the absorbing residue 0 once q | (k+1)!.
            ResidueIterator it(spec, q);
            for (std::size_t k = 0; k < state_cap; ++k) {
                BigInt r = it.next();
                if (r == 0) {
                    out.cycle = {BigInt(0)};
                    return out;
                }
                out.preperiod.push_back(r);
            }
            out.exact = false;
            return out;
        }
        case Family::ExplicitList: {
            ResidueIterator it(spec, q);
            while (it.has_next()) out.preperiod.push_back(it.next());
            out.exact = false;  // prefix of an unknown sequence
            return out;
        }
        case Family::Patch: {
            ResidueStream base = residues(spec.base(), q, state_cap);
            const std::size_t j = spec.patch_index();
            BigInt patched = mod_floor(spec.patch_value(), q);
            if (!base.exact) {
                out = base;
                if (j < out.preperiod.size()) out.preperiod[j] = patched;
                return out;
            }
            const std::size_t p = base.preperiod.size();
            const std::size_t c = base.cycle.size();
            const std::size_t unroll = std::max(j + 1, p);
            out.preperiod.reserve(unroll);
            for (std::size_t k = 0; k < unroll; ++k) out.preperiod.push_back(base.at(k));
            out.preperiod[j] = patched;
            const std::size_t shift = (unroll - p) % c;
            out.cycle.reserve(c);
            for (std::size_t i = 0; i < c; ++i) out.cycle.push_back(base.cycle[(shift + i) % c]);
            return out;
        }
    }
    throw Error("internal", "unreachable");
}

}  // namespace escapelab::seqcore

#endif
