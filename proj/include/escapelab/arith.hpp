#ifndef ESCAPELAB_ARITH_HPP
#define ESCAPELAB_ARITH_HPP

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "escapelab/errors.hpp"

namespace escapelab {

using BigInt = mpz_class;
using BigRat = mpq_class;

inline BigInt big_factorial(unsigned long n) {
    BigInt r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

inline BigInt big_pow2(unsigned long e) {
    BigInt r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
    return r;
}

// Nonnegative remainder a mod q for q > 0.
inline BigInt mod_floor(const BigInt& a, const BigInt& q) {
    BigInt r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), q.get_mpz_t());
    return r;
}

inline BigInt floor_of(const BigRat& x) {
    BigInt r;
    mpz_fdiv_q(r.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
    return r;
}

// x - floor(x), exact, in [0, 1).
inline BigRat frac_part(const BigRat& x) {
    BigRat f = x - BigRat(floor_of(x));
    f.canonicalize();
    return f;
}

// Nearest integer, ties rounded up.
inline BigInt round_nearest(const BigRat& x) { return floor_of(x + BigRat(1, 2)); }

inline BigRat make_rat(const BigInt& num, const BigInt& den) {
    BigRat r(num, den);
    r.canonicalize();
    return r;
}

// Exact dyadic decomposition of a finite nonnegative double: x == num / 2^exp.
struct Dyadic {
    BigInt num;
    unsigned long exp = 0;
};

inline Dyadic dyadic_of(double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw UsageError("dyadic_of: need a finite nonnegative value");
    if (x == 0.0) return {BigInt(0), 0};
    int e2 = 0;
    double m = std::frexp(x, &e2);           // x = m * 2^e2, m in [0.5, 1)
    double scaled = std::ldexp(m, 53);       // integer-valued double
    BigInt num(scaled);
    long exp = 53 - e2;
    while (exp > 0 && mpz_even_p(num.get_mpz_t())) {
        num >>= 1;
        --exp;
    }
    if (exp < 0) {                            // x was >= 2^53; exact integer shift
        num <<= static_cast<unsigned long>(-exp);
        exp = 0;
    }
    return {num, static_cast<unsigned long>(exp)};
}

inline BigRat rat_of_double(double x) {
    const bool neg = x < 0;
    Dyadic d = dyadic_of(neg ? -x : x);
    BigRat r = make_rat(neg ? -d.num : d.num, big_pow2(d.exp));
    return r;
}

// |e^{2 pi i f} - 1| = 2 sin(pi f) for f in [0, 1]; folded across 1/2 so the
// sine argument stays small where cancellation would hurt.
inline double two_sin_pi(double f) {
    const double g = f <= 0.5 ? f : 1.0 - f;
    return 2.0 * std::sin(M_PI * g);
}

inline double two_sin_pi(const BigRat& f) {
    BigRat g = f;
    if (g > BigRat(1, 2)) g = BigRat(1) - g;
    return 2.0 * std::sin(M_PI * g.get_d());
}

// String helpers for reports.
inline std::string to_string(const BigInt& z) { return z.get_str(); }
inline std::string to_string(const BigRat& q) { return q.get_num().get_str() + "/" + q.get_den().get_str(); }

}  // namespace escapelab

#endif
