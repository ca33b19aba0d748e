#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace chainscale {

// Nonnegative real with a separate power-of-two exponent so products of
// combinatorial terms (e.g. binomial(10^4, 5*10^3) and committee tail
// coefficients) stay representable far outside the double range.
struct WideReal {
    double mant = 0.0;   // 0, or normalized into [0.5, 1)
    std::int64_t exp2 = 0;

    WideReal() = default;

    explicit WideReal(double v) {
        if (v <= 0.0) {
            mant = 0.0;
            exp2 = 0;
            return;
        }
        int e = 0;
        mant = std::frexp(v, &e);
        exp2 = e;
    }

    static WideReal zero() { return WideReal(); }

    static WideReal one() { return WideReal(1.0); }

    static WideReal from_log(double ln_v) {
        // exp(ln_v) = m * 2^e with m in [0.5, 1)
        const double log2v = ln_v / 0.6931471805599453;
        const double e = std::floor(log2v) + 1.0;
        WideReal r;
        r.mant = std::exp2(log2v - e);
        r.exp2 = static_cast<std::int64_t>(e);
        r.normalize();
        return r;
    }

    bool is_zero() const { return mant == 0.0; }

    void normalize() {
        if (mant == 0.0) {
            exp2 = 0;
            return;
        }
        int e = 0;
        mant = std::frexp(mant, &e);
        exp2 += e;
    }

    WideReal operator*(const WideReal& o) const {
        if (is_zero() || o.is_zero())
            return zero();
        WideReal r;
        r.mant = mant * o.mant;
        r.exp2 = exp2 + o.exp2;
        r.normalize();
        return r;
    }

    WideReal operator/(const WideReal& o) const {
        if (is_zero())
            return zero();
        WideReal r;
        r.mant = mant / o.mant;
        r.exp2 = exp2 - o.exp2;
        r.normalize();
        return r;
    }

    WideReal operator+(const WideReal& o) const {
        if (is_zero())
            return o;
        if (o.is_zero())
            return *this;
        const WideReal* big = this;
        const WideReal* small = &o;
        if (big->exp2 < small->exp2)
            std::swap(big, small);
        const std::int64_t shift = big->exp2 - small->exp2;
        if (shift > 1100)
            return *big;
        WideReal r;
        r.mant = big->mant + std::ldexp(small->mant, -static_cast<int>(shift));
        r.exp2 = big->exp2;
        r.normalize();
        return r;
    }

    WideReal& operator+=(const WideReal& o) {
        *this = *this + o;
        return *this;
    }

    // Lossy by design: collapses to 0 / inf outside the double range.
    double to_double() const {
        if (is_zero())
            return 0.0;
        if (exp2 > 1023)
            return std::numeric_limits<double>::infinity();
        if (exp2 < -1070)
            return 0.0;
        return std::ldexp(mant, static_cast<int>(exp2));
    }

    double log() const {
        if (is_zero())
            return -std::numeric_limits<double>::infinity();
        return std::log(mant) + 0.6931471805599453 * static_cast<double>(exp2);
    }
};

inline double log_factorial(std::int64_t n) {
    return std::lgamma(static_cast<double>(n) + 1.0);
}

inline double log_binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n || n < 0)
        return -std::numeric_limits<double>::infinity();
    if (k == 0 || k == n)
        return 0.0;
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

inline WideReal wide_binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n || n < 0)
        return WideReal::zero();
    return WideReal::from_log(log_binomial(n, k));
}

// pmf[x] = C(n,x) p^x (1-p)^(n-x), evaluated in log space per term so tails
// keep full relative precision.
inline std::vector<double> binomial_pmf(std::int64_t n, double p) {
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
    if (p <= 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (p >= 1.0) {
        pmf[static_cast<std::size_t>(n)] = 1.0;
        return pmf;
    }
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    for (std::int64_t x = 0; x <= n; ++x)
        pmf[static_cast<std::size_t>(x)] =
            std::exp(log_binomial(n, x) + static_cast<double>(x) * lp +
                     static_cast<double>(n - x) * lq);
    return pmf;
}

// pmf[x] = C(M,x) C(mu-M, n-x) / C(mu,n): x misbehaving in a draw of n from a
// population of mu containing M misbehaving.
inline std::vector<double> hypergeometric_pmf(std::int64_t mu, std::int64_t m, std::int64_t n) {
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
    const double denom = log_binomial(mu, n);
    for (std::int64_t x = 0; x <= n; ++x) {
        if (x > m || n - x > mu - m)
            continue;
        pmf[static_cast<std::size_t>(x)] =
            std::exp(log_binomial(m, x) + log_binomial(mu - m, n - x) - denom);
    }
    return pmf;
}

inline std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0)
            continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            out[i + j] += a[i] * b[j];
    }
    return out;
}

inline std::vector<WideReal> convolve(const std::vector<WideReal>& a,
                                      const std::vector<WideReal>& b) {
    std::vector<WideReal> out(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero())
            continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (b[j].is_zero())
                continue;
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

// Sums smallest-first so far tail values are not swallowed by the head.
inline double tail_sum(const std::vector<double>& pmf, std::size_t from) {
    double s = 0.0;
    if (from >= pmf.size())
        return 0.0;
    for (std::size_t i = pmf.size(); i-- > from;)
        s += pmf[i];
    return s;
}

inline double total_sum(const std::vector<double>& pmf) {
    return tail_sum(pmf, 0);
}

} // namespace chainscale
