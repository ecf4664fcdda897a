#pragma once

// Dense polynomials of small degree over a prime field.

#include <algorithm>
#include <array>
#include <cassert>
#include <random>

#include "ltq/arith.hpp"

namespace ltq {

struct fpoly {
    static constexpr int cap = 13;
    std::array<u64, cap> c{};
    int deg = -1;  // -1 for the zero polynomial

    fpoly() = default;
    static fpoly constant(u64 a) {
        fpoly r;
        r.c[0] = a;
        r.deg = a ? 0 : -1;
        return r;
    }
    static fpoly x_plus(u64 a) {
        fpoly r;
        r.c[0] = a;
        r.c[1] = 1;
        r.deg = 1;
        return r;
    }
    bool is_zero() const { return deg < 0; }
    u64 lead() const { return deg < 0 ? 0 : c[deg]; }
    void trim() {
        while (deg >= 0 && c[deg] == 0) --deg;
    }
    friend bool operator==(const fpoly& a, const fpoly& b) {
        if (a.deg != b.deg) return false;
        for (int i = 0; i <= a.deg; ++i)
            if (a.c[i] != b.c[i]) return false;
        return true;
    }
};

inline fpoly padd(const fpoly& a, const fpoly& b, u64 p) {
    fpoly r;
    r.deg = std::max(a.deg, b.deg);
    for (int i = 0; i <= r.deg; ++i) r.c[i] = addmod(a.c[i], b.c[i], p);
    r.trim();
    return r;
}

inline fpoly psub(const fpoly& a, const fpoly& b, u64 p) {
    fpoly r;
    r.deg = std::max(a.deg, b.deg);
    for (int i = 0; i <= r.deg; ++i) r.c[i] = submod(a.c[i], b.c[i], p);
    r.trim();
    return r;
}

inline fpoly pneg(const fpoly& a, u64 p) {
    fpoly r = a;
    for (int i = 0; i <= r.deg; ++i) r.c[i] = r.c[i] ? p - r.c[i] : 0;
    return r;
}

inline fpoly pscale(const fpoly& a, u64 s, u64 p) {
    fpoly r = a;
    for (int i = 0; i <= r.deg; ++i) r.c[i] = mulmod(r.c[i], s, p);
    r.trim();
    return r;
}

inline fpoly pmul(const fpoly& a, const fpoly& b, u64 p) {
    fpoly r;
    if (a.deg < 0 || b.deg < 0) return r;
    assert(a.deg + b.deg < fpoly::cap);
    r.deg = a.deg + b.deg;
    for (int i = 0; i <= a.deg; ++i) {
        if (!a.c[i]) continue;
        for (int j = 0; j <= b.deg; ++j) r.c[i + j] = addmod(r.c[i + j], mulmod(a.c[i], b.c[j], p), p);
    }
    r.trim();
    return r;
}

/// a = q*b + r with deg r < deg b; b nonzero.
inline void pdivrem(const fpoly& a, const fpoly& b, u64 p, fpoly* q, fpoly* r) {
    fpoly rem = a, quo;
    u64 inv = invmod(b.lead(), p);
    quo.deg = std::max(-1, a.deg - b.deg);
    for (int d = rem.deg; d >= b.deg; --d) {
        u64 t = mulmod(rem.c[d], inv, p);
        quo.c[d - b.deg] = t;
        if (!t) continue;
        for (int j = 0; j <= b.deg; ++j) rem.c[d - b.deg + j] = submod(rem.c[d - b.deg + j], mulmod(t, b.c[j], p), p);
    }
    rem.deg = std::min(rem.deg, b.deg - 1);
    rem.trim();
    quo.trim();
    if (q) *q = quo;
    if (r) *r = rem;
}

inline fpoly pmod(const fpoly& a, const fpoly& b, u64 p) {
    fpoly r;
    pdivrem(a, b, p, nullptr, &r);
    return r;
}

inline fpoly pdiv(const fpoly& a, const fpoly& b, u64 p) {
    fpoly q;
    pdivrem(a, b, p, &q, nullptr);
    return q;
}

inline fpoly pmonic(const fpoly& a, u64 p) {
    if (a.deg < 0 || a.lead() == 1) return a;
    return pscale(a, invmod(a.lead(), p), p);
}

inline u64 peval(const fpoly& a, u64 x, u64 p) {
    u64 r = 0;
    for (int i = a.deg; i >= 0; --i) r = addmod(mulmod(r, x, p), a.c[i], p);
    return r;
}

inline fpoly pderiv(const fpoly& a, u64 p) {
    fpoly r;
    for (int i = 1; i <= a.deg; ++i) r.c[i - 1] = mulmod(a.c[i], static_cast<u64>(i) % p, p);
    r.deg = a.deg - 1;
    r.trim();
    return r;
}

/// Monic gcd.
inline fpoly pgcd(fpoly a, fpoly b, u64 p) {
    while (!b.is_zero()) {
        fpoly r = pmod(a, b, p);
        a = b;
        b = r;
    }
    return pmonic(a, p);
}

/// Monic d = gcd(a, b) together with s, t such that s*a + t*b = d.
inline fpoly pxgcd(const fpoly& a, const fpoly& b, u64 p, fpoly* s, fpoly* t) {
    fpoly r0 = a, r1 = b, s0 = fpoly::constant(1), s1, t0, t1 = fpoly::constant(1);
    while (!r1.is_zero()) {
        fpoly q, r;
        pdivrem(r0, r1, p, &q, &r);
        fpoly s2 = psub(s0, pmul(q, s1, p), p);
        fpoly t2 = psub(t0, pmul(q, t1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    if (r0.is_zero()) {
        *s = s0;
        *t = t0;
        return r0;
    }
    u64 inv = invmod(r0.lead(), p);
    *s = pscale(s0, inv, p);
    *t = pscale(t0, inv, p);
    return pscale(r0, inv, p);
}

inline fpoly pmulmod(const fpoly& a, const fpoly& b, const fpoly& m, u64 p) {
    return pmod(pmul(a, b, p), m, p);
}

inline fpoly ppowmod(fpoly base, u64 e, const fpoly& m, u64 p) {
    fpoly r = pmod(fpoly::constant(1), m, p);
    base = pmod(base, m, p);
    while (e) {
        if (e & 1) r = pmulmod(r, base, m, p);
        base = pmulmod(base, base, m, p);
        e >>= 1;
    }
    return r;
}

/// Product of the distinct linear factors of f (f nonzero).
inline fpoly linear_part(const fpoly& f, u64 p) {
    fpoly xp = ppowmod(fpoly::x_plus(0), p, f, p);
    return pgcd(f, psub(xp, fpoly::x_plus(0), p), p);
}

/// A root of f in F_p, or false if there is none. Randomized equal-degree splitting.
template <class Rng>
bool find_root(const fpoly& f, u64 p, Rng& rng, u64* root) {
    fpoly g = linear_part(f, p);
    if (g.deg < 1) return false;
    std::uniform_int_distribution<u64> dist(0, p - 1);
    while (g.deg > 1) {
        fpoly h = ppowmod(fpoly::x_plus(dist(rng)), (p - 1) / 2, g, p);
        h = pgcd(g, psub(h, fpoly::constant(1), p), p);
        if (h.deg >= 1 && h.deg < g.deg) g = (2 * h.deg <= g.deg) ? h : pdiv(g, h, p);
    }
    *root = g.c[0] ? p - g.c[0] : 0;
    return true;
}

}  // namespace ltq
