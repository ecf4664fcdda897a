#pragma once

// Word-size modular arithmetic and small integer helpers.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>

#include "ltq/error.hpp"

namespace ltq {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

inline u64 mulmod(u64 a, u64 b, u64 p) {
    if (p <= (u64{1} << 32)) return a * b % p;
    return static_cast<u64>(static_cast<u128>(a) * b % p);
}

inline u64 addmod(u64 a, u64 b, u64 p) {
    u64 s = a + b;
    return (s >= p || s < a) ? s - p : s;
}

inline u64 submod(u64 a, u64 b, u64 p) { return a >= b ? a - b : a + (p - b); }

inline u64 powmod(u64 a, u64 e, u64 p) {
    u64 r = 1 % p;
    a %= p;
    while (e) {
        if (e & 1) r = mulmod(r, a, p);
        a = mulmod(a, a, p);
        e >>= 1;
    }
    return r;
}

/// Reduce a signed integer into [0, p).
inline u64 reduce(i64 a, u64 p) {
    i64 r = a % static_cast<i64>(p);
    return r < 0 ? static_cast<u64>(r + static_cast<i64>(p)) : static_cast<u64>(r);
}

/// Inverse of a mod p; a must be a unit.
inline u64 invmod(u64 a, u64 p) {
    i64 t = 0, nt = 1;
    u64 r = p, nr = a % p;
    while (nr) {
        u64 q = r / nr;
        i64 tmp = t - static_cast<i64>(q) * nt;
        t = nt;
        nt = tmp;
        u64 rr = r - q * nr;
        r = nr;
        nr = rr;
    }
    if (r != 1) throw error(errc::invalid_argument, "invmod: not a unit");
    return t < 0 ? static_cast<u64>(t + static_cast<i64>(p)) : static_cast<u64>(t);
}

/// Jacobi symbol (a/n) for odd n.
inline int jacobi(u64 a, u64 n) {
    a %= n;
    int s = 1;
    while (a) {
        int tz = std::countr_zero(a);
        a >>= tz;
        if ((tz & 1) && ((n & 7) == 3 || (n & 7) == 5)) s = -s;
        if ((a & 3) == 3 && (n & 3) == 3) s = -s;
        std::swap(a, n);
        a %= n;
    }
    return n == 1 ? s : 0;
}

inline int jacobi(i64 a, u64 n) { return jacobi(reduce(a, n), n); }

/// Smallest positive quadratic non-residue mod an odd prime p.
inline u64 smallest_nonresidue(u64 p) {
    for (u64 g = 2;; ++g)
        if (jacobi(g, p) == -1) return g;
}

/// Square root mod an odd prime p of a residue a (Tonelli-Shanks).
inline u64 sqrtmod(u64 a, u64 p) {
    a %= p;
    if (a == 0) return 0;
    if ((p & 3) == 3) return powmod(a, (p + 1) / 4, p);
    u64 q = p - 1;
    int s = std::countr_zero(q);
    q >>= s;
    u64 z = smallest_nonresidue(p);
    u64 m = static_cast<u64>(s), c = powmod(z, q, p), t = powmod(a, q, p), r = powmod(a, (q + 1) / 2, p);
    while (t != 1) {
        u64 i = 0, tt = t;
        while (tt != 1) {
            tt = mulmod(tt, tt, p);
            ++i;
        }
        u64 b = c;
        for (u64 j = 0; j + i + 1 < m; ++j) b = mulmod(b, b, p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    return r;
}

inline u64 isqrt(u64 n) {
    u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
    // compare by division so r + 1 near 2^32 cannot overflow
    while (r > 0 && r > n / r) --r;
    while (r + 1 <= n / (r + 1)) ++r;
    return r;
}

inline u128 isqrt(u128 n) {
    u128 r = static_cast<u128>(std::sqrt(static_cast<long double>(n)));
    while (r > 0 && r > n / r) --r;
    while (r + 1 <= n / (r + 1)) ++r;
    return r;
}

inline bool is_square(u64 n, u64* root = nullptr) {
    u64 r = isqrt(n);
    if (root) *root = r;
    return r * r == n;
}

/// Deterministic Miller-Rabin for 64-bit n.
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 q : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37})
        if (n % q == 0) return n == q;
    u64 d = n - 1;
    int s = std::countr_zero(d);
    d >>= s;
    for (u64 a : {2, 325, 9375, 28178, 450775, 9780504, 1795265022}) {
        u64 x = powmod(a % n, d, n);
        if (x == 0 || x == 1 || x == n - 1) continue;
        bool comp = true;
        for (int i = 1; i < s && comp; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) comp = false;
        }
        if (comp) return false;
    }
    return true;
}

/// Prime factorization by trial division; fine for levels and discriminant parameters.
inline std::map<u64, int> factor(u64 n) {
    std::map<u64, int> f;
    for (u64 q = 2; q * q <= n; q += (q == 2 ? 1 : 2))
        while (n % q == 0) {
            ++f[q];
            n /= q;
        }
    if (n > 1) ++f[n];
    return f;
}

inline bool is_squarefree(u64 n) {
    if (n == 0) return false;
    for (auto [q, e] : factor(n))
        if (e > 1) return false;
    return true;
}

inline u64 ipow(u64 b, unsigned e) {
    u64 r = 1;
    while (e--) r *= b;
    return r;
}

}  // namespace ltq
