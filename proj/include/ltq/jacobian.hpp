#pragma once

// Mumford arithmetic on the Jacobian of y^2 = F(x) over F_p, F squarefree of
// degree 5 (one point at infinity) or degree 6 with non-square leading
// coefficient (two conjugate points at infinity). In both models every class
// has a unique reduced representative with deg u <= 2, and one reduction
// step after composition suffices.

#include <optional>
#include <random>

#include "ltq/counting.hpp"
#include "ltq/poly.hpp"

namespace ltq {

/// (u, v) with u = x^2 + u1 x + u0, v = v1 x + v0 when deg = 2;
/// u = x + u0, v = v0 when deg = 1; the identity (1, 0) when deg = 0.
struct jac_elem {
    u64 u1 = 0, u0 = 0, v1 = 0, v0 = 0;
    int deg = 0;
    friend bool operator==(const jac_elem&, const jac_elem&) = default;
    bool is_identity() const { return deg == 0; }
};

/// Exact 128-bit key for hashing (requires p < 2^31).
inline u128 pack(const jac_elem& e) {
    u64 top = e.deg == 2 ? e.u1 : (u64{1} << 31) + static_cast<u64>(e.deg);
    return (static_cast<u128>(top) << 96) | (static_cast<u128>(e.u0) << 64) | (static_cast<u128>(e.v1) << 32) | e.v0;
}

class jacobian {
public:
    /// F must be squarefree with deg 5, or deg 6 with a non-square leading coefficient.
    jacobian(const fpoly& F, u64 p) : F_(p), f_(F) {
        for (int i = 0; i <= 6; ++i) fc_[i] = i <= F.deg ? F.c[i] : 0;
    }

    u64 prime() const { return F_.p; }
    const fpoly& curve() const { return f_; }
    jac_elem identity() const { return {}; }

    jac_elem negate(const jac_elem& e) const {
        jac_elem r = e;
        r.v1 = F_.neg(e.v1);
        r.v0 = F_.neg(e.v0);
        return r;
    }

    bool is_valid(const jac_elem& e) const {
        if (e.deg == 0) return e.u1 == 0 && e.u0 == 0 && e.v1 == 0 && e.v0 == 0;
        auto [u, v] = to_poly(e);
        return pmod(psub(pmul(v, v, F_.p), f_, F_.p), u, F_.p).is_zero();
    }

    jac_elem add(const jac_elem& a, const jac_elem& b) const {
        if (a.deg == 0) return b;
        if (b.deg == 0) return a;
        jac_elem r;
        if (a.deg == 2 && b.deg == 2) {
            if (a.u1 == b.u1 && a.u0 == b.u0) {
                if (a.v1 == b.v1 && a.v0 == b.v0) {
                    if (fast_double(a, &r)) return r;
                } else if (a.v1 == F_.neg(b.v1) && a.v0 == F_.neg(b.v0)) {
                    return identity();
                }
            } else if (fast_add(a, b, &r)) {
                return r;
            }
        }
        return cantor(a, b);
    }

    jac_elem dbl(const jac_elem& a) const { return add(a, a); }

    /// n * e for any signed n.
    jac_elem mul(jac_elem e, i128 n) const {
        if (n < 0) {
            e = negate(e);
            n = -n;
        }
        u128 k = static_cast<u128>(n);
        jac_elem r = identity();
        int top = 127;
        while (top >= 0 && !((k >> top) & 1)) --top;
        for (int i = top; i >= 0; --i) {
            r = dbl(r);
            if ((k >> i) & 1) r = add(r, e);
        }
        return r;
    }

    /// A uniformly chosen element among classes with deg u = 2.
    template <class Rng>
    jac_elem random_element(Rng& rng) const {
        const u64 p = F_.p;
        std::uniform_int_distribution<u64> dist(0, p - 1);
        for (;;) {
            u64 a = dist(rng), b = dist(rng);
            u64 disc = F_.sub(F_.mul(a, a), F_.mul(4 % p, b));
            if (disc == 0) continue;
            u64 inv2 = (p + 1) / 2;
            jac_elem e;
            e.deg = 2;
            e.u1 = a;
            e.u0 = b;
            if (jacobi(disc, p) == 1) {
                u64 s = sqrtmod(disc, p);
                u64 r1 = F_.mul(F_.sub(s, a), inv2), r2 = F_.mul(F_.sub(F_.neg(s), a), inv2);
                u64 f1 = peval(f_, r1, p), f2 = peval(f_, r2, p);
                if (jacobi(f1, p) == -1 || jacobi(f2, p) == -1) continue;
                u64 y1 = sqrtmod(f1, p), y2 = sqrtmod(f2, p);
                if (rng() & 1) y1 = F_.neg(y1);
                if (rng() & 1) y2 = F_.neg(y2);
                e.v1 = F_.mul(F_.sub(y2, y1), F_.inv(F_.sub(r2, r1)));
                e.v0 = F_.sub(y1, F_.mul(e.v1, r1));
            } else {
                // Roots r = (-a + t)/2 with t^2 = disc; evaluate F(r) = A + B t.
                u64 A = 0, B = 0;
                u64 ra = F_.mul(F_.neg(a), inv2), rb = inv2;
                for (int i = f_.deg; i >= 0; --i) {
                    u64 nA = F_.add(F_.mul(A, ra), F_.mul(disc, F_.mul(B, rb)));
                    u64 nB = F_.add(F_.mul(A, rb), F_.mul(B, ra));
                    A = F_.add(nA, f_.c[i]);
                    B = nB;
                }
                u64 n2 = F_.sub(F_.mul(A, A), F_.mul(disc, F_.mul(B, B)));
                if (n2 != 0 && jacobi(n2, p) == -1) continue;
                u64 gam, eta;
                if (B == 0) {
                    if (A == 0 || jacobi(A, p) == 1) {
                        gam = sqrtmod(A, p);
                        eta = 0;
                    } else {
                        gam = 0;
                        eta = sqrtmod(F_.mul(A, F_.inv(disc)), p);
                    }
                } else {
                    u64 n = sqrtmod(n2, p);
                    u64 h = F_.mul(F_.add(A, n), inv2);
                    if (h == 0 || jacobi(h, p) != 1) h = F_.mul(F_.sub(A, n), inv2);
                    gam = sqrtmod(h, p);
                    eta = F_.mul(B, F_.inv(F_.add(gam, gam)));
                }
                if (rng() & 1) {
                    gam = F_.neg(gam);
                    eta = F_.neg(eta);
                }
                e.v1 = F_.add(eta, eta);
                e.v0 = F_.add(gam, F_.mul(eta, a));
            }
            return e;
        }
    }

    std::pair<fpoly, fpoly> to_poly(const jac_elem& e) const {
        fpoly u, v;
        if (e.deg == 0) {
            u = fpoly::constant(1);
        } else if (e.deg == 1) {
            u = fpoly::x_plus(e.u0);
            v = fpoly::constant(e.v0);
        } else {
            u.c = {e.u0, e.u1, 1};
            u.deg = 2;
            v.c = {e.v0, e.v1};
            v.deg = 1;
            v.trim();
        }
        return {u, v};
    }

    jac_elem from_poly(const fpoly& u, const fpoly& v) const {
        jac_elem e;
        e.deg = u.deg;
        if (u.deg >= 1) e.u0 = u.c[0];
        if (u.deg == 2) e.u1 = u.c[1];
        if (v.deg >= 0) e.v0 = v.c[0];
        if (u.deg == 2 && v.deg >= 1) e.v1 = v.c[1];
        return e;
    }

private:
    // Shared tail of the fast paths: v = v1 + u1*k with k = (K1 x + K0)/N,
    // u = x^4 + U3 x^3 + U2 x^2 + U1 x + U0; reduces once to degree 2.
    bool finish(const jac_elem& a, u64 K1, u64 K0, u64 N, u64 U3, u64 U2, jac_elem* out) const {
        const modp& F = F_;
        u64 V3 = K1;
        u64 V2 = F.add(K0, F.mul(a.u1, K1));
        u64 V1 = F.add(F.mul(N, a.v1), F.add(F.mul(a.u1, K0), F.mul(a.u0, K1)));
        u64 V0 = F.add(F.mul(N, a.v0), F.mul(a.u0, K0));
        u64 N2 = F.mul(N, N);
        u64 G6 = F.sub(F.mul(N2, fc_[6]), F.mul(V3, V3));
        if (G6 == 0) return false;
        u64 G5 = F.sub(F.mul(N2, fc_[5]), F.mul(2, F.mul(V3, V2)));
        u64 G4 = F.sub(F.mul(N2, fc_[4]), F.add(F.mul(V2, V2), F.mul(2, F.mul(V3, V1))));
        u64 Q2 = G6;
        u64 Q1 = F.sub(G5, F.mul(Q2, U3));
        u64 Q0 = F.sub(F.sub(G4, F.mul(Q2, U2)), F.mul(Q1, U3));
        u64 inv = F.inv(F.mul(N, Q2));
        u64 iq = F.mul(N, inv), iN = F.mul(Q2, inv);
        u64 a1 = F.mul(Q1, iq), b1 = F.mul(Q0, iq);
        // V mod (x^2 + a1 x + b1), using x^3 = (a1^2 - b1) x + a1 b1.
        u64 r1 = F.add(F.sub(F.mul(V3, F.sub(F.mul(a1, a1), b1)), F.mul(V2, a1)), V1);
        u64 r0 = F.add(F.sub(F.mul(V3, F.mul(a1, b1)), F.mul(V2, b1)), V0);
        out->deg = 2;
        out->u1 = a1;
        out->u0 = b1;
        out->v1 = F.neg(F.mul(r1, iN));
        out->v0 = F.neg(F.mul(r0, iN));
        return true;
    }

    bool fast_add(const jac_elem& a, const jac_elem& b, jac_elem* out) const {
        const modp& F = F_;
        u64 al = F.sub(a.u1, b.u1), be = F.sub(a.u0, b.u0);
        // Resultant of u_a and u_b, and (u_a mod u_b)^{-1} * N = i1 x + i0.
        u64 N = F.add(F.sub(F.mul(F.mul(al, al), b.u0), F.mul(F.mul(al, be), b.u1)), F.mul(be, be));
        if (N == 0) return false;
        u64 i1 = F.neg(al), i0 = F.sub(be, F.mul(al, b.u1));
        u64 w1 = F.sub(b.v1, a.v1), w0 = F.sub(b.v0, a.v0);
        u64 t = F.mul(w1, i1);
        u64 K1 = F.sub(F.add(F.mul(w1, i0), F.mul(w0, i1)), F.mul(b.u1, t));
        u64 K0 = F.sub(F.mul(w0, i0), F.mul(b.u0, t));
        u64 U3 = F.add(a.u1, b.u1);
        u64 U2 = F.add(F.add(a.u0, b.u0), F.mul(a.u1, b.u1));
        return finish(a, K1, K0, N, U3, U2, out);
    }

    bool fast_double(const jac_elem& a, jac_elem* out) const {
        const modp& F = F_;
        // h = (F - v^2)/u mod u.
        u64 G[7];
        for (int i = 0; i < 7; ++i) G[i] = fc_[i];
        G[2] = F.sub(G[2], F.mul(a.v1, a.v1));
        G[1] = F.sub(G[1], F.mul(2, F.mul(a.v1, a.v0)));
        G[0] = F.sub(G[0], F.mul(a.v0, a.v0));
        u64 h[5];
        h[4] = G[6];
        h[3] = F.sub(G[5], F.mul(a.u1, h[4]));
        h[2] = F.sub(F.sub(G[4], F.mul(a.u1, h[3])), F.mul(a.u0, h[4]));
        h[1] = F.sub(F.sub(G[3], F.mul(a.u1, h[2])), F.mul(a.u0, h[3]));
        h[0] = F.sub(F.sub(G[2], F.mul(a.u1, h[1])), F.mul(a.u0, h[2]));
        for (int d = 4; d >= 2; --d) {
            h[d - 1] = F.sub(h[d - 1], F.mul(a.u1, h[d]));
            h[d - 2] = F.sub(h[d - 2], F.mul(a.u0, h[d]));
        }
        u64 t1 = h[1], t0 = h[0];
        // (2v)^{-1} mod u, scaled by N.
        u64 al = F.add(a.v1, a.v1), be = F.add(a.v0, a.v0);
        u64 N = F.add(F.sub(F.mul(F.mul(al, al), a.u0), F.mul(F.mul(al, be), a.u1)), F.mul(be, be));
        if (N == 0) return false;
        u64 i1 = F.neg(al), i0 = F.sub(be, F.mul(al, a.u1));
        u64 t = F.mul(t1, i1);
        u64 K1 = F.sub(F.add(F.mul(t1, i0), F.mul(t0, i1)), F.mul(a.u1, t));
        u64 K0 = F.sub(F.mul(t0, i0), F.mul(a.u0, t));
        u64 U3 = F.add(a.u1, a.u1);
        u64 U2 = F.add(F.add(a.u0, a.u0), F.mul(a.u1, a.u1));
        return finish(a, K1, K0, N, U3, U2, out);
    }

    jac_elem cantor(const jac_elem& a, const jac_elem& b) const {
        const u64 p = F_.p;
        auto [u1, v1] = to_poly(a);
        auto [u2, v2] = to_poly(b);
        fpoly e1, e2;
        fpoly d1 = pxgcd(u1, u2, p, &e1, &e2);
        fpoly d, s1, s2, s3;
        if (d1.deg == 0) {
            d = d1;
            s1 = e1;
            s2 = e2;
        } else {
            fpoly c1, c2;
            d = pxgcd(d1, padd(v1, v2, p), p, &c1, &c2);
            s1 = pmul(c1, e1, p);
            s2 = pmul(c1, e2, p);
            s3 = c2;
        }
        fpoly u = pdiv(pmul(u1, u2, p), pmul(d, d, p), p);
        fpoly v = padd(pmul(pmul(s1, u1, p), v2, p), pmul(pmul(s2, u2, p), v1, p), p);
        if (!s3.is_zero()) v = padd(v, pmul(s3, padd(pmul(v1, v2, p), f_, p), p), p);
        v = pmod(pdiv(v, d, p), u, p);
        while (u.deg > 2) {
            fpoly un = pmonic(pdiv(psub(f_, pmul(v, v, p), p), u, p), p);
            v = pmod(pneg(v, p), un, p);
            u = un;
        }
        return from_poly(u, v);
    }

    modp F_;
    fpoly f_;
    u64 fc_[7] = {};
};

/// t^6 F(r + 1/t): moves x = r to infinity.
inline fpoly shift_to_infinity(const fpoly& F, u64 r, u64 p) {
    // (r t + 1)^i t^(6-i), accumulated.
    fpoly out;
    out.deg = 6;
    fpoly lin;
    lin.c = {1, r % p};
    lin.deg = r % p ? 1 : 0;
    fpoly pw = fpoly::constant(1);
    for (int i = 0; i <= 6; ++i) {
        if (i <= F.deg && F.c[i])
            for (int j = 0; j <= pw.deg; ++j) {
                int e = j + 6 - i;
                out.c[e] = addmod(out.c[e], mulmod(F.c[i], pw.c[j], p), p);
            }
        pw = pmul(pw, lin, p);
    }
    out.trim();
    return out;
}

/// An isomorphic model of y^2 = F(x) suitable for `jacobian`.
template <class Rng>
fpoly working_model(const fpoly& F, u64 p, Rng& rng) {
    if (F.deg == 5) return F;
    u64 r;
    if (find_root(F, p, rng, &r)) return shift_to_infinity(F, r, p);
    if (jacobi(F.lead(), p) == -1) return F;
    std::uniform_int_distribution<u64> dist(0, p - 1);
    for (;;) {
        u64 a = dist(rng);
        if (jacobi(peval(F, a, p), p) == -1) return shift_to_infinity(F, a, p);
    }
}

}  // namespace ltq
