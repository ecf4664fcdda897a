#pragma once

// Curve specifications, per-prime trace records and the reduction test.

#include <array>
#include <cstdlib>
#include <string>
#include <vector>

#include "ltq/arith.hpp"
#include "ltq/error.hpp"
#include "ltq/poly.hpp"

namespace ltq {

/// y^2 = f(x) = c0 + c1 x + ... + c6 x^6, modelling the abelian surface of a
/// level-N newform whose coefficient field is Q(sqrt D).
struct curve_spec {
    std::string label;
    u64 N = 1;
    u64 D = 1;
    std::array<i64, 7> coeffs{};
};

/// Throws error(invalid_argument) naming the violated field.
inline void validate(const curve_spec& c) {
    if (c.label.empty()) throw error(errc::invalid_argument, "curve label is empty");
    if (c.N == 0) throw error(errc::invalid_argument, c.label + ": N must be positive");
    if (c.D == 0 || !is_squarefree(c.D)) throw error(errc::invalid_argument, c.label + ": D must be square-free");
    if (c.coeffs[6] == 0) throw error(errc::invalid_argument, c.label + ": coeffs: c6 must be nonzero");
}

inline const std::vector<curve_spec>& builtin_curves() {
    static const std::vector<curve_spec> v = {
        {"C_29", 29, 2, {8, -4, 13, -6, 7, -2, 1}},
        {"C_43", 43, 2, {-7, 10, -13, -4, 7, -2, -3}},
        {"C_55", 55, 2, {-3, 4, -4, -2, 16, 4, -3}},
        {"C_23", 23, 5, {-11, 32, -58, 50, -23, 2, 1}},
        {"C_87", 87, 5, {3, 6, 11, 6, 2, 0, -1}},
        {"C_167", 167, 5, {7, -16, 22, -14, 3, 2, -1}},
    };
    return v;
}

inline const curve_spec& builtin_curve(const std::string& label) {
    for (const auto& c : builtin_curves())
        if (c.label == label) return c;
    throw error(errc::invalid_argument, "unknown curve " + label);
}

/// Coefficients (X_p, Y_p) of L_p(T) = p^2T^4 + pX T^3 + Y T^2 + X T + 1.
struct trace_record {
    u64 p = 0;
    i64 X = 0;
    i64 Y = 0;
    friend bool operator==(const trace_record&, const trace_record&) = default;
};

/// L_p(1) = #J(F_p).
inline i128 jacobian_order_of(const trace_record& r) {
    i128 p = r.p;
    return 1 + r.X + r.Y + p * r.X + p * p;
}

/// Weil-bound checks on a record.
inline bool satisfies_weil(const trace_record& r) {
    i128 p = r.p, X = r.X, Y = r.Y;
    if (X * X > 16 * p) return false;
    if (4 * Y > X * X + 8 * p) return false;
    // Y + 2p >= 2|X| sqrt(p)
    i128 lhs = Y + 2 * p;
    if (lhs < 0) return false;
    return lhs * lhs >= 4 * X * X * p;
}

/// z_p = |Z_p| / sqrt(D), from D z^2 = X^2 - 4Y + 8p.
inline u64 z_from_record(const trace_record& r, u64 D) {
    i128 q = static_cast<i128>(r.X) * r.X - 4 * static_cast<i128>(r.Y) + 8 * static_cast<i128>(r.p);
    if (q < 0 || D == 0 || q % D != 0)
        throw error(errc::non_integral, "X^2 - 4Y + 8p not in D*squares at p = " + std::to_string(r.p));
    u128 s = static_cast<u128>(q / D);
    u128 z = isqrt(s);
    if (z * z != s) throw error(errc::non_integral, "X^2 - 4Y + 8p not in D*squares at p = " + std::to_string(r.p));
    return static_cast<u64>(z);
}

inline fpoly reduce_sextic(const curve_spec& c, u64 p) {
    fpoly f;
    for (int i = 0; i < 7; ++i) f.c[i] = reduce(c.coeffs[i], p);
    f.deg = 6;
    f.trim();
    return f;
}

/// True iff the model has good reduction at p: p odd, p not dividing N, and
/// the binary sextic stays squarefree of degree >= 5 (a drop to degree 5
/// puts a Weierstrass point at infinity, which is still smooth).
inline bool has_good_reduction(const curve_spec& c, u64 p) {
    if (p == 2 || c.N % p == 0) return false;
    fpoly f = reduce_sextic(c, p);
    if (f.deg < 5) return false;
    return pgcd(f, pderiv(f, p), p).deg == 0;
}

}  // namespace ltq
