#pragma once

// #J(F_p) by baby-step giant-step inside the Weil interval, and the L-polynomial
// record (p, X_p, Y_p).

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ltq/counting.hpp"
#include "ltq/curve.hpp"
#include "ltq/jacobian.hpp"

namespace ltq {

struct lpoly_config {
    /// Below this, Y_p comes from the naive F_{p^2} count.
    u64 naive_threshold = u64{1} << 11;
    /// Naive counting is allowed as a fallback up to here.
    u64 naive_limit = default_naive_limit;
    /// Random elements drawn (from J and its quadratic twist, alternately).
    int max_elements = 8;
    u64 seed = 0;
};

inline u64 splitmix64(u64 x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed for the per-prime generator: FNV-1a of the label mixed with p and the user seed.
inline u64 prime_seed(const std::string& label, u64 p, u64 seed) {
    u64 h = 1469598103934665603ull;
    for (unsigned char ch : label) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return splitmix64(h ^ splitmix64(p ^ splitmix64(seed)));
}

/// Range of Y_p allowed by the Weil bounds given X_p.
inline std::pair<i64, i64> weil_y_range(u64 p, i64 X) {
    i128 P = p;
    u128 q = static_cast<u128>(4) * static_cast<u128>(static_cast<i128>(X) * X) * p;
    u128 s = isqrt(q);
    if (s * s < q) ++s;
    i64 ymin = static_cast<i64>(static_cast<i128>(s) - 2 * P);
    i128 num = static_cast<i128>(X) * X + 8 * P;
    i64 ymax = static_cast<i64>(num >= 0 ? num / 4 : -((-num + 3) / 4));
    return {ymin, ymax};
}

namespace detail {

class elem_table {
public:
    void reset(std::size_t n) {
        std::size_t cap = 16;
        while (cap < 2 * n + 2) cap <<= 1;
        keys_.assign(cap, empty);
        vals_.assign(cap, 0);
        mask_ = cap - 1;
    }
    void insert(u128 k, u64 v) {
        std::size_t i = slot(k);
        while (keys_[i] != empty) i = (i + 1) & mask_;
        keys_[i] = k;
        vals_[i] = v;
    }
    bool find(u128 k, u64* v) const {
        for (std::size_t i = slot(k); keys_[i] != empty; i = (i + 1) & mask_)
            if (keys_[i] == k) {
                *v = vals_[i];
                return true;
            }
        return false;
    }

private:
    static constexpr u128 empty = ~u128{0};
    std::size_t slot(u128 k) const {
        u64 x = static_cast<u64>(k) ^ static_cast<u64>(k >> 64) * 0x9E3779B97F4A7C15ull;
        x ^= x >> 29;
        x *= 0xBF58476D1CE4E5B9ull;
        x ^= x >> 32;
        return static_cast<std::size_t>(x) & mask_;
    }
    std::vector<u128> keys_;
    std::vector<u64> vals_;
    std::size_t mask_ = 0;
};

/// All t in [0, T] with base + t*h = 0, sorted.
inline std::vector<u64> solve_progression(const jacobian& J, const jac_elem& base, const jac_elem& h, u64 T) {
    std::vector<u64> sols;
    if (T < 8) {
        jac_elem cur = base;
        for (u64 t = 0; t <= T; ++t) {
            if (cur.is_identity()) sols.push_back(t);
            cur = J.add(cur, h);
        }
        return sols;
    }
    thread_local elem_table table;
    u64 m = std::max<u64>(1, isqrt(T / 2));
    table.reset(m + 1);
    jac_elem cur = J.identity();
    u64 ord = 0;
    for (u64 j = 0; j <= m; ++j) {
        if (j > 0 && cur.is_identity()) {
            ord = j;
            break;
        }
        table.insert(pack(cur), j);
        cur = J.add(cur, h);
    }
    if (ord) {
        u64 t0;
        if (table.find(pack(J.negate(base)), &t0))
            for (u64 t = t0; t <= T; t += ord) sols.push_back(t);
        return sols;
    }
    const u64 stride = 2 * m + 1;
    jac_elem step = J.mul(h, static_cast<i128>(stride));
    jac_elem g = J.add(base, J.mul(h, static_cast<i128>(m)));
    for (u64 c = m; c <= T + m; c += stride) {
        u64 j;
        if (table.find(pack(g), &j) && c >= j && c - j <= T) sols.push_back(c - j);
        if (table.find(pack(J.negate(g)), &j) && c + j <= T) sols.push_back(c + j);
        g = J.add(g, step);
    }
    std::sort(sols.begin(), sols.end());
    sols.erase(std::unique(sols.begin(), sols.end()), sols.end());
    return sols;
}

}  // namespace detail

/// Result of the order search: the surviving candidates n0 + t*L, t = 0..count-1.
struct order_candidates {
    i128 n0 = 0;
    i128 step = 1;
    u64 count = 0;
};

/// BSGS over the Weil interval. Elements alternate between J and its quadratic
/// twist J' (#J' = #J - 2X(1+p)) until one candidate is left or the element
/// budget runs out.
template <class Rng>
order_candidates bsgs_candidates(const fpoly& f, u64 p, i64 X, int max_elements, Rng& rng) {
    auto [ymin, ymax] = weil_y_range(p, X);
    const i128 P = p;
    const i128 base = 1 + X + P * X + P * P;
    order_candidates oc{base + ymin, 1, static_cast<u64>(ymax - ymin + 1)};
    if (oc.count <= 1) return oc;
    jacobian J(working_model(f, p, rng), p);
    std::optional<jacobian> Jt;
    const i128 twist_shift = -2 * static_cast<i128>(X) * (1 + P);
    for (int r = 0; r < max_elements && oc.count > 1; ++r) {
        bool twist = (r % 2) == 1;
        if (twist && !Jt) Jt.emplace(working_model(pscale(f, smallest_nonresidue(p), p), p, rng), p);
        const jacobian& G = twist ? *Jt : J;
        jac_elem e = G.random_element(rng);
        jac_elem b = G.mul(e, oc.n0 + (twist ? twist_shift : 0));
        jac_elem h = G.mul(e, oc.step);
        std::vector<u64> sols = detail::solve_progression(G, b, h, oc.count - 1);
        if (sols.empty()) throw error(errc::degenerate, "no annihilating multiple in the Weil interval at p = " + std::to_string(p));
        oc.n0 += static_cast<i128>(sols[0]) * oc.step;
        if (sols.size() == 1) {
            oc.count = 1;
            break;
        }
        u64 d = sols[1] - sols[0];
        oc.count = (sols.back() - sols[0]) / d + 1;
        oc.step *= d;
    }
    return oc;
}

/// Y_p from #C(F_{p^2}).
inline i64 y_from_counts(u64 p, i64 X, u64 n2) {
    i128 P = p;
    i128 v = static_cast<i128>(n2) - P * P - 1 + static_cast<i128>(X) * X;
    return static_cast<i64>(v / 2);
}

namespace detail {

inline void check_engine_prime(const curve_spec& c, u64 p) {
    if (!is_prime(p)) throw error(errc::invalid_argument, "p = " + std::to_string(p) + " is not prime");
    if (p >= max_engine_prime) throw error(errc::out_of_range, "p beyond engine range");
    if (!has_good_reduction(c, p)) throw bad_reduction(p);
}

inline u64 order_with_fallback(const curve_spec& c, u64 p, i64 X, const fpoly& f, const square_table& sq,
                               const lpoly_config& cfg) {
    std::mt19937_64 rng(prime_seed(c.label, p, cfg.seed));
    order_candidates oc = bsgs_candidates(f, p, X, cfg.max_elements, rng);
    if (oc.count == 1) return static_cast<u64>(oc.n0);
    if (p <= cfg.naive_limit) {
        u64 n1 = static_cast<u64>(static_cast<i64>(p) + 1 + X);
        u64 n2 = count_points_fp2(f, sq);
        return static_cast<u64>((static_cast<i128>(n1) * n1 + n2) / 2 - p);
    }
    throw ambiguous(p, oc.count);
}

}  // namespace detail

/// #J(F_p) given X_p.
inline u64 jacobian_order(const curve_spec& c, u64 p, i64 X, const lpoly_config& cfg = {}) {
    detail::check_engine_prime(c, p);
    fpoly f = reduce_sextic(c, p);
    square_table sq(p);
    return detail::order_with_fallback(c, p, X, f, sq, cfg);
}

namespace detail {

// lpoly for a reduced model whose good reduction has been checked by the caller.
inline trace_record lpoly_reduced(const curve_spec& c, u64 p, const fpoly& f, const square_table& sq,
                                  const lpoly_config& cfg) {
    u64 n1 = count_points_fp(f, sq);
    trace_record r{p, static_cast<i64>(n1) - static_cast<i64>(p) - 1, 0};
    if (p < cfg.naive_threshold) {
        r.Y = y_from_counts(p, r.X, count_points_fp2(f, sq));
    } else {
        i128 P = p;
        i128 n = order_with_fallback(c, p, r.X, f, sq, cfg);
        r.Y = static_cast<i64>(n - 1 - r.X - P * r.X - P * P);
    }
    if (!satisfies_weil(r)) throw error(errc::degenerate, "record violates the Weil bounds at p = " + std::to_string(p));
    return r;
}

}  // namespace detail

/// (p, X_p, Y_p) at a prime of good reduction.
inline trace_record lpoly(const curve_spec& c, u64 p, const lpoly_config& cfg = {}) {
    detail::check_engine_prime(c, p);
    fpoly f = reduce_sextic(c, p);
    square_table sq(p);
    return detail::lpoly_reduced(c, p, f, sq, cfg);
}

}  // namespace ltq
