#pragma once

// Exact cardinalities of the determinant/trace-restricted matrix groups at
// prime powers, the local factors F^_l, and brute-force enumeration oracles.

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ltq/arith.hpp"
#include "ltq/error.hpp"

namespace ltq {

using bigint = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

enum class splitting { inert, split, ramified };

inline const char* to_string(splitting s) {
    switch (s) {
        case splitting::inert: return "inert";
        case splitting::split: return "split";
        default: return "ramified";
    }
}

namespace detail {

inline void require_odd_prime(u64 ell) {
    if (ell < 3 || !is_prime(ell)) throw error(errc::invalid_argument, "l must be an odd prime, got " + std::to_string(ell));
}

inline void require_k(unsigned k) {
    if (k < 1) throw error(errc::invalid_argument, "k must be positive");
}

inline void require_unramified(splitting s) {
    if (s == splitting::ramified) throw error(errc::unsupported, "no closed formula at a ramified prime");
}

inline bigint bpow(u64 b, unsigned e) { return boost::multiprecision::pow(bigint(b), e); }

}  // namespace detail

/// Behaviour of the odd prime l in Q(sqrt D).
inline splitting splitting_of(u64 ell, u64 D) {
    detail::require_odd_prime(ell);
    if (D % ell == 0) return splitting::ramified;
    return jacobi(D, ell) == 1 ? splitting::split : splitting::inert;
}

/// #GL_2(R) for a finite local ring of size r with maximal ideal of size m.
inline bigint card_gl2_local(u64 r, u64 m) {
    if (m == 0 || m >= r || r % m != 0) throw error(errc::invalid_argument, "card_gl2_local: need m | r and m < r");
    bigint R = r, M = m;
    return (R * R - M * M) * R * (R - M);
}

/// #GL_2(Z/l^k).
inline bigint card_gl2_zmod(u64 ell, unsigned k) {
    detail::require_k(k);
    bigint l = ell;
    return detail::bpow(ell, 4 * k - 3) * (l * l - 1) * (l - 1);
}

/// #A_{l^k}: pairs/matrices whose determinant lies in (Z/l^k)^x.
inline bigint card_A(u64 ell, unsigned k, splitting s) {
    detail::require_odd_prime(ell);
    detail::require_k(k);
    detail::require_unramified(s);
    bigint l = ell;
    bigint tail = s == splitting::inert ? (l * l * l * l - 1) * (l - 1) : (l * l - 1) * (l * l - 1) * (l - 1);
    return detail::bpow(ell, 7 * k - 5) * tail;
}

/// #A^t_{l^k}: the elements of A_{l^k} whose trace also lies in Z/l^k.
inline bigint card_A_t(u64 ell, unsigned k, splitting s) {
    detail::require_odd_prime(ell);
    detail::require_k(k);
    detail::require_unramified(s);
    bigint l = ell;
    bigint inner = s == splitting::inert
                       ? detail::bpow(ell, 6 * k - 2) * (l * l + l + 1) - detail::bpow(ell, 4 * k - 2)
                       : detail::bpow(ell, 6 * k - 4) * (l * l * l * l + l * l * l - l * l - 2 * l) - detail::bpow(ell, 4 * k - 2);
    bigint num = (l - 1) * inner;
    if (num % (l + 1) != 0) throw error(errc::degenerate, "card_A_t: non-integral value");
    return num / (l + 1);
}

/// F^_l = lim_k l^k #A^t / #A for a large-image prime.
inline rational fhat_ell(u64 ell, splitting s) {
    detail::require_odd_prime(ell);
    detail::require_unramified(s);
    bigint l = ell;
    if (s == splitting::inert) return rational(l * l * l * (l * l + l + 1), (l + 1) * (l * l * l * l - 1));
    return rational(l * l * (l * l * l + l * l - l - 2), (l * l - 1) * (l * l - 1) * (l + 1));
}

/// l^k #A^t / #A at finite k.
inline rational fhat_finite(u64 ell, unsigned k, splitting s) {
    return rational(detail::bpow(ell, k) * card_A_t(ell, k, s), card_A(ell, k, s));
}

struct local_count {
    u64 ell = 0;
    unsigned k = 0;
    splitting split = splitting::inert;
    bigint cardA;
    bigint cardAt;
    rational fhat;
};

inline local_count make_local_count(u64 ell, unsigned k, splitting s) {
    return {ell, k, s, card_A(ell, k, s), card_A_t(ell, k, s), fhat_ell(ell, s)};
}

/// Primes l that may be exceptional for a newform of square-free level N:
/// l | 15N or l | p^2 - 1 for a prime p | N.
inline std::vector<u64> possible_exceptional_primes(u64 N) {
    if (N == 0 || !is_squarefree(N)) throw error(errc::invalid_argument, "level must be square-free and positive");
    std::set<u64> out;
    for (auto [q, e] : factor(15 * N)) out.insert(q);
    for (auto [p, e] : factor(N))
        for (auto [q, e2] : factor(p * p - 1)) out.insert(q);
    return {out.begin(), out.end()};
}

/// l-adic valuation of a nonzero residue, or k for zero.
inline unsigned valuation_mod(u64 x, u64 ell, unsigned k) {
    unsigned v = 0;
    while (v < k && x % ell == 0) {
        x /= ell;
        ++v;
    }
    return x == 0 ? k : v;
}

/// Number of roots of X^2 + bX + c in Z/l^k.
inline u64 quad_root_count(u64 b, u64 c, u64 ell, unsigned k) {
    detail::require_odd_prime(ell);
    detail::require_k(k);
    const u64 n = ipow(ell, k);
    b %= n;
    c %= n;
    u64 D = (mulmod(b, b, n) + n - mulmod(4 % n, c, n)) % n;
    if (D == 0) return ipow(ell, k / 2);
    unsigned v = valuation_mod(D, ell, k);
    if (v % 2) return 0;
    u64 u = (D / ipow(ell, v)) % ell;
    return jacobi(u, ell) == 1 ? 2 * ipow(ell, v / 2) : 0;
}

/// #P_{i,j}: monic quadratics over Z/l^k with unit constant term whose
/// discriminant has valuation i (i = k for zero) and is a square (j = 2) or not (j = 0).
inline bigint card_P(u64 ell, unsigned k, unsigned i, unsigned j) {
    detail::require_odd_prime(ell);
    detail::require_k(k);
    if (i > k || (j != 0 && j != 2)) throw error(errc::invalid_argument, "card_P: need 0 <= i <= k and j in {0,2}");
    bigint l = ell;
    if (i == k) return j == 2 ? (l - 1) * detail::bpow(ell, k - 1) : bigint(0);
    if (i == 0) {
        if (j == 0) return (l - 1) * detail::bpow(ell, 2 * k - 1) / 2;
        return (l - 1) * (l - 2) * detail::bpow(ell, 2 * k - 2) / 2;
    }
    if (i % 2 == 1) {
        unsigned t = (i + 1) / 2;
        return j == 0 ? (l - 1) * (l - 1) * detail::bpow(ell, 2 * k - 2 * t - 1) : bigint(0);
    }
    unsigned t = i / 2;
    return (l - 1) * (l - 1) * detail::bpow(ell, 2 * k - 2 * t - 2) / 2;
}

/// #M_{i,j}: matrices in GL_2(Z/l^k) with a fixed characteristic polynomial from P_{i,j}.
inline bigint card_M(u64 ell, unsigned k, unsigned i, unsigned j) {
    detail::require_odd_prime(ell);
    detail::require_k(k);
    if (i > k || (j != 0 && j != 2)) throw error(errc::invalid_argument, "card_M: need 0 <= i <= k and j in {0,2}");
    bigint l = ell;
    if (i == k) {
        if (j != 2) return 0;
        unsigned m = k / 2;
        bigint head = detail::bpow(ell, m + 1) + detail::bpow(ell, m) - 1;
        return k % 2 == 0 ? head * detail::bpow(ell, 3 * m - 1) : head * detail::bpow(ell, 3 * m + 1);
    }
    if (i == 0) return j == 0 ? (l - 1) * detail::bpow(ell, 2 * k - 1) : (l + 1) * detail::bpow(ell, 2 * k - 1);
    if (i % 2 == 1) {
        if (j == 2) return 0;
        unsigned t = (i + 1) / 2;
        return (detail::bpow(ell, t + 1) + detail::bpow(ell, t) - l - 1) * detail::bpow(ell, 2 * k - t - 1);
    }
    unsigned t = i / 2;
    if (j == 2) return (l + 1) * detail::bpow(ell, 2 * k - 1);
    return (detail::bpow(ell, t + 1) + detail::bpow(ell, t) - 2) * detail::bpow(ell, 2 * k - t - 1);
}

/// Pairs (a, d) over Z[alpha]/l^k with ad in (Z/l^k)^x + alpha l^r Z/l^k and a + d in Z/l^k.
inline bigint pairs_ad_count(u64 ell, unsigned k, unsigned r) {
    detail::require_odd_prime(ell);
    detail::require_k(k);
    if (r < 1 || r > k) throw error(errc::invalid_argument, "pairs_ad_count: need 1 <= r <= k");
    bigint l = ell;
    return detail::bpow(ell, 3 * k - r - 2) * (l - 1) * (r * l - r + l);
}

// ---------------------------------------------------------------------------
// Enumeration oracles

enum class oracle_target { A, At, P, M, PairsAD };

struct oracle_args {
    unsigned i = 0;
    unsigned j = 0;
    unsigned r = 1;
    /// alpha^2 for the inert ring; 0 selects the smallest positive non-residue.
    u64 alpha2 = 0;
};

inline constexpr u64 oracle_guard = 100'000'000;

/// Number of objects the oracle visits.
inline u64 oracle_size(u64 ell, unsigned k, splitting s, oracle_target t) {
    double n = std::pow(static_cast<double>(ell), static_cast<double>(k));
    double sz;
    switch (t) {
        case oracle_target::A:
        case oracle_target::At: sz = s == splitting::inert ? std::pow(n, 8) : std::pow(n, 4); break;
        case oracle_target::P: sz = n * n; break;
        case oracle_target::M: sz = std::pow(n, 4); break;
        default: sz = std::pow(n, 4); break;
    }
    return sz > 1e18 ? ~u64{0} : static_cast<u64>(sz);
}

namespace detail {

// Z[alpha]/n with alpha^2 = g; element x0 + x1 alpha stored as x0 + n*x1.
struct quad_ring {
    u64 n, g;
    std::vector<std::uint32_t> mul;  // full multiplication table
    quad_ring(u64 n_, u64 g_) : n(n_), g(g_ % n_), mul(n_ * n_ * n_ * n_) {
        const u64 N = n * n;
        for (u64 x = 0; x < N; ++x)
            for (u64 y = 0; y < N; ++y) {
                u64 x0 = x % n, x1 = x / n, y0 = y % n, y1 = y / n;
                u64 z0 = (x0 * y0 + g * (x1 * y1 % n)) % n;
                u64 z1 = (x0 * y1 + x1 * y0) % n;
                mul[x * N + y] = static_cast<std::uint32_t>(z0 + n * z1);
            }
    }
    u64 size() const { return n * n; }
    u64 prod(u64 x, u64 y) const { return mul[x * size() + y]; }
    u64 sub(u64 x, u64 y) const {
        u64 z0 = (x % n + n - y % n) % n, z1 = (x / n + n - y / n) % n;
        return z0 + n * z1;
    }
};

inline std::map<std::pair<u64, u64>, u64> charpoly_histogram(u64 ell, unsigned k, std::map<u64, u64>* det_hist) {
    const u64 n = ipow(ell, k);
    std::vector<u64> hist(n * n, 0);
    for (u64 a = 0; a < n; ++a)
        for (u64 d = 0; d < n; ++d) {
            u64 ad = a * d % n, tr = (a + d) % n;
            for (u64 b = 0; b < n; ++b)
                for (u64 c = 0; c < n; ++c) {
                    u64 det = (ad + n - b * c % n) % n;
                    if (det % ell == 0) continue;
                    ++hist[tr * n + det];
                }
        }
    std::map<std::pair<u64, u64>, u64> out;
    for (u64 tr = 0; tr < n; ++tr)
        for (u64 det = 0; det < n; ++det)
            if (hist[tr * n + det]) {
                out[{tr, det}] = hist[tr * n + det];
                if (det_hist) (*det_hist)[det] += hist[tr * n + det];
            }
    return out;
}

inline std::vector<bool> squares_mod(u64 n) {
    std::vector<bool> sq(n, false);
    for (u64 x = 0; x < n; ++x) sq[x * x % n] = true;
    return sq;
}

// (i, j) class of X^2 + bX + c over Z/n, n = l^k.
inline std::pair<unsigned, unsigned> poly_class(u64 b, u64 c, u64 ell, unsigned k, const std::vector<bool>& sq) {
    const u64 n = ipow(ell, k);
    u64 D = (b * b % n + n - 4 * c % n) % n;
    return {valuation_mod(D, ell, k), sq[D] ? 2u : 0u};
}

}  // namespace detail

/// Exhaustive count of the requested set. Splitting only matters for A and At.
inline bigint enumerate_oracle(u64 ell, unsigned k, splitting s, oracle_target t, const oracle_args& args = {}) {
    detail::require_odd_prime(ell);
    detail::require_k(k);
    if (oracle_size(ell, k, s, t) > oracle_guard)
        throw error(errc::too_large, "enumeration oracle exceeds the 1e8 guard at l^k = " + std::to_string(ell) + "^" + std::to_string(k));
    const u64 n = ipow(ell, k);
    const u64 g = args.alpha2 ? args.alpha2 : smallest_nonresidue(ell);
    if ((t == oracle_target::A || t == oracle_target::At || t == oracle_target::PairsAD) && jacobi(g % ell, ell) != -1)
        throw error(errc::invalid_argument, "alpha^2 must be a non-residue mod l");

    switch (t) {
        case oracle_target::A:
        case oracle_target::At: {
            detail::require_unramified(s);
            if (s == splitting::split) {
                std::map<u64, u64> dets;
                auto cp = detail::charpoly_histogram(ell, k, &dets);
                bigint total = 0;
                if (t == oracle_target::A)
                    for (auto& [d, cnt] : dets) total += bigint(cnt) * cnt;
                else
                    for (auto& [key, cnt] : cp) total += bigint(cnt) * cnt;
                return total;
            }
            detail::quad_ring R(n, g);
            const u64 N = R.size();
            u64 count = 0;
            for (u64 a = 0; a < N; ++a)
                for (u64 d = 0; d < N; ++d) {
                    u64 ad = R.prod(a, d);
                    bool trace_ok = (a / n + d / n) % n == 0;
                    if (t == oracle_target::At && !trace_ok) continue;
                    for (u64 b = 0; b < N; ++b) {
                        const std::uint32_t* row = &R.mul[b * N];
                        for (u64 c = 0; c < N; ++c) {
                            u64 det = R.sub(ad, row[c]);
                            if (det / n == 0 && (det % n) % ell != 0) ++count;
                        }
                    }
                }
            return count;
        }
        case oracle_target::P: {
            auto sq = detail::squares_mod(n);
            u64 count = 0;
            for (u64 b = 0; b < n; ++b)
                for (u64 c = 0; c < n; ++c) {
                    if (c % ell == 0) continue;
                    if (detail::poly_class(b, c, ell, k, sq) == std::pair<unsigned, unsigned>{args.i, args.j}) ++count;
                }
            return count;
        }
        case oracle_target::M: {
            auto sq = detail::squares_mod(n);
            auto cp = detail::charpoly_histogram(ell, k, nullptr);
            // Representative: the lexicographically first (b, c) in the class.
            for (u64 b = 0; b < n; ++b)
                for (u64 c = 0; c < n; ++c) {
                    if (c % ell == 0) continue;
                    if (detail::poly_class(b, c, ell, k, sq) != std::pair<unsigned, unsigned>{args.i, args.j}) continue;
                    auto it = cp.find({(n - b) % n, c});
                    return it == cp.end() ? bigint(0) : bigint(it->second);
                }
            return 0;
        }
        case oracle_target::PairsAD: {
            if (args.r < 1 || args.r > k) throw error(errc::invalid_argument, "PairsAD oracle: need 1 <= r <= k");
            detail::quad_ring R(n, g);
            const u64 N = R.size();
            const u64 lr = ipow(ell, args.r);
            u64 count = 0;
            for (u64 a = 0; a < N; ++a)
                for (u64 d = 0; d < N; ++d) {
                    if ((a / n + d / n) % n != 0) continue;
                    u64 e = R.prod(a, d);
                    if ((e % n) % ell != 0 && (e / n) % lr == 0) ++count;
                }
            return count;
        }
    }
    return 0;
}

/// For each (i, j) class, the set of distinct matrix counts over all polynomials
/// in the class (a singleton iff #M_{i,j} is independent of the representative).
/// l^k * #A^t / #A counted over (Z/l^k)[sqrt D] directly. Works for every
/// splitting type, including ramified l where no closed form is implemented.
inline rational large_image_factor_enumerated(u64 ell, unsigned k, u64 D) {
    detail::require_odd_prime(ell);
    detail::require_k(k);
    const u64 n = ipow(ell, k);
    if (std::pow(static_cast<double>(n), 8) > static_cast<double>(oracle_guard))
        throw error(errc::too_large, "enumeration oracle exceeds the 1e8 guard at l^k = " + std::to_string(ell) + "^" + std::to_string(k));
    detail::quad_ring R(n, D % n);
    const u64 N = R.size();
    u64 all = 0, traced = 0;
    for (u64 a = 0; a < N; ++a)
        for (u64 d = 0; d < N; ++d) {
            u64 ad = R.prod(a, d);
            bool trace_ok = (a / n + d / n) % n == 0;
            for (u64 b = 0; b < N; ++b) {
                const std::uint32_t* row = &R.mul[b * N];
                for (u64 c = 0; c < N; ++c) {
                    u64 det = R.sub(ad, row[c]);
                    if (det / n == 0 && (det % n) % ell != 0) {
                        ++all;
                        traced += trace_ok;
                    }
                }
            }
        }
    return rational(bigint(n) * traced, bigint(all));
}

inline std::map<std::pair<unsigned, unsigned>, std::set<u64>> charpoly_class_counts(u64 ell, unsigned k) {
    detail::require_odd_prime(ell);
    if (oracle_size(ell, k, splitting::split, oracle_target::M) > oracle_guard) throw error(errc::too_large, "guard");
    const u64 n = ipow(ell, k);
    auto sq = detail::squares_mod(n);
    auto cp = detail::charpoly_histogram(ell, k, nullptr);
    std::map<std::pair<unsigned, unsigned>, std::set<u64>> out;
    for (u64 b = 0; b < n; ++b)
        for (u64 c = 0; c < n; ++c) {
            if (c % ell == 0) continue;
            auto it = cp.find({(n - b) % n, c});
            out[detail::poly_class(b, c, ell, k, sq)].insert(it == cp.end() ? 0 : it->second);
        }
    return out;
}

/// Roots of X^2 + bX + c in Z/l^k by trying every residue.
inline u64 enumerate_quad_roots(u64 b, u64 c, u64 ell, unsigned k) {
    const u64 n = ipow(ell, k);
    u64 count = 0;
    for (u64 x = 0; x < n; ++x) count += (x * x % n + b % n * x % n + c % n) % n == 0;
    return count;
}

struct verification_row {
    std::string target;
    std::string params;
    std::string formula;
    std::string oracle;  // empty when the guard skips enumeration
    bool skipped = false;
    bool equal = false;
};

/// Formula against enumeration for every cardinality at (l, k).
inline std::vector<verification_row> verification_table(u64 ell, unsigned k) {
    detail::require_odd_prime(ell);
    detail::require_k(k);
    std::vector<verification_row> rows;
    auto push = [&](std::string target, std::string params, const bigint& f, std::optional<bigint> o) {
        verification_row r{std::move(target), std::move(params), f.str(), o ? o->str() : std::string(), !o, o && *o == f};
        rows.push_back(std::move(r));
    };
    for (splitting s : {splitting::inert, splitting::split}) {
        for (oracle_target t : {oracle_target::A, oracle_target::At}) {
            bigint f = t == oracle_target::A ? card_A(ell, k, s) : card_A_t(ell, k, s);
            std::optional<bigint> o;
            if (oracle_size(ell, k, s, t) <= oracle_guard) o = enumerate_oracle(ell, k, s, t);
            push(t == oracle_target::A ? "card_A" : "card_A_t", to_string(s), f, o);
        }
    }
    bool pm_ok = oracle_size(ell, k, splitting::split, oracle_target::M) <= oracle_guard;
    for (unsigned i = 0; i <= k; ++i)
        for (unsigned j : {0u, 2u}) {
            oracle_args a;
            a.i = i;
            a.j = j;
            std::string ps = "i=" + std::to_string(i) + " j=" + std::to_string(j);
            push("card_P", ps, card_P(ell, k, i, j), enumerate_oracle(ell, k, splitting::split, oracle_target::P, a));
            std::optional<bigint> o;
            if (pm_ok) o = enumerate_oracle(ell, k, splitting::split, oracle_target::M, a);
            push("card_M", ps, card_M(ell, k, i, j), o);
        }
    for (unsigned r = 1; r <= k; ++r) {
        oracle_args a;
        a.r = r;
        std::optional<bigint> o;
        if (oracle_size(ell, k, splitting::inert, oracle_target::PairsAD) <= oracle_guard)
            o = enumerate_oracle(ell, k, splitting::inert, oracle_target::PairsAD, a);
        push("pairs_ad_count", "r=" + std::to_string(r), pairs_ad_count(ell, k, r), o);
    }
    const u64 n = ipow(ell, k);
    if (static_cast<double>(n) * n * n <= static_cast<double>(oracle_guard)) {
        u64 bad = 0, total = 0, total_oracle = 0;
        for (u64 b = 0; b < n; ++b)
            for (u64 c = 0; c < n; ++c) {
                u64 f = quad_root_count(b, c, ell, k), o = enumerate_quad_roots(b, c, ell, k);
                total += f;
                total_oracle += o;
                bad += f != o;
            }
        rows.push_back({"quad_root_count", "sum over all (b,c)", std::to_string(total), std::to_string(total_oracle), false, bad == 0});
    } else {
        rows.push_back({"quad_root_count", "all (b,c)", "", "", true, false});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// The F^ product

struct fhat_result {
    double value = 0;             // finite product times tail estimate
    double finite_product = 0;    // product up to the cutoff
    double tail_factor = 1;       // estimate for primes beyond the cutoff
    double truncation_bound = 0;  // relative bound on the omitted tail
};

/// Primes that must be supplied empirically: 2, primes dividing D, and (when
/// N is given) the possibly exceptional primes of level N.
inline std::vector<u64> required_empirical_primes(u64 D, std::optional<u64> N) {
    std::set<u64> req{2};
    for (auto [q, e] : factor(D)) req.insert(q);
    if (N)
        for (u64 q : possible_exceptional_primes(*N)) req.insert(q);
    return {req.begin(), req.end()};
}

/// Product of empirical factors and exact F^_l over other odd unramified l <= cutoff.
inline fhat_result fhat_product(u64 D, std::optional<u64> N, const std::map<u64, double>& empirical, u64 cutoff,
                                bool tail) {
    if (D == 0 || !is_squarefree(D)) throw error(errc::invalid_argument, "D must be square-free");
    std::vector<u64> missing;
    for (u64 q : required_empirical_primes(D, N))
        if (!empirical.count(q)) missing.push_back(q);
    if (!missing.empty()) throw missing_empirical(missing);

    double prod = 1;
    for (auto& [q, v] : empirical) prod *= v;
    for (u64 ell = 3; ell <= cutoff; ell += 2) {
        if (!is_prime(ell) || empirical.count(ell) || D % ell == 0) continue;
        prod *= fhat_ell(ell, splitting_of(ell, D)).convert_to<double>();
    }
    fhat_result r;
    r.finite_product = prod;
    double L = static_cast<double>(std::max<u64>(cutoff, 2));
    r.truncation_bound = std::expm1(1.0 / L);
    if (tail) r.tail_factor = std::exp(1.0 / (L * std::log(L)));
    r.value = prod * r.tail_factor;
    return r;
}

}  // namespace ltq
