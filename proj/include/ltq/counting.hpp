#pragma once

// Point counts #C(F_p) and #C(F_{p^2}) for y^2 = f(x) of genus 2.

#include <algorithm>
#include <cstring>
#if defined(__AVX2__) || defined(__AVX512F__)
#include <immintrin.h>
#endif
#include <vector>

#include "ltq/arith.hpp"
#include "ltq/curve.hpp"
#include "ltq/poly.hpp"

namespace ltq {

/// Largest prime handled by the point-counting engine (word-size lanes).
inline constexpr u64 max_engine_prime = u64{1} << 31;
/// Largest p for which #C(F_{p^2}) may be counted naively.
inline constexpr u64 default_naive_limit = u64{1} << 17;

/// Barrett reduction for p < 2^32.
struct modp {
    u64 p = 0;
    u64 m = 0;
    modp() = default;
    explicit modp(u64 p_) : p(p_), m(~u64{0} / p_) {}
    u64 red(u64 x) const {
        u64 q = static_cast<u64>((static_cast<u128>(x) * m) >> 64);
        u64 r = x - q * p;
        return r >= p ? r - p : r;
    }
    u64 mul(u64 a, u64 b) const { return red(a * b); }
    u64 add(u64 a, u64 b) const {
        u64 s = a + b;
        return s >= p ? s - p : s;
    }
    u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + p - b; }
    u64 neg(u64 a) const { return a ? p - a : 0; }
    u64 inv(u64 a) const {
        // Extended Euclid on 32-bit operands.
        std::uint32_t r0 = static_cast<std::uint32_t>(p), r1 = static_cast<std::uint32_t>(a);
        std::int64_t t0 = 0, t1 = 1;
        while (r1) {
            std::uint32_t q = r0 / r1;
            std::uint32_t r2 = r0 - q * r1;
            std::int64_t t2 = t0 - static_cast<std::int64_t>(q) * t1;
            r0 = r1;
            r1 = r2;
            t0 = t1;
            t1 = t2;
        }
        if (r0 != 1) throw error(errc::invalid_argument, "modp::inv: not a unit");
        return t0 < 0 ? static_cast<u64>(t0 + static_cast<std::int64_t>(p)) : static_cast<u64>(t0);
    }
};

/// Element a + b*sqrt(g) of F_{p^2} = F_p[t]/(t^2 - g), g the smallest non-residue.
struct fp2 {
    u64 a = 0;
    u64 b = 0;
};

/// Quadratic character on F_p (p an odd prime).
inline int quadratic_character(u64 a, u64 p) {
    if (p % 2 == 0) throw error(errc::invalid_argument, "quadratic_character: field size must be odd");
    if (is_prime(p)) return jacobi(a % p, p);
    u64 r = isqrt(p);
    if (r * r != p || !is_prime(r))
        throw error(errc::invalid_argument, "quadratic_character: field size must be an odd prime or prime square");
    // a read in the prime subfield of F_{r^2}: every element of F_r is a square there.
    return a % r == 0 ? 0 : 1;
}

/// Quadratic character on F_{p^2}, via the norm to F_p.
inline int quadratic_character(fp2 x, u64 p) {
    u64 g = smallest_nonresidue(p);
    u64 n = submod(mulmod(x.a, x.a, p), mulmod(g, mulmod(x.b, x.b, p), p), p);
    if (n == 0) return 0;
    return jacobi(n, p);
}

/// Byte table of nonzero squares mod p, padded for 32-bit gathers. The storage
/// is a per-thread buffer, so at most one table per thread is live at a time.
class square_table {
public:
    explicit square_table(u64 p) : p_(p) {
        thread_local std::vector<std::uint8_t> buffer;
        buffer.assign(p + 8, 0);
        bytes_ = buffer.data();
        u64 s = 0;
        for (u64 i = 1; i <= p / 2; ++i) {
            s += 2 * i - 1;
            if (s >= p) s -= p;
            bytes_[s] = 1;
        }
    }
    square_table(const square_table&) = delete;
    square_table& operator=(const square_table&) = delete;
    bool is_square(u64 v) const { return bytes_[v]; }
    int chi(u64 v) const { return v == 0 ? 0 : (bytes_[v] ? 1 : -1); }
    u64 prime() const { return p_; }
    const std::uint8_t* data() const { return bytes_; }

private:
    u64 p_;
    std::uint8_t* bytes_;
};

namespace detail {

// Forward-difference state for `lanes` interleaved starting points.
template <int K>
void init_differences(const fpoly& f, u64 p, u64 block, int lanes, std::uint32_t* d) {
    for (int l = 0; l < lanes; ++l) {
        u64 x0 = static_cast<u64>(l) * block;
        u64 v[K];
        for (int i = 0; i < K; ++i) v[i] = peval(f, (x0 + i) % p, p);
        for (int k = 0; k < K; ++k) {
            d[k * lanes + l] = static_cast<std::uint32_t>(v[0]);
            for (int i = 0; i + 1 < K - k; ++i) v[i] = submod(v[i + 1], v[i], p);
        }
    }
}

// Runs `steps` forward-difference steps on L lanes (state K x L, lane-minor)
// and counts values that are nonzero squares.
#if defined(__AVX512F__)
inline constexpr int simd_lanes = 32;
template <int K>
u64 scan_lanes(const std::uint32_t* init, const square_table& sq, u64 steps) {
    constexpr int W = 16, V = 2, L = W * V;
    __m512i d[K][V];
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < V; ++j) d[k][j] = _mm512_loadu_si512(init + k * L + j * W);
    const __m512i P = _mm512_set1_epi32(static_cast<int>(sq.prime()));
    const __m512i low = _mm512_set1_epi32(0xFF);
    __m512i acc[V];
    for (int j = 0; j < V; ++j) acc[j] = _mm512_setzero_si512();
    const void* base = sq.data();
    for (u64 s = 0; s < steps; ++s) {
        for (int j = 0; j < V; ++j) {
            __m512i g = _mm512_i32gather_epi32(d[0][j], base, 1);
            acc[j] = _mm512_add_epi32(acc[j], _mm512_and_si512(g, low));
        }
        for (int k = 0; k + 1 < K; ++k)
            for (int j = 0; j < V; ++j) {
                __m512i t = _mm512_add_epi32(d[k][j], d[k + 1][j]);
                d[k][j] = _mm512_min_epu32(t, _mm512_sub_epi32(t, P));
            }
    }
    u64 total = 0;
    for (int j = 0; j < V; ++j) total += static_cast<u64>(_mm512_reduce_add_epi32(acc[j]));
    return total;
}
#elif defined(__AVX2__)
inline constexpr int simd_lanes = 16;
template <int K>
u64 scan_lanes(const std::uint32_t* init, const square_table& sq, u64 steps) {
    constexpr int W = 8, V = 2, L = W * V;
    __m256i d[K][V];
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < V; ++j) d[k][j] = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(init + k * L + j * W));
    const __m256i P = _mm256_set1_epi32(static_cast<int>(sq.prime()));
    const __m256i low = _mm256_set1_epi32(0xFF);
    __m256i acc[V];
    for (int j = 0; j < V; ++j) acc[j] = _mm256_setzero_si256();
    const int* base = reinterpret_cast<const int*>(sq.data());
    for (u64 s = 0; s < steps; ++s) {
        for (int j = 0; j < V; ++j) {
            __m256i g = _mm256_i32gather_epi32(base, d[0][j], 1);
            acc[j] = _mm256_add_epi32(acc[j], _mm256_and_si256(g, low));
        }
        for (int k = 0; k + 1 < K; ++k)
            for (int j = 0; j < V; ++j) {
                __m256i t = _mm256_add_epi32(d[k][j], d[k + 1][j]);
                d[k][j] = _mm256_min_epu32(t, _mm256_sub_epi32(t, P));
            }
    }
    alignas(32) std::uint32_t out[W];
    u64 total = 0;
    for (int j = 0; j < V; ++j) {
        _mm256_store_si256(reinterpret_cast<__m256i*>(out), acc[j]);
        for (int i = 0; i < W; ++i) total += out[i];
    }
    return total;
}
#else
inline constexpr int simd_lanes = 8;
template <int K>
u64 scan_lanes(const std::uint32_t* init, const square_table& sq, u64 steps) {
    constexpr int L = simd_lanes;
    std::uint32_t d[K * L];
    std::copy(init, init + K * L, d);
    const std::uint32_t P = static_cast<std::uint32_t>(sq.prime());
    u64 total = 0;
    for (u64 s = 0; s < steps; ++s) {
        for (int l = 0; l < L; ++l) total += sq.is_square(d[l]);
        for (int k = 0; k + 1 < K; ++k)
            for (int l = 0; l < L; ++l) {
                std::uint32_t t = d[k * L + l] + d[(k + 1) * L + l];
                d[k * L + l] = t >= P ? t - P : t;
            }
    }
    return total;
}
#endif

template <int K>
u64 scan_squares_simd(const fpoly& f, const square_table& sq, u64 block) {
    alignas(64) std::uint32_t init[K * simd_lanes];
    init_differences<K>(f, sq.prime(), block, simd_lanes, init);
    return scan_lanes<K>(init, sq, block);
}

}  // namespace detail

/// Number of x in F_p with f(x) a nonzero square.
inline u64 count_square_values(const fpoly& f, const square_table& sq) {
    const u64 p = sq.prime();
    u64 block = p / detail::simd_lanes;
    u64 total = 0;
    if (block >= 16)
        total = f.deg <= 6 ? detail::scan_squares_simd<7>(f, sq, block) : detail::scan_squares_simd<13>(f, sq, block);
    else
        block = 0;
    for (u64 x = static_cast<u64>(detail::simd_lanes) * block; x < p; ++x) total += sq.is_square(peval(f, x, p));
    return total;
}

/// Affine count plus points at infinity of the smooth model over F_p.
/// f must be squarefree, so its roots are the distinct linear factors.
inline u64 count_points_fp(const fpoly& f, const square_table& sq) {
    const u64 p = sq.prime();
    u64 zeros = static_cast<u64>(std::max(0, linear_part(f, p).deg));
    u64 affine = 2 * count_square_values(f, sq) + zeros;
    u64 inf = f.deg == 6 ? 1 + sq.chi(f.c[6]) : 1;
    return affine + inf;
}

/// Naive count over F_{p^2}, O(p^2). For x = a + b*t with b != 0 the value
/// f(x) is a square in F_{p^2} iff its norm h_b(a) = f(a + bt) f(a - bt), a
/// degree-12 polynomial over F_p, is a square in F_p; b and -b give
/// conjugate points, so only b <= p/2 is scanned.
inline u64 count_points_fp2(const fpoly& f, const square_table& sq) {
    const u64 p = sq.prime();
    modp F(p);
    const u64 g = smallest_nonresidue(p);
    u64 total = 0;
    // x in F_p: f(x) nonzero is a square in F_{p^2}.
    for (u64 a = 0; a < p; ++a) total += peval(f, a, p) == 0 ? 1 : 2;
    auto mul2 = [&](fp2 x, fp2 y) {
        return fp2{F.add(F.mul(x.a, y.a), F.mul(g, F.mul(x.b, y.b))), F.add(F.mul(x.a, y.b), F.mul(x.b, y.a))};
    };
    // Roots of f in F_{p^2} \ F_p, one per conjugate pair: the zeros of the h_b.
    const fpoly X = fpoly::x_plus(0);
    u64 quad_roots = 0;
    {
        // y = x^p mod f; x^(p^2) = y(x)^p = y(x^p) = sum c_i y^i mod f.
        fpoly y = ppowmod(X, p, f, p);
        fpoly y2;
        fpoly pw = pmod(fpoly::constant(1), f, p);
        for (int i = 0; i <= y.deg; ++i) {
            y2 = padd(y2, pscale(pw, y.c[i], p), p);
            pw = pmulmod(pw, y, f, p);
        }
        int d2 = pgcd(f, psub(y2, X, p), p).deg;
        int d1 = pgcd(f, psub(y, X, p), p).deg;
        quad_roots = static_cast<u64>(std::max(d2, 0) - std::max(d1, 0)) / 2;
    }
    // Lanes run over b; each lane scans a = 0..p-1 with the differences of h_b at 0.
    constexpr int L = detail::simd_lanes, K = 13;
    alignas(64) std::uint32_t init[K * L];
    u64 pairs = 0;
    const u64 half = p / 2;
    for (u64 b0 = 1; b0 <= half; b0 += L) {
        std::fill(init, init + K * L, 0u);
        for (int l = 0; l < L && b0 + l <= half; ++l) {
            const u64 b = b0 + l;
            // G(a) = f(a + b t) with coefficients in F_{p^2}.
            fp2 G[7] = {};
            const fp2 beta{0, b};
            int dg = -1;
            for (int i = f.deg; i >= 0; --i) {
                fp2 nxt[7] = {};
                for (int j = 0; j <= dg; ++j) {
                    fp2 m = mul2(G[j], beta);
                    nxt[j].a = F.add(nxt[j].a, m.a);
                    nxt[j].b = F.add(nxt[j].b, m.b);
                    nxt[j + 1].a = F.add(nxt[j + 1].a, G[j].a);
                    nxt[j + 1].b = F.add(nxt[j + 1].b, G[j].b);
                }
                nxt[0].a = F.add(nxt[0].a, f.c[i]);
                std::copy(nxt, nxt + 7, G);
                ++dg;
            }
            u64 h[K] = {};
            for (int i = 0; i <= f.deg; ++i)
                for (int j = 0; j <= f.deg; ++j) h[i + j] = F.add(h[i + j], mul2(G[i], fp2{G[j].a, F.neg(G[j].b)}).a);
            u64 v[K];
            for (int x = 0; x < K; ++x) {
                u64 acc = 0;
                for (int i = K - 1; i >= 0; --i) acc = F.add(F.mul(acc, static_cast<u64>(x) % p), h[i]);
                v[x] = acc;
            }
            for (int k = 0; k < K; ++k) {
                init[k * L + l] = static_cast<std::uint32_t>(v[0]);
                for (int i = 0; i + 1 < K - k; ++i) v[i] = F.sub(v[i + 1], v[i]);
            }
        }
        pairs += 2 * detail::scan_lanes<K>(init, sq, p);
    }
    pairs += quad_roots;
    total += 2 * pairs;
    u64 inf = f.deg == 6 ? 2 : 1;
    return total + inf;
}

/// #C(F_{p^ext}) for the smooth model of y^2 = f(x) over F_p.
inline u64 count_points(const curve_spec& c, u64 p, int ext, u64 naive_limit = default_naive_limit) {
    if (ext != 1 && ext != 2) throw error(errc::invalid_argument, "count_points: ext must be 1 or 2");
    if (!is_prime(p)) throw error(errc::invalid_argument, "count_points: p must be prime");
    if (p >= max_engine_prime) throw error(errc::out_of_range, "count_points: p beyond engine range");
    if (!has_good_reduction(c, p)) throw bad_reduction(p);
    if (ext == 2 && p > naive_limit) throw error(errc::out_of_range, "count_points: ext=2 above the naive limit");
    fpoly f = reduce_sextic(c, p);
    square_table sq(p);
    return ext == 1 ? count_points_fp(f, sq) : count_points_fp2(f, sq);
}

}  // namespace ltq
