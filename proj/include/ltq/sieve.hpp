#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ltq/arith.hpp"

namespace ltq {

/// All primes <= bound, by a segmented sieve of Eratosthenes over odd numbers.
inline std::vector<u64> sieve(u64 bound) {
    std::vector<u64> out;
    if (bound < 2) return out;
    out.push_back(2);
    const u64 root = isqrt(bound);
    std::vector<u64> base;
    {
        std::vector<char> small(root + 1, 1);
        for (u64 i = 2; i <= root; ++i)
            if (small[i]) {
                if (i > 2) base.push_back(i);
                for (u64 j = i * i; j <= root; j += i) small[j] = 0;
            }
    }
    constexpr u64 seg = u64{1} << 18;  // odd numbers per segment
    std::vector<char> mark(seg);
    std::vector<u64> next(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) next[i] = base[i] * base[i];
    for (u64 lo = 3; lo <= bound; lo += 2 * seg) {
        u64 hi = std::min(bound, lo + 2 * seg - 1);
        std::fill(mark.begin(), mark.end(), 1);
        for (std::size_t i = 0; i < base.size(); ++i) {
            u64 q = base[i], j = next[i];
            for (; j <= hi; j += 2 * q) mark[(j - lo) / 2] = 0;
            next[i] = j;
        }
        for (u64 n = lo; n <= hi; n += 2)
            if (mark[(n - lo) / 2]) out.push_back(n);
    }
    return out;
}

/// pi(x) = #{p < x} over a sorted prime list.
inline u64 count_below(const std::vector<u64>& primes, u64 x) {
    return static_cast<u64>(std::lower_bound(primes.begin(), primes.end(), x) - primes.begin());
}

/// #{p <= x} over a sorted prime list.
inline u64 count_upto(const std::vector<u64>& primes, u64 x) {
    return static_cast<u64>(std::upper_bound(primes.begin(), primes.end(), x) - primes.begin());
}

}  // namespace ltq
