#pragma once

// Trace stores, their persistence, and the prime-count statistics built on
// them: P(x), P_m(x), P^m(x), the least-squares constant, local factors,
// exceptional-prime detection and the assembled prediction.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ltq/curve.hpp"
#include "ltq/galois.hpp"
#include "ltq/lpoly.hpp"
#include "ltq/satotate.hpp"
#include "ltq/sieve.hpp"

namespace ltq {

enum class skip_reason : std::uint8_t { level = 1, bad_model = 2, ambiguous = 3 };

inline const char* to_string(skip_reason r) {
    switch (r) {
        case skip_reason::level: return "level";
        case skip_reason::bad_model: return "bad_model";
        case skip_reason::ambiguous: return "ambiguous";
    }
    return "?";
}

struct skip_entry {
    u64 p = 0;
    skip_reason reason = skip_reason::bad_model;
    friend bool operator==(const skip_entry&, const skip_entry&) = default;
};

/// Every prime <= bound appears exactly once, either as a record or as a skip.
struct trace_store {
    std::string label;
    u64 N = 1;
    u64 D = 1;
    u64 bound = 1;
    std::vector<trace_record> records;
    std::vector<skip_entry> skipped;
    friend bool operator==(const trace_store&, const trace_store&) = default;
};

inline trace_store empty_store(const curve_spec& c) { return {c.label, c.N, c.D, 1, {}, {}}; }

/// Checks ordering, bound and full prime coverage.
inline void validate_store(const trace_store& s) {
    auto fail = [&](const std::string& what) { throw error(errc::parse_error, "store " + s.label + ": " + what); };
    for (std::size_t i = 1; i < s.records.size(); ++i)
        if (s.records[i].p <= s.records[i - 1].p) fail("records not strictly increasing");
    for (std::size_t i = 1; i < s.skipped.size(); ++i)
        if (s.skipped[i].p <= s.skipped[i - 1].p) fail("skip list not strictly increasing");
    if (!s.records.empty() && s.records.back().p > s.bound) fail("record beyond bound");
    if (!s.skipped.empty() && s.skipped.back().p > s.bound) fail("skip beyond bound");
    auto primes = sieve(s.bound);
    std::size_t i = 0, j = 0;
    for (u64 p : primes) {
        bool in_r = i < s.records.size() && s.records[i].p == p;
        bool in_s = j < s.skipped.size() && s.skipped[j].p == p;
        if (in_r == in_s) fail("prime " + std::to_string(p) + (in_r ? " both recorded and skipped" : " missing"));
        i += in_r;
        j += in_s;
    }
    if (i != s.records.size() || j != s.skipped.size()) fail("entry at a non-prime");
}

/// Drops everything above `bound`.
inline trace_store truncate_store(trace_store s, u64 bound) {
    if (bound >= s.bound) return s;
    auto rp = std::upper_bound(s.records.begin(), s.records.end(), bound, [](u64 b, const trace_record& r) { return b < r.p; });
    s.records.erase(rp, s.records.end());
    auto sp = std::upper_bound(s.skipped.begin(), s.skipped.end(), bound, [](u64 b, const skip_entry& e) { return b < e.p; });
    s.skipped.erase(sp, s.skipped.end());
    s.bound = bound;
    return s;
}

// ---------------------------------------------------------------------------
// Binary format: "LTQC", u16 version, header, records, skip list to EOF.

inline constexpr std::uint16_t store_version = 1;

namespace detail {

inline void put_u64(std::string& out, u64 v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class byte_reader {
public:
    explicit byte_reader(const std::string& s) : s_(s) {}
    bool done() const { return pos_ == s_.size(); }
    u64 u(int bytes) {
        if (s_.size() - pos_ < static_cast<std::size_t>(bytes)) throw error(errc::parse_error, "store truncated");
        u64 v = 0;
        for (int i = 0; i < bytes; ++i) v |= static_cast<u64>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
        pos_ += bytes;
        return v;
    }
    std::string bytes(std::size_t n) {
        if (s_.size() - pos_ < n) throw error(errc::parse_error, "store truncated");
        std::string out = s_.substr(pos_, n);
        pos_ += n;
        return out;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_store(const trace_store& s) {
    std::string out = "LTQC";
    out.push_back(static_cast<char>(store_version & 0xFF));
    out.push_back(static_cast<char>(store_version >> 8));
    detail::put_u64(out, s.label.size());
    out += s.label;
    for (u64 v : {s.N, s.D, s.bound, static_cast<u64>(s.records.size())}) detail::put_u64(out, v);
    for (const auto& r : s.records) {
        detail::put_u64(out, r.p);
        detail::put_u64(out, static_cast<u64>(r.X));
        detail::put_u64(out, static_cast<u64>(r.Y));
    }
    for (const auto& e : s.skipped) {
        detail::put_u64(out, e.p);
        out.push_back(static_cast<char>(e.reason));
    }
    return out;
}

inline trace_store deserialize_store(const std::string& bytes) {
    detail::byte_reader in(bytes);
    if (in.bytes(4) != "LTQC") throw error(errc::parse_error, "not a trace store (bad magic)");
    u64 version = in.u(2);
    if (version != store_version) throw error(errc::parse_error, "unsupported store version " + std::to_string(version));
    trace_store s;
    u64 len = in.u(8);
    if (len > 4096) throw error(errc::parse_error, "implausible label length");
    s.label = in.bytes(len);
    s.N = in.u(8);
    s.D = in.u(8);
    s.bound = in.u(8);
    u64 count = in.u(8);
    if (count > bytes.size() / 24) throw error(errc::parse_error, "record count exceeds file size");
    s.records.resize(count);
    for (auto& r : s.records) {
        r.p = in.u(8);
        r.X = static_cast<i64>(in.u(8));
        r.Y = static_cast<i64>(in.u(8));
    }
    while (!in.done()) {
        skip_entry e;
        e.p = in.u(8);
        u64 code = in.u(1);
        if (code < 1 || code > 3) throw error(errc::parse_error, "bad skip reason code " + std::to_string(code));
        e.reason = static_cast<skip_reason>(code);
        s.skipped.push_back(e);
    }
    return s;
}

/// Writes through a temporary file in the same directory, then renames.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& data) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error(errc::io_error, "cannot open " + tmp.string() + " for writing");
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw error(errc::io_error, "write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void save_store(const trace_store& s, const std::filesystem::path& path) { write_file_atomic(path, serialize_store(s)); }

inline trace_store load_store(const std::filesystem::path& path) {
    trace_store s = deserialize_store(read_file(path));
    validate_store(s);
    return s;
}

// ---------------------------------------------------------------------------
// Building

struct build_config {
    lpoly_config lp;
    unsigned threads = 1;
    /// Primes per work unit.
    std::size_t chunk = 2048;
    /// Called after each finished chunk with the largest prime of that chunk.
    std::function<void(u64)> progress;
};

/// Extends each store to `bound` (stores already at or past it are left alone).
/// One square table per prime serves every curve.
inline void extend_stores(std::span<trace_store> stores, std::span<const curve_spec> curves, u64 bound,
                          const build_config& cfg = {}) {
    if (stores.size() != curves.size()) throw error(errc::invalid_argument, "extend_stores: stores and curves differ in length");
    if (bound < 2) throw error(errc::invalid_argument, "bound must be >= 2");
    if (bound >= max_engine_prime) throw error(errc::out_of_range, "bound beyond engine range");
    u64 lo = bound;
    for (std::size_t i = 0; i < stores.size(); ++i) {
        validate(curves[i]);
        const auto& s = stores[i];
        if (s.label != curves[i].label || s.N != curves[i].N || s.D != curves[i].D)
            throw error(errc::invalid_argument, "store " + s.label + " does not match curve " + curves[i].label);
        lo = std::min(lo, s.bound);
    }
    if (lo >= bound) return;
    std::vector<u64> primes = sieve(bound);
    primes.erase(primes.begin(), std::upper_bound(primes.begin(), primes.end(), lo));

    struct chunk_out {
        std::vector<std::vector<trace_record>> rec;
        std::vector<std::vector<skip_entry>> skip;
    };
    const std::size_t nchunks = (primes.size() + cfg.chunk - 1) / cfg.chunk;
    std::vector<chunk_out> outs(nchunks);
    std::atomic<std::size_t> next{0};
    std::mutex progress_mu, error_mu;
    std::exception_ptr failure;

    auto work = [&] {
        for (;;) {
            std::size_t ci = next.fetch_add(1);
            if (ci >= nchunks) return;
            {
                std::lock_guard lock(error_mu);
                if (failure) return;
            }
            chunk_out& o = outs[ci];
            o.rec.resize(curves.size());
            o.skip.resize(curves.size());
            std::size_t b = ci * cfg.chunk, e = std::min(primes.size(), b + cfg.chunk);
            try {
                for (std::size_t k = b; k < e; ++k) {
                    u64 p = primes[k];
                    std::optional<square_table> sq;
                    for (std::size_t i = 0; i < curves.size(); ++i) {
                        if (p <= stores[i].bound) continue;
                        const curve_spec& c = curves[i];
                        if (c.N % p == 0) {
                            o.skip[i].push_back({p, skip_reason::level});
                            continue;
                        }
                        if (!has_good_reduction(c, p)) {
                            o.skip[i].push_back({p, skip_reason::bad_model});
                            continue;
                        }
                        if (!sq) sq.emplace(p);
                        fpoly f = reduce_sextic(c, p);
                        try {
                            trace_record r = detail::lpoly_reduced(c, p, f, *sq, cfg.lp);
                            z_from_record(r, c.D);
                            o.rec[i].push_back(r);
                        } catch (const ambiguous&) {
                            o.skip[i].push_back({p, skip_reason::ambiguous});
                        }
                    }
                }
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!failure) failure = std::current_exception();
                return;
            }
            if (cfg.progress) {
                std::lock_guard lock(progress_mu);
                cfg.progress(primes[e - 1]);
            }
        }
    };
    unsigned nt = std::max(1u, cfg.threads);
    if (nt == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t i = 0; i < stores.size(); ++i) {
        trace_store& s = stores[i];
        if (s.bound >= bound) continue;
        for (auto& o : outs) {
            s.records.insert(s.records.end(), o.rec[i].begin(), o.rec[i].end());
            s.skipped.insert(s.skipped.end(), o.skip[i].begin(), o.skip[i].end());
        }
        s.bound = bound;
    }
}

inline trace_store build_store(const curve_spec& c, u64 bound, const build_config& cfg = {}) {
    trace_store s = empty_store(c);
    extend_stores(std::span<trace_store>(&s, 1), std::span<const curve_spec>(&c, 1), bound, cfg);
    return s;
}

// ---------------------------------------------------------------------------
// Counting. Primes dividing N count as rational-coefficient primes (Z_p = 0);
// other skipped primes are left out of numerators and of pi(x).

/// Read-only index over a store: the counted primes and their z_p.
class census {
public:
    census(const trace_store& s) : s_(&s) {
        std::size_t j = 0;
        for (const auto& r : s.records) {
            while (j < s.skipped.size() && s.skipped[j].p < r.p) push_skip(s.skipped[j++]);
            p_.push_back(r.p);
            z_.push_back(z_from_record(r, s.D));
        }
        while (j < s.skipped.size()) push_skip(s.skipped[j++]);
    }

    const trace_store& store() const { return *s_; }

    void require_within(u64 x) const {
        if (x > s_->bound)
            throw error(errc::out_of_range, "x = " + std::to_string(x) + " exceeds store bound " + std::to_string(s_->bound));
    }

    /// Number of counted primes below x.
    std::size_t prefix(u64 x) const {
        require_within(x);
        return static_cast<std::size_t>(std::lower_bound(p_.begin(), p_.end(), x) - p_.begin());
    }

    template <class Pred>
    u64 count(u64 x, Pred pred) const {
        std::size_t n = prefix(x);
        u64 c = 0;
        for (std::size_t i = 0; i < n; ++i) c += pred(z_[i]);
        return c;
    }

    /// Counts at several sorted x in one pass.
    template <class Pred>
    std::vector<u64> count_at(const std::vector<u64>& xs, Pred pred) const {
        std::vector<u64> out(xs.size(), 0);
        std::size_t i = 0;
        u64 acc = 0;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            require_within(xs[j]);
            for (; i < p_.size() && p_[i] < xs[j]; ++i) acc += pred(z_[i]);
            out[j] = acc;
        }
        return out;
    }

private:
    void push_skip(const skip_entry& e) {
        if (e.reason != skip_reason::level) return;
        p_.push_back(e.p);
        z_.push_back(0);
    }

    const trace_store* s_;
    std::vector<u64> p_;
    std::vector<u64> z_;
};

namespace detail {

inline double checked_ratio(u64 num, u64 den, const std::string& what) {
    if (den == 0) throw error(errc::degenerate, what + ": no primes counted (denominator 0)");
    return static_cast<double>(num) / static_cast<double>(den);
}

inline void require_modulus(u64 m) {
    if (m == 0) throw error(errc::invalid_argument, "m must be positive");
}

}  // namespace detail

/// pi(x) as used by the census: recorded primes plus level primes below x.
inline u64 census_pi(const census& c, u64 x) { return c.prefix(x); }

/// N_f(x) = #{p < x : a_p rational}.
inline u64 count_rational(const census& c, u64 x) {
    return c.count(x, [](u64 z) { return z == 0; });
}

/// #{p < x : m | z_p}.
inline u64 count_Pm(const census& c, u64 m, u64 x) {
    detail::require_modulus(m);
    return c.count(x, [m](u64 z) { return z % m == 0; });
}

/// #{p < x : |z_p| < m/2}.
inline u64 count_Pm_inf(const census& c, u64 m, u64 x) {
    detail::require_modulus(m);
    return c.count(x, [m](u64 z) { return 2 * z < m; });
}

inline double ratio_P(const census& c, u64 x) { return detail::checked_ratio(count_rational(c, x), census_pi(c, x), "P(x)"); }

inline double ratio_Pm(const census& c, u64 m, u64 x) {
    return detail::checked_ratio(count_Pm(c, m, x), census_pi(c, x), "P_" + std::to_string(m) + "(x)");
}

inline double ratio_Pm_inf(const census& c, u64 m, u64 x) {
    return detail::checked_ratio(count_Pm_inf(c, m, x), census_pi(c, x), "P^" + std::to_string(m) + "(x)");
}

// ---------------------------------------------------------------------------
// Least squares for N_f(x) ~ c sqrt(x)/log(x)

enum class spacing { linear, log };

inline const char* to_string(spacing s) { return s == spacing::linear ? "linear" : "log"; }

struct fit_result {
    double constant = 0;
    std::vector<std::pair<u64, u64>> samples;  // (x, N_f(x))
    double residual_norm = 0;
};

inline double fit_basis(double x) { return std::sqrt(x) / std::log(x); }

/// Closed-form one-parameter least squares.
inline fit_result fit_constant(const std::vector<std::pair<u64, u64>>& samples) {
    if (samples.size() < 2) throw error(errc::invalid_argument, "fit needs at least 2 samples");
    double num = 0, den = 0;
    bool any = false;
    for (auto [x, n] : samples) {
        if (x < 2) throw error(errc::invalid_argument, "fit sample x must be >= 2");
        double g = fit_basis(static_cast<double>(x));
        num += static_cast<double>(n) * g;
        den += g * g;
        any |= n != 0;
    }
    if (!any) throw error(errc::degenerate, "all " + std::to_string(samples.size()) + " fit samples are zero");
    fit_result r;
    r.constant = num / den;
    r.samples = samples;
    double rs = 0;
    for (auto [x, n] : samples) {
        double e = static_cast<double>(n) - r.constant * fit_basis(static_cast<double>(x));
        rs += e * e;
    }
    r.residual_norm = std::sqrt(rs);
    return r;
}

/// Sample points up to x: linear x*j/n, or geometric from x/1000 (at least 16).
inline std::vector<u64> sample_points(u64 x, unsigned n, spacing sp) {
    if (n < 2) throw error(errc::invalid_argument, "need at least 2 samples");
    std::vector<u64> xs;
    if (sp == spacing::linear) {
        for (unsigned j = 1; j <= n; ++j) xs.push_back(static_cast<u64>(static_cast<u128>(x) * j / n));
    } else {
        double lo = std::max(16.0, static_cast<double>(x) / 1000), hi = static_cast<double>(x);
        for (unsigned j = 0; j < n; ++j) xs.push_back(static_cast<u64>(std::llround(lo * std::pow(hi / lo, static_cast<double>(j) / (n - 1)))));
        xs.back() = x;
    }
    for (auto& v : xs) v = std::max<u64>(v, 3);
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

inline fit_result fit_constant(const census& c, unsigned n, spacing sp, std::optional<u64> x = std::nullopt) {
    u64 top = x.value_or(c.store().bound);
    c.require_within(top);
    std::vector<u64> xs = sample_points(top, n, sp);
    auto counts = c.count_at(xs, [](u64 z) { return z == 0; });
    std::vector<std::pair<u64, u64>> samples;
    for (std::size_t j = 0; j < xs.size(); ++j) samples.push_back({xs[j], counts[j]});
    return fit_constant(samples);
}

// ---------------------------------------------------------------------------
// Local factors

/// The k rule: largest k with 400 l^(2k) <= x, i.e. l^k <= sqrt(x)/20; 0 if none.
inline unsigned k_rule(u64 ell, u64 x) {
    if (ell < 2) throw error(errc::invalid_argument, "l must be >= 2");
    unsigned k = 0;
    u128 pk = static_cast<u128>(ell) * ell;
    while (static_cast<u128>(400) * pk <= x) {
        ++k;
        pk *= static_cast<u128>(ell) * ell;
    }
    return k;
}

/// The k rule clamped to k >= 1.
inline unsigned empirical_k(u64 ell, u64 x) { return std::max(1u, k_rule(ell, x)); }

/// l^k * P_{l^k}(x), the measured stand-in for F^_l.
inline double empirical_local_factor(const census& s, u64 ell, u64 x) {
    if (!is_prime(ell)) throw error(errc::invalid_argument, "l must be prime");
    u64 m = ipow(ell, empirical_k(ell, x));
    return static_cast<double>(m) * ratio_Pm(s, m, x);
}

struct exceptional_flag {
    u64 ell = 0;
    unsigned k = 1;
    double observed = 0;   // l^k P_{l^k}(x)
    double reference = 0;  // large-image value l^k #A^t/#A
    double deviation = 0;
    bool flagged = false;
    /// l^k <= sqrt(x)/20; beyond that primes with z_p = 0 dominate the count.
    bool in_range = false;
};

/// Large-image reference l^k #A^t/#A: closed form when l is unramified, the
/// enumeration over (Z/l^k)[sqrt D] when l ramifies and the guard allows it.
inline double large_image_reference(u64 ell, unsigned k, u64 D) {
    if (ell == 2) throw error(errc::unsupported, "no large-image reference at l = 2");
    splitting sp = splitting_of(ell, D);
    if (sp != splitting::ramified) return fhat_finite(ell, k, sp).convert_to<double>();
    try {
        return large_image_factor_enumerated(ell, k, D).convert_to<double>();
    } catch (const error& e) {
        if (e.code() != errc::too_large) throw;
        throw error(errc::unsupported, "no large-image reference for ramified l = " + std::to_string(ell) + " at k = " + std::to_string(k));
    }
}

inline exceptional_flag detect_exceptional(const census& s, u64 ell, unsigned k, u64 x, double threshold = 0.10) {
    if (!is_prime(ell)) throw error(errc::invalid_argument, "l must be prime");
    if (k == 0) throw error(errc::invalid_argument, "k must be >= 1");
    exceptional_flag f;
    f.ell = ell;
    f.k = k;
    f.reference = large_image_reference(ell, k, s.store().D);
    u64 m = ipow(ell, k);
    f.observed = static_cast<double>(m) * ratio_Pm(s, m, x);
    f.deviation = std::fabs(f.observed / f.reference - 1);
    f.flagged = f.deviation > threshold;
    f.in_range = k_rule(ell, x) >= k;
    return f;
}

// ---------------------------------------------------------------------------
// Diagnostics

/// P_m(x) P_m2(x) / P_{m m2}(x).
inline double independence_ratio(const census& s, u64 m, u64 m2, u64 x) {
    if (std::gcd(m, m2) != 1) throw error(errc::invalid_argument, "independence_ratio needs coprime moduli");
    u64 den = count_Pm(s, m * m2, x);
    if (den == 0)
        throw error(errc::degenerate, "P_" + std::to_string(m * m2) + "(x) has no primes below " + std::to_string(x));
    return ratio_Pm(s, m, x) * ratio_Pm(s, m2, x) / ratio_Pm(s, m * m2, x);
}

/// P^m(x) P_m(x) / P(x).
inline double assumption_ratio(const census& s, u64 m, u64 x) {
    u64 nr = count_rational(s, x);
    if (nr == 0) throw error(errc::degenerate, "P(x) is zero below " + std::to_string(x));
    return ratio_Pm_inf(s, m, x) * ratio_Pm(s, m, x) / ratio_P(s, x);
}

// ---------------------------------------------------------------------------
// Prediction

struct predict_config {
    unsigned samples = 50;
    spacing sample_spacing = spacing::linear;
    double threshold = 0.10;
    /// Exact F^_l are multiplied up to here; a tail estimate covers the rest.
    u64 fhat_cutoff = 10000;
    std::vector<u64> moduli = {2, 4, 8, 24, 120, 840};
    std::vector<std::pair<u64, u64>> independence_pairs = {{8, 3}, {8, 5}, {8, 7}, {3, 5}, {3, 7}, {5, 7}};
};

struct local_factor_entry {
    u64 ell = 0;
    unsigned k = 0;
    double value = 0;
};

struct diagnostic_point {
    u64 x = 0;
    std::string series;
    double value = 0;
};

struct prediction_report {
    std::string label;
    u64 x = 0;
    double fhat = 0;
    fhat_result fhat_detail;
    std::vector<local_factor_entry> empirical;
    double chat = 0;
    fit_result ctilde;
    double ratio = 0;
    std::vector<diagnostic_point> diagnostics;
    std::vector<exceptional_flag> flags;
};

/// 16 sqrt(D) F^ / (3 pi^2).
inline double chat_from_fhat(u64 D, double fhat) {
    return 16 * std::sqrt(static_cast<double>(D)) * fhat / (3 * std::numbers::pi * std::numbers::pi);
}

inline prediction_report predict(const trace_store& st, u64 x, const predict_config& cfg = {}) {
    const census s(st);
    s.require_within(x);
    prediction_report rep;
    rep.label = st.label;
    rep.x = x;
    std::map<u64, double> emp;
    for (u64 ell : required_empirical_primes(st.D, st.N)) {
        // k = 0 gives l^0 P_1(x) = 1.
        unsigned k = k_rule(ell, x);
        local_factor_entry e{ell, k, 1.0};
        if (k > 0) e.value = static_cast<double>(ipow(ell, k)) * ratio_Pm(s, ipow(ell, k), x);
        emp[ell] = e.value;
        rep.empirical.push_back(e);
    }
    rep.fhat_detail = fhat_product(st.D, st.N, emp, cfg.fhat_cutoff, true);
    rep.fhat = rep.fhat_detail.value;
    rep.chat = chat_from_fhat(st.D, rep.fhat);
    rep.ctilde = fit_constant(s, cfg.samples, cfg.sample_spacing, x);
    rep.ratio = rep.ctilde.constant / rep.chat;

    for (auto [n_x, n_f] : rep.ctilde.samples) {
        u64 sx = n_x;
        rep.diagnostics.push_back({sx, "P", ratio_P(s, sx)});
        for (auto [m, m2] : cfg.independence_pairs) {
            if (count_Pm(s, m * m2, sx) == 0) continue;
            rep.diagnostics.push_back({sx, "ind_" + std::to_string(m) + "_" + std::to_string(m2), independence_ratio(s, m, m2, sx)});
        }
        if (n_f == 0) continue;
        for (u64 m : cfg.moduli) rep.diagnostics.push_back({sx, "alpha_" + std::to_string(m), assumption_ratio(s, m, sx)});
    }
    for (u64 ell : possible_exceptional_primes(st.N)) {
        if (ell == 2) continue;
        try {
            rep.flags.push_back(detect_exceptional(s, ell, 1, x, cfg.threshold));
        } catch (const error& e) {
            if (e.code() != errc::unsupported) throw;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// CSV

struct csv_row {
    u64 x;
    double value;
    std::string series;
};

inline std::string to_csv(const std::vector<csv_row>& rows) {
    std::string out = "x,value,series\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g", r.value);
        out += std::to_string(r.x) + "," + buf + "," + r.series + "\n";
    }
    return out;
}

/// One row per sample x and series: N_f, pi, P, P_m, P^m for each m.
inline std::vector<csv_row> analysis_rows(const census& s, const std::vector<u64>& xs, const std::vector<u64>& moduli) {
    std::vector<csv_row> rows;
    for (u64 x : xs) {
        u64 pi = census_pi(s, x);
        rows.push_back({x, static_cast<double>(count_rational(s, x)), "N_f"});
        rows.push_back({x, static_cast<double>(pi), "pi"});
        if (pi == 0) continue;
        rows.push_back({x, ratio_P(s, x), "P"});
        for (u64 m : moduli) {
            rows.push_back({x, ratio_Pm(s, m, x), "P_" + std::to_string(m)});
            rows.push_back({x, ratio_Pm_inf(s, m, x), "Pinf_" + std::to_string(m)});
        }
    }
    return rows;
}

}  // namespace ltq
