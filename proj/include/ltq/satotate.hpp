#pragma once

// Joint Sato-Tate density of (X_p/sqrt p, Y_p/p) for USp(4) restricted to
// SU(2) x SU(2), the measure of the strips T_eps, and the archimedean
// prediction for P^m(x).

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>

#include "ltq/error.hpp"
#include "ltq/sieve.hpp"

namespace ltq {

struct quadrature_config {
    double abs_tol = 1e-10;
    long max_subdivisions = 2'000'000;
};

struct density_value {
    double value = 0;
    bool infinite = false;
};

inline bool inside_T(double x, double y) { return y + 2 > 2 * std::fabs(x) && 4 * y < x * x + 8; }

/// Phi(x, y); zero outside T, flagged infinite on the parabola 4y = x^2 + 8.
inline density_value st_density(double x, double y) {
    double den = x * x - 4 * y + 8;
    if (den == 0 && y + 2 > 2 * std::fabs(x)) return {0, true};
    if (!inside_T(x, y)) return {0, false};
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return {std::sqrt((y - 2 * x + 2) * (y + 2 * x + 2) / den) / (2 * pi2), false};
}

/// 32 eps / (3 pi^2).
inline double delta_asymptotic(double eps) { return 32 * eps / (3 * std::numbers::pi * std::numbers::pi); }

namespace detail {

// phi(u, v) = sqrt((u^2+16-4v^2)^2 - 64u^2)/(4 pi^2), factored for accuracy.
inline double phi_uv(double u, double v) {
    double q = (4 - u - 2 * v) * (4 - u + 2 * v) * (4 + u - 2 * v) * (4 + u + 2 * v);
    return q > 0 ? std::sqrt(q) / (4 * std::numbers::pi * std::numbers::pi) : 0.0;
}

class simpson {
public:
    explicit simpson(const quadrature_config& cfg) : cfg_(cfg) {}

    template <class F>
    double integrate(F&& f, double a, double b, double tol) {
        if (!(b > a)) return 0;
        double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
        double whole = (b - a) / 6 * (fa + 4 * fm + fb);
        return step(f, a, b, fa, fm, fb, whole, tol, 0);
    }

private:
    template <class F>
    double step(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
        if (++used_ > cfg_.max_subdivisions) throw error(errc::not_converged, "quadrature exceeded the subdivision budget");
        double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        double flm = f(lm), frm = f(rm);
        double left = (m - a) / 6 * (fa + 4 * flm + fm);
        double right = (b - m) / 6 * (fm + 4 * frm + fb);
        double diff = left + right - whole;
        if (depth >= 48 || std::fabs(diff) <= 15 * tol) return left + right + diff / 15;
        return step(f, a, m, fa, flm, fm, left, tol / 2, depth + 1) + step(f, m, b, fm, frm, fb, right, tol / 2, depth + 1);
    }

    quadrature_config cfg_;
    long used_ = 0;
};

// Integral over u in [a, b] (subset of [0, 4]) of the inner v-integral up to min(eps, 2 - u/2).
inline double strip_integral(double eps, double a, double b, const quadrature_config& cfg) {
    simpson outer(cfg), inner(cfg);
    const double inner_tol = cfg.abs_tol * 0.01;
    const double cut = 4 - 2 * eps;
    auto flat = [&](double u) { return inner.integrate([u](double v) { return phi_uv(u, v); }, 0, eps, inner_tol); };
    // v = w (1 - s^2) removes the square-root zero at v = w.
    auto cap = [&](double u) {
        double w = 2 - u / 2;
        if (w <= 0) return 0.0;
        return inner.integrate(
            [u, w](double s) {
                double v = w * (1 - s * s);
                double q = 2 * w * (4 - u + 2 * v) * (4 + u - 2 * v) * (4 + u + 2 * v);
                return q > 0 ? 2 * w * s * s * std::sqrt(q) / (4 * std::numbers::pi * std::numbers::pi) : 0.0;
            },
            0, 1, inner_tol);
    };
    double total = 0;
    double m1 = std::min(b, cut);
    if (m1 > a) total += outer.integrate(flat, a, m1, cfg.abs_tol / 2);
    double m2 = std::max(a, cut);
    if (b > m2) total += outer.integrate(cap, m2, b, cfg.abs_tol / 2);
    return total;
}

}  // namespace detail

/// delta(T_eps): mass of the strip sqrt(x^2/4 - y + 2) < eps of T; eps > 2 is clamped.
inline double delta_T_eps(double eps, const quadrature_config& cfg = {}) {
    if (!(cfg.abs_tol > 0)) throw error(errc::invalid_argument, "quadrature tolerance must be positive");
    if (eps <= 0) return 0;
    eps = std::min(eps, 2.0);
    return detail::strip_integral(eps, 0, 4, cfg);
}

/// The same measure integrated over both signs of x (half of the doubled density).
inline double delta_T_eps_full(double eps, const quadrature_config& cfg = {}) {
    if (!(cfg.abs_tol > 0)) throw error(errc::invalid_argument, "quadrature tolerance must be positive");
    if (eps <= 0) return 0;
    eps = std::min(eps, 2.0);
    detail::simpson outer(cfg), inner(cfg);
    const double inner_tol = cfg.abs_tol * 0.01;
    auto g = [&](double u) {
        double top = std::min(eps, 2 - std::fabs(u) / 2);
        if (top <= 0) return 0.0;
        return 0.5 * inner.integrate([u](double v) { return detail::phi_uv(u, v); }, 0, top, inner_tol);
    };
    double cut = 4 - 2 * eps;
    double tol = cfg.abs_tol / 3;
    return outer.integrate(g, -4, -cut, tol) + outer.integrate(g, -cut, cut, tol) + outer.integrate(g, cut, 4, tol);
}

/// delta(T_eps) on a geometric grid eps_j = 2 * 1.01^-j, filled lazily and
/// linearly interpolated. Safe for concurrent use.
class delta_cache {
public:
    explicit delta_cache(quadrature_config cfg = {}) : cfg_(cfg) {}

    double operator()(double eps) {
        if (eps <= 0) return 0;
        if (eps >= 2) return at(0);
        double jf = std::log(2 / eps) / std::log(ratio);
        long j = static_cast<long>(std::floor(jf));
        if (j >= max_index) {
            double e = grid(max_index);
            return at(max_index) * eps / e;
        }
        double e0 = grid(j), e1 = grid(j + 1);
        double d0 = at(j), d1 = at(j + 1);
        return d1 + (d0 - d1) * (eps - e1) / (e0 - e1);
    }

private:
    static constexpr double ratio = 1.01;
    static constexpr long max_index = 1200;
    static double grid(long j) { return 2 * std::pow(ratio, -static_cast<double>(j)); }

    double at(long j) {
        {
            std::shared_lock lock(mu_);
            auto it = values_.find(j);
            if (it != values_.end()) return it->second;
        }
        double v = delta_T_eps(grid(j), cfg_);
        std::unique_lock lock(mu_);
        return values_.emplace(j, v).first->second;
    }

    quadrature_config cfg_;
    std::shared_mutex mu_;
    std::map<long, double> values_;
};

enum class pm_mode { sum, asymptotic };

/// Predicted P^m(x): (1/pi(x)) sum_{p <= x} delta(T_{m sqrt D / (4 sqrt p)}), or 16 m sqrt D / (3 pi^2 sqrt x).
inline double predicted_Pm_inf(u64 m, u64 D, u64 x, pm_mode mode, delta_cache& cache) {
    if (x < 2) throw error(errc::invalid_argument, "predicted_Pm_inf: x must be >= 2");
    const double sD = std::sqrt(static_cast<double>(D));
    if (mode == pm_mode::asymptotic)
        return 16 * static_cast<double>(m) * sD / (3 * std::numbers::pi * std::numbers::pi * std::sqrt(static_cast<double>(x)));
    auto primes = sieve(x);
    double s = 0;
    for (u64 p : primes) s += cache(static_cast<double>(m) * sD / (4 * std::sqrt(static_cast<double>(p))));
    return s / static_cast<double>(primes.size());
}

inline double predicted_Pm_inf(u64 m, u64 D, u64 x, pm_mode mode, const quadrature_config& cfg = {}) {
    delta_cache cache(cfg);
    return predicted_Pm_inf(m, D, x, mode, cache);
}

}  // namespace ltq
