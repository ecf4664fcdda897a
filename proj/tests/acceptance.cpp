// Acceptance run: one PASS/FAIL line per criterion, followed by the numbers
// behind it. Exit status is nonzero if any criterion fails.
//
//   acceptance --store-dir DIR [--bound B]
//
// Stores missing from DIR (or short of B) are built or extended first.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ltq/census.hpp"
#include "ltq/galois.hpp"
#include "ltq/lpoly.hpp"
#include "ltq/satotate.hpp"

namespace fs = std::filesystem;
using namespace ltq;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) { return std::chrono::duration<double>(clock_type::now() - t0).count(); }

struct outcome {
    bool pass = true;
    std::ostringstream detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1: formulas against exhaustive enumeration, every odd l^k <= 100.
outcome formula_oracle() {
    outcome o;
    auto t0 = clock_type::now();
    int checked = 0, skipped = 0;
    for (u64 ell = 3; ell <= 100; ell += 2) {
        if (!is_prime(ell)) continue;
        for (unsigned k = 1; ipow(ell, k) <= 100; ++k)
            for (const auto& r : verification_table(ell, k)) {
                if (r.skipped) {
                    ++skipped;
                    continue;
                }
                ++checked;
                if (!r.equal) {
                    o.pass = false;
                    o.detail << "    mismatch " << ell << "^" << k << " " << r.target << " " << r.params << ": " << r.formula << " vs "
                             << r.oracle << "\n";
                }
            }
    }
    double t = seconds_since(t0);
    o.pass = o.pass && t < 300;
    o.detail << "    " << checked << " exact comparisons, " << skipped << " beyond the 1e8 guard, " << fmt("%.1f", t) << " s (limit 300 s)\n";
    return o;
}

// 2: sum P M = #GL_2 and sum P M^2 = #A^t(split).
outcome partition_identities() {
    outcome o;
    auto t0 = clock_type::now();
    for (u64 ell : {3ull, 5ull, 7ull})
        for (unsigned k : {1u, 2u}) {
            bigint pm = 0, pm2 = 0;
            for (unsigned i = 0; i <= k; ++i)
                for (unsigned j : {0u, 2u}) {
                    bigint P = card_P(ell, k, i, j), M = card_M(ell, k, i, j);
                    pm += P * M;
                    pm2 += P * M * M;
                }
            bool a = pm == card_gl2_zmod(ell, k), b = pm2 == card_A_t(ell, k, splitting::split);
            o.pass = o.pass && a && b;
            o.detail << "    " << ell << "^" << k << ": sum PM " << (a ? "=" : "!=") << " " << card_gl2_zmod(ell, k).str() << ", sum PM^2 "
                     << (b ? "=" : "!=") << " " << card_A_t(ell, k, splitting::split).str() << "\n";
        }
    double t = seconds_since(t0);
    o.pass = o.pass && t < 60;
    return o;
}

// 3: total mass and the linear limit of delta(T_eps).
outcome density() {
    outcome o;
    auto t0 = clock_type::now();
    double total = delta_T_eps(2);
    bool mass = std::fabs(total - 1) <= 1e-6;
    o.detail << "    delta(T_2) = " << fmt("%.12f", total) << "\n";
    double prev = 1e9;
    bool decreasing = true;
    double at005 = 0;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
        double rel = delta_T_eps(eps) / delta_asymptotic(eps) - 1;
        decreasing = decreasing && std::fabs(rel) < prev;
        prev = std::fabs(rel);
        if (eps == 0.05) at005 = std::fabs(rel);
        o.detail << "    eps " << eps << ": delta/asymptotic - 1 = " << fmt("%+.6f", rel) << "\n";
    }
    double t = seconds_since(t0);
    o.pass = mass && decreasing && at005 <= 0.05 && t < 60;
    return o;
}

// 4: stated q-expansion coefficients and the #J identity to 2000.
outcome curve_engine() {
    outcome o;
    auto t0 = clock_type::now();
    struct row {
        const char* label;
        u64 p;
        i64 X, Y;
        u64 z;
    };
    // X = -Tr a_p, Y = 2p + Norm a_p, z = |a_p - a_p'| / sqrt D
    const row rows[] = {
        {"C_29", 3, -2, 5, 2}, {"C_29", 5, 2, 11, 0},  {"C_43", 3, 0, 4, 2},  {"C_43", 5, -4, 12, 2},  {"C_55", 3, 0, -2, 4},
        {"C_23", 3, 0, 1, 2},  {"C_23", 5, 2, 6, 2},   {"C_87", 5, -2, 6, 2}, {"C_167", 3, 1, 5, 1},  {"C_167", 5, 2, 11, 0},
    };
    for (const auto& r : rows) {
        const curve_spec& c = builtin_curve(r.label);
        trace_record t = lpoly(c, r.p);
        u64 z = z_from_record(t, c.D);
        bool ok = t.X == r.X && t.Y == r.Y && z == r.z;
        o.pass = o.pass && ok;
        o.detail << "    " << r.label << " p=" << r.p << ": (X,Y,z) = (" << t.X << "," << t.Y << "," << z << ")"
                 << (ok ? "" : "  expected (" + std::to_string(r.X) + "," + std::to_string(r.Y) + "," + std::to_string(r.z) + ")") << "\n";
    }
    double t_rows = seconds_since(t0);
    auto t1 = clock_type::now();
    u64 checked = 0, bad = 0;
    for (const auto& c : builtin_curves())
        for (u64 p = 3; p <= 2000; p += 2) {
            if (!is_prime(p) || !has_good_reduction(c, p)) continue;
            i128 n1 = count_points(c, p, 1), n2 = count_points(c, p, 2);
            i128 lhs = (n1 * n1 + n2) / 2 - static_cast<i128>(p);
            ++checked;
            if (lhs != jacobian_order_of(lpoly(c, p))) ++bad;
        }
    double t_id = seconds_since(t1);
    o.pass = o.pass && bad == 0 && t_rows < 1 && t_id < 60;
    o.detail << "    (n1^2 + n2)/2 - p = L_p(1): " << checked - bad << "/" << checked << " primes, " << fmt("%.1f", t_id) << " s\n";
    return o;
}

// 5: Chebotarev at l = 7.
outcome chebotarev(const std::vector<trace_store>& stores, u64 x) {
    outcome o;
    for (const auto& st : stores) {
        census c(st);
        double ref = fhat_finite(7, 1, splitting_of(7, st.D)).convert_to<double>();
        double dev = 7 * ratio_Pm(c, 7, x) / ref - 1;
        bool ok = std::fabs(dev) <= 0.10;
        o.pass = o.pass && ok;
        o.detail << "    " << st.label << ": 7 P_7 / F_7 - 1 = " << fmt("%+.4f", dev) << (ok ? "" : "  (> 0.10)") << "\n";
    }
    return o;
}

// 6: exceptional flags against the expected exceptional set.
outcome flags(const std::vector<trace_store>& stores, u64 x) {
    outcome o;
    const std::set<std::pair<std::string, u64>> expected = {{"C_43", 3}, {"C_55", 3}, {"C_29", 7}, {"C_43", 7}, {"C_23", 11}, {"C_87", 5}};
    for (const auto& st : stores) {
        census c(st);
        for (u64 ell : possible_exceptional_primes(st.N)) {
            if (ell == 2) continue;
            bool is_expected = expected.count({st.label, ell}) > 0;
            bool ramified = st.D % ell == 0;
            exceptional_flag f;
            try {
                f = detect_exceptional(c, ell, 1, x);
            } catch (const error& e) {
                if (e.code() != errc::unsupported) throw;
                if (is_expected) o.pass = false;
                o.detail << "    " << st.label << " l=" << ell << ": no large-image reference\n";
                continue;
            }
            // unexpected ramified primes are outside the criterion
            bool counted = is_expected || !ramified;
            bool ok = f.flagged == is_expected;
            if (counted) o.pass = o.pass && ok;
            o.detail << "    " << st.label << " l=" << ell << ": deviation " << fmt("%.3f", f.deviation) << (f.flagged ? " flagged" : "")
                     << (is_expected ? " [expected]" : "") << (counted ? (ok ? "" : "  WRONG") : "  (ramified, not scored)")
                     << (f.in_range ? "" : "  (l > sqrt(x)/20)") << "\n";
        }
    }
    return o;
}

// 7: c~/c^ band.
outcome end_to_end(const std::vector<trace_store>& stores, u64 x) {
    outcome o;
    for (const auto& st : stores) {
        prediction_report r = predict(st, x);
        bool ok = r.ratio >= 0.8 && r.ratio <= 1.4;
        o.pass = o.pass && ok;
        o.detail << "    " << st.label << ": c~ = " << fmt("%.4f", r.ctilde.constant) << ", c^ = " << fmt("%.4f", r.chat) << ", ratio "
                 << fmt("%.4f", r.ratio) << (ok ? "" : "  (outside [0.8, 1.4])") << "\n";
    }
    return o;
}

// 8: archimedean count at m = 100.
outcome archimedean(const std::vector<trace_store>& stores, u64 x) {
    outcome o;
    delta_cache cache;
    for (const auto& st : stores) {
        census c(st);
        double pred = predicted_Pm_inf(100, st.D, x, pm_mode::sum, cache) * static_cast<double>(census_pi(c, x));
        u64 got = count_Pm_inf(c, 100, x);
        double rel = static_cast<double>(got) / pred - 1;
        bool ok = std::fabs(rel) <= 0.20;
        o.pass = o.pass && ok;
        o.detail << "    " << st.label << ": #{|z_p| < 50} = " << got << ", predicted " << fmt("%.1f", pred) << ", rel " << fmt("%+.4f", rel)
                 << "\n";
    }
    return o;
}

std::vector<trace_store> obtain_stores(const fs::path& dir, u64 bound) {
    fs::create_directories(dir);
    std::vector<trace_store> stores;
    std::vector<curve_spec> specs(builtin_curves().begin(), builtin_curves().end());
    for (const auto& c : specs) {
        fs::path p = dir / (c.label + ".ltqc");
        stores.push_back(fs::exists(p) ? load_store(p) : empty_store(c));
    }
    bool short_of = false;
    for (const auto& s : stores) short_of |= s.bound < bound;
    if (short_of) {
        std::cerr << "building stores to " << bound << " in " << dir << "\n";
        build_config cfg;
        cfg.threads = std::max(1u, std::thread::hardware_concurrency());
        extend_stores(stores, specs, bound, cfg);
        for (const auto& s : stores) save_store(s, dir / (s.label + ".ltqc"));
    }
    for (auto& s : stores) s = truncate_store(std::move(s), bound);
    return stores;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string store_dir;
    u64 bound = 1000000;
    app.add_option("--store-dir", store_dir, "Directory holding <label>.ltqc stores")->required();
    app.add_option("--bound", bound, "Census bound x");
    CLI11_PARSE(app, argc, argv);

    std::vector<std::pair<std::string, std::function<outcome()>>> criteria;
    std::vector<trace_store> stores;
    criteria.push_back({"formula-oracle exactness (all odd l^k <= 100 within the 1e8 guard)", formula_oracle});
    criteria.push_back({"partition/reassembly identities (l in {3,5,7}, k in {1,2})", partition_identities});
    criteria.push_back({"density: total mass, linear limit at eps -> 0", density});
    criteria.push_back({"curve engine vs q-expansions and #J identity to 2000", curve_engine});
    auto with_stores = [&](auto f) {
        return [&, f] {
            if (stores.empty()) stores = obtain_stores(store_dir, bound);
            return f(stores, bound);
        };
    };
    criteria.push_back({"Chebotarev convergence at l = 7, x = " + std::to_string(bound), with_stores(chebotarev)});
    criteria.push_back({"exceptional flags match the expected exceptional set, x = " + std::to_string(bound), with_stores(flags)});
    criteria.push_back({"end-to-end c~/c^ in [0.8, 1.4], x = " + std::to_string(bound), with_stores(end_to_end)});
    criteria.push_back({"archimedean count m = 100 within 20%, x = " + std::to_string(bound), with_stores(archimedean)});

    int failed = 0;
    std::ostringstream details;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "    error: " << e.what() << "\n";
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << i + 1 << "] " << criteria[i].first << "\n" << o.detail.str() << std::flush;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed ? 1 : 0;
}
