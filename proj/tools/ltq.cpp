// ltq: trace stores, statistics and predictions for genus-2 curves whose
// Jacobians carry real multiplication by Q(sqrt D).
//
// Exit status: 0 success, 1 validation (bad input, failed verification),
// 2 computation error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltq/catalog.hpp"
#include "ltq/census.hpp"
#include "ltq/galois.hpp"
#include "ltq/satotate.hpp"

namespace fs = std::filesystem;
using namespace ltq;

namespace {

constexpr const char* catalog_env = "LTQ_CATALOG";

struct options {
    std::string catalog_path;
    unsigned threads = 1;
    u64 naive_threshold = u64{1} << 11;
    u64 seed = 0;
    double tol = 1e-10;
};

catalog load_catalog(const options& o) {
    std::string path = o.catalog_path;
    if (path.empty())
        if (const char* env = std::getenv(catalog_env)) path = env;
    if (path.empty()) return catalog{};
    return parse_catalog(read_file(path));
}

std::string fmt(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

void write_output(const std::string& path, const std::string& data) {
    if (path == "-")
        std::cout << data;
    else
        write_file_atomic(path, data);
}

// --- compute ---------------------------------------------------------------

struct compute_args {
    std::vector<std::string> curves;
    u64 bound = 0;
    std::string out;
    std::string out_dir;
};

int run_compute(const options& o, const compute_args& a) {
    catalog cat = load_catalog(o);
    if (a.curves.empty()) throw error(errc::invalid_argument, "compute: at least one --curve is required");
    if (a.out.empty() == a.out_dir.empty()) throw error(errc::invalid_argument, "compute: give exactly one of --out and --out-dir");
    if (!a.out.empty() && a.curves.size() != 1) throw error(errc::invalid_argument, "compute: --out takes a single curve; use --out-dir");

    std::vector<curve_spec> specs;
    std::vector<fs::path> paths;
    for (const auto& label : a.curves) {
        specs.push_back(cat.find(label));
        paths.push_back(a.out.empty() ? fs::path(a.out_dir) / (label + ".ltqc") : fs::path(a.out));
    }
    if (!a.out_dir.empty()) fs::create_directories(a.out_dir);
    std::vector<trace_store> stores;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (fs::exists(paths[i])) {
            trace_store s = load_store(paths[i]);
            std::cerr << specs[i].label << ": resuming from bound " << s.bound << "\n";
            stores.push_back(std::move(s));
        } else {
            stores.push_back(empty_store(specs[i]));
        }
    }
    build_config cfg;
    cfg.threads = o.threads;
    cfg.lp.naive_threshold = o.naive_threshold;
    cfg.lp.seed = o.seed;
    cfg.progress = [&](u64 p) { std::cerr << "  p <= " << p << "\r" << std::flush; };
    extend_stores(stores, specs, a.bound, cfg);
    std::cerr << "\n";
    for (std::size_t i = 0; i < stores.size(); ++i) {
        save_store(stores[i], paths[i]);
        u64 amb = 0;
        for (const auto& e : stores[i].skipped) amb += e.reason == skip_reason::ambiguous;
        std::cerr << stores[i].label << ": " << stores[i].records.size() << " records, " << stores[i].skipped.size()
                  << " skipped (" << amb << " ambiguous), bound " << stores[i].bound << " -> " << paths[i].string() << "\n";
    }
    return 0;
}

// --- analyze ---------------------------------------------------------------

struct analyze_args {
    std::string store;
    u64 x = 0;
    unsigned samples = 50;
    std::string spacing = "linear";
    std::vector<u64> moduli = {3, 5, 7, 8, 100};
    std::string csv;
};

spacing parse_spacing(const std::string& s) {
    if (s == "linear") return spacing::linear;
    if (s == "log") return spacing::log;
    throw error(errc::invalid_argument, "--spacing must be linear or log");
}

int run_analyze(const options& o, const analyze_args& a) {
    trace_store st = load_store(a.store);
    census c(st);
    u64 x = a.x ? a.x : st.bound;
    fit_result fit = fit_constant(c, a.samples, parse_spacing(a.spacing), x);
    // summary moves to stderr when the CSV takes stdout
    std::ostream& log = a.csv == "-" ? std::cerr : std::cout;
    log << st.label << "  N=" << st.N << " D=" << st.D << " bound=" << st.bound << "\n";
    log << "x=" << x << "  pi=" << census_pi(c, x) << "  N_f=" << count_rational(c, x) << "  P=" << fmt(ratio_P(c, x)) << "\n";
    log << "c~ = " << fmt(fit.constant, 8) << "  (residual norm " << fmt(fit.residual_norm) << ", " << fit.samples.size()
              << " samples)\n";
    for (u64 m : a.moduli)
        log << "m=" << m << "  P_m=" << fmt(ratio_Pm(c, m, x)) << "  P^m=" << fmt(ratio_Pm_inf(c, m, x)) << "\n";
    if (!a.csv.empty()) {
        quadrature_config qc;
        qc.abs_tol = o.tol;
        delta_cache cache(qc);
        std::ostringstream out;
        out << "x,pi,N_f,P,fit";
        for (u64 m : a.moduli) out << ",P_" << m << ",Pinf_" << m << ",Pinf_pred_" << m;
        out << "\n";
        for (auto [sx, nf] : fit.samples) {
            u64 pi = census_pi(c, sx);
            out << sx << "," << pi << "," << nf << "," << (pi ? fmt(ratio_P(c, sx), 10) : "") << ","
                << fmt(fit.constant * fit_basis(static_cast<double>(sx)), 10);
            for (u64 m : a.moduli) {
                out << "," << (pi ? fmt(ratio_Pm(c, m, sx), 10) : "") << "," << (pi ? fmt(ratio_Pm_inf(c, m, sx), 10) : "") << ","
                    << fmt(predicted_Pm_inf(m, st.D, sx, pm_mode::sum, cache), 10);
            }
            out << "\n";
        }
        write_output(a.csv, out.str());
    }
    return 0;
}

// --- predict ---------------------------------------------------------------

struct predict_args {
    std::string store;
    u64 x = 0;
    unsigned samples = 50;
    std::string spacing = "linear";
    double threshold = 0.10;
    std::vector<u64> moduli;
    std::string csv;
};

int run_predict(const options&, const predict_args& a) {
    trace_store st = load_store(a.store);
    u64 x = a.x ? a.x : st.bound;
    predict_config cfg;
    cfg.samples = a.samples;
    cfg.sample_spacing = parse_spacing(a.spacing);
    cfg.threshold = a.threshold;
    if (!a.moduli.empty()) cfg.moduli = a.moduli;
    prediction_report r = predict(st, x, cfg);
    std::ostream& log = a.csv == "-" ? std::cerr : std::cout;
    log << r.label << " at x=" << x << "\n";
    for (const auto& e : r.empirical)
        log << "  F_" << e.ell << "  k=" << e.k << "  " << fmt(e.value, 8) << (e.k == 0 ? "  (k rule gives 0)" : "") << "\n";
    log << "F^   = " << fmt(r.fhat, 8) << "  (finite " << fmt(r.fhat_detail.finite_product, 8) << ", tail "
              << fmt(r.fhat_detail.tail_factor, 8) << ")\n";
    log << "c^   = " << fmt(r.chat, 8) << "\n";
    log << "c~   = " << fmt(r.ctilde.constant, 8) << "\n";
    log << "c~/c^ = " << fmt(r.ratio, 6) << "\n";
    for (const auto& f : r.flags)
        log << "  l=" << f.ell << " k=" << f.k << "  observed " << fmt(f.observed) << "  large image " << fmt(f.reference)
                  << "  deviation " << fmt(f.deviation, 3) << (f.flagged ? "  EXCEPTIONAL" : "") << (f.in_range ? "" : "  (l^k > sqrt(x)/20)")
                  << "\n";
    if (!a.csv.empty()) {
        std::vector<csv_row> rows;
        for (const auto& d : r.diagnostics) rows.push_back({d.x, d.value, d.series});
        for (auto [sx, nf] : r.ctilde.samples) {
            rows.push_back({sx, static_cast<double>(nf), "N_f"});
            rows.push_back({sx, r.chat * fit_basis(static_cast<double>(sx)), "chat_model"});
            rows.push_back({sx, r.ctilde.constant * fit_basis(static_cast<double>(sx)), "ctilde_model"});
        }
        write_output(a.csv, to_csv(rows));
    }
    return 0;
}

// --- verify-groups -----------------------------------------------------------

int run_verify(const options&, u64 ell, unsigned k) {
    auto rows = verification_table(ell, k);
    bool all = true;
    std::printf("%-16s %-22s %-24s %-24s %s\n", "target", "params", "formula", "oracle", "status");
    for (const auto& r : rows) {
        const char* status = r.skipped ? "skipped (guard)" : (r.equal ? "ok" : "MISMATCH");
        all &= r.skipped || r.equal;
        std::printf("%-16s %-22s %-24s %-24s %s\n", r.target.c_str(), r.params.c_str(), r.formula.c_str(), r.oracle.c_str(), status);
    }
    return all ? 0 : 1;
}

// --- density -----------------------------------------------------------------

int run_density(const options& o, const std::vector<double>& eps) {
    quadrature_config qc;
    qc.abs_tol = o.tol;
    std::printf("%-12s %-20s %-20s %s\n", "eps", "delta(T_eps)", "32eps/(3pi^2)", "ratio");
    for (double e : eps) {
        if (e < 0) throw error(errc::invalid_argument, "--eps must be nonnegative");
        double d = delta_T_eps(e, qc), as = delta_asymptotic(e);
        std::printf("%-12.6g %-20.14g %-20.14g %s\n", e, d, as, as > 0 ? fmt(d / as, 10).c_str() : "-");
    }
    return 0;
}

// --- catalog -----------------------------------------------------------------

int run_catalog(const options& o) {
    catalog cat = load_catalog(o);
    for (const auto& c : cat.curves()) {
        std::cout << c.label << "  N=" << c.N << "  D=" << c.D << "  coeffs=[";
        for (int i = 0; i < 7; ++i) std::cout << (i ? "," : "") << c.coeffs[i];
        std::cout << "]\n";
    }
    return 0;
}

int exit_code(errc c) {
    switch (c) {
        case errc::invalid_argument:
        case errc::parse_error:
        case errc::out_of_range:
        case errc::missing_empirical:
        case errc::bad_reduction:
        case errc::unsupported:
        case errc::too_large: return 1;
        default: return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lang-Trotter style prime counts for genus-2 curves with real multiplication"};
    app.require_subcommand(1);
    options o;
    app.add_option("--catalog", o.catalog_path, std::string("JSON curve catalog merged over the built-ins (default: $") + catalog_env + ")");
    app.add_option("--threads", o.threads, "Worker threads for compute")->check(CLI::Range(1u, 1024u));
    app.add_option("--naive-threshold", o.naive_threshold, "Below this p, Y_p comes from the naive F_{p^2} count");
    app.add_option("--seed", o.seed, "Seed mixed into the per-prime BSGS generator");
    app.add_option("--tol", o.tol, "Absolute quadrature tolerance")->check(CLI::PositiveNumber);

    compute_args ca;
    auto* compute = app.add_subcommand("compute", "Build or extend trace stores");
    compute->add_option("--curve", ca.curves, "Curve label (repeatable; curves share work per prime)")->required();
    compute->add_option("--bound", ca.bound, "Largest prime considered")->required()->check(CLI::Range(u64{2}, max_engine_prime - 1));
    compute->add_option("--out", ca.out, "Store file (single curve)");
    compute->add_option("--out-dir", ca.out_dir, "Directory for <label>.ltqc stores");

    analyze_args aa;
    auto* analyze = app.add_subcommand("analyze", "Counts, fit and ratios from a store");
    analyze->add_option("--store", aa.store, "Trace store")->required();
    analyze->add_option("--x", aa.x, "Upper limit x (default: store bound)");
    analyze->add_option("--samples", aa.samples, "Sample count for the fit")->check(CLI::Range(2u, 100000u));
    analyze->add_option("--spacing", aa.spacing, "linear or log")->check(CLI::IsMember({"linear", "log"}));
    analyze->add_option("--moduli", aa.moduli, "Moduli m for P_m and P^m")->delimiter(',');
    analyze->add_option("--csv", aa.csv,
                        "CSV, one row per sample x; columns x,pi,N_f,P,fit then P_<m>,Pinf_<m>,Pinf_pred_<m> per modulus "
                        "(fit = c~ sqrt(x)/log x, Pinf_pred = summed Sato-Tate prediction); '-' for stdout");

    predict_args pa;
    auto* predict_cmd = app.add_subcommand("predict", "Assemble c^ and compare with the fitted c~");
    predict_cmd->add_option("--store", pa.store, "Trace store")->required();
    predict_cmd->add_option("--x", pa.x, "Upper limit x (default: store bound)");
    predict_cmd->add_option("--samples", pa.samples, "Sample count for the fit")->check(CLI::Range(2u, 100000u));
    predict_cmd->add_option("--spacing", pa.spacing, "linear or log")->check(CLI::IsMember({"linear", "log"}));
    predict_cmd->add_option("--threshold", pa.threshold, "Exceptional-prime deviation threshold")->check(CLI::PositiveNumber);
    predict_cmd->add_option("--moduli", pa.moduli, "Moduli for the P^m P_m / P diagnostic")->delimiter(',');
    predict_cmd->add_option("--csv", pa.csv, "Diagnostics CSV with columns x,value,series; '-' for stdout");

    u64 ell = 3;
    unsigned k = 1;
    auto* verify = app.add_subcommand("verify-groups", "Cardinality formulas against enumeration");
    verify->add_option("--ell", ell, "Odd prime l")->required();
    verify->add_option("--k", k, "Exponent k")->check(CLI::Range(1u, 64u));

    std::vector<double> eps;
    auto* density = app.add_subcommand("density", "delta(T_eps) by quadrature against 32 eps/(3 pi^2)");
    density->add_option("--eps", eps, "Strip widths")->required()->delimiter(',');

    auto* cat_cmd = app.add_subcommand("catalog", "List curves");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*compute) return run_compute(o, ca);
        if (*analyze) return run_analyze(o, aa);
        if (*predict_cmd) return run_predict(o, pa);
        if (*verify) return run_verify(o, ell, k);
        if (*density) return run_density(o, eps);
        if (*cat_cmd) return run_catalog(o);
    } catch (const error& e) {
        std::cerr << "ltq: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "ltq: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
