// Acceptance suite: runs every gate criterion at its pinned tolerance and
// prints one PASS/FAIL line per criterion. The CLI binary path is taken from
// argv[1] for the end-to-end determinism and figure checks.

#include "rheston/closed_form.hpp"
#include "rheston/csv.hpp"
#include "rheston/oracles.hpp"
#include "rheston/params.hpp"
#include "rheston/simulation.hpp"
#include "rheston/verification.hpp"
#include "rheston/verify_suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace rheston;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

ModelParams benchmark_params(double a) {
    ModelParams p;
    p.gamma = 1.4;
    p.delta = 0.08;
    p.rho = -0.5;
    p.r = 0.05;
    p.lambda_bar = 0.07 / 0.0225;
    p.m = 5.0;
    p.nu = 0.1125;
    p.beta_bar = 0.25;
    p.a = a;
    p.a1 = a;
    p.T = 10.0;
    p.x0 = 1.0;
    p.y0 = 0.0225;
    return p;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) { return format_csv_value(x); }

// ---- criterion 1: closed-form Riccati pair vs RK4 ----
void criterion_1() {
    const ModelParams p = benchmark_params(0.0);
    const DerivedConstants c = derive_constants(p);
    const auto t0 = std::chrono::steady_clock::now();
    const double err = riccati_rk4_max_error(p, c, 100);
    const double elapsed = seconds_since(t0);
    report(1, err < 1e-8 && elapsed < 5.0,
           "riccati vs RK4 on 100x100: max normalized error " + fmt(err) + " (tol 1e-8), " +
               fmt(elapsed) + " s (limit 5 s)");
}

// ---- criterion 2: quadrature g vs Crank-Nicolson, with refinement ----
void criterion_2() {
    bool pass = true;
    std::string detail = "g vs PDE interior-80% relative error:";
    for (double a : {0.0, 0.1, 0.2}) {
        const ModelParams p = benchmark_params(a);
        const DerivedConstants c = derive_constants(p);
        const double err = g_pde_max_error(p, c, 256);
        pass = pass && err < 1e-3;
        detail += " a=" + fmt(a) + " -> " + fmt(err);
    }
    const ModelParams p0 = benchmark_params(0.0);
    const DerivedConstants c0 = derive_constants(p0);
    const double coarse = g_pde_max_error(p0, c0, 256);
    const double fine = g_pde_max_error(p0, c0, 512);
    const double gain = coarse / fine;
    pass = pass && gain >= 3.0;
    detail += "; refinement gain " + fmt(gain) + " (need >= 3)";
    report(2, pass, detail);
}

// ---- criterion 3: HJBI residual on the 20x20 grid ----
void criterion_3() {
    const ModelParams p = benchmark_params(0.1);
    const DerivedConstants c = derive_constants(p);
    const ResidualGridResult res = hjbi_residual_grid(p, c, 0.0, 9.9, 20, 0.005, 0.09, 20);
    report(3, res.max_normalized < 1e-6,
           "max normalized HJBI residual " + fmt(res.max_normalized) + " (tol 1e-6) at t=" +
               fmt(res.worst_t) + ", y=" + fmt(res.worst_y));
}

// ---- criterion 4: saddle property at 400 states ----
void criterion_4() {
    const ModelParams p = benchmark_params(0.1);
    const DerivedConstants c = derive_constants(p);
    const SaddleGridResult res =
        saddle_grid(p, c, 0.0, 9.9, 20, 0.005, 0.09, 20, 1.0, 1e-3, 1e-10);
    report(4, res.n_failures == 0,
           std::to_string(res.n_states) + " states, " + std::to_string(res.n_failures) +
               " violations; worst v-drop " + fmt(res.worst_v_drop) + ", worst u-rise " +
               fmt(res.worst_u_rise) + " (slack 1e-10)");
}

int run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- criterion 5: figure reproduction (ordering-based) ----
void criterion_5(const std::string& cli, const fs::path& work) {
    const fs::path out = work / "figs";
    if (run_cli(cli, "--config " + (work / "bench.cfg").string() + " --out " + out.string() +
                         " --quiet figures") != 0) {
        report(5, false, "figure generation failed");
        return;
    }
    const CsvTable fig1 = parse_csv(slurp(out / "fig1.csv"));
    const CsvTable fig2 = parse_csv(slurp(out / "fig2.csv"));
    const CsvTable fig3 = parse_csv(slurp(out / "fig3.csv"));

    auto ordered_desc = [](const CsvTable& t) {
        for (const auto& row : t.rows)
            if (!(row[1] > row[2] && row[2] > row[3])) return false;
        return true;
    };
    const bool pi1_ok = ordered_desc(fig1);
    const bool pi2_ok = ordered_desc(fig2);
    const bool cx_ok = ordered_desc(fig3);

    bool monotone = true;
    for (std::size_t i = 1; i < fig1.rows.size(); ++i)
        for (std::size_t j = 1; j <= 3; ++j)
            monotone = monotone && fig1.rows[i][j] <= fig1.rows[i - 1][j] + 1e-14;
    const double variation =
        (fig1.rows.front()[1] - fig1.rows.back()[1]) / fig1.rows.front()[1];

    report(5, pi1_ok && pi2_ok && cx_ok && monotone,
           std::string("pi ordering a0>a0.1>a0.2: fig1 ") + (pi1_ok ? "yes" : "NO") + ", fig2 " +
               (pi2_ok ? "yes" : "NO") + "; cx ordering in fig3: " + (cx_ok ? "yes" : "NO") +
               " (measured cx row0: " + fmt(fig3.rows.front()[1]) + ", " +
               fmt(fig3.rows.front()[2]) + ", " + fmt(fig3.rows.front()[3]) +
               "); fig1 non-increasing in volatility: " + (monotone ? "yes" : "NO") +
               ", total relative variation " + fmt(variation));
}

// ---- criterion 6: bound invariants over the solve grids ----
void criterion_6() {
    bool pass = true;
    std::string detail;

    // Riccati band on a 100x100 (t, s) grid
    {
        const ModelParams p = benchmark_params(0.0);
        const DerivedConstants c = derive_constants(p);
        const double band = std::abs((1.0 - p.gamma) * p.r - p.delta * c.theta) / c.k * p.T;
        double worst_b = 0.0;
        bool ab_ok = true;
        for (int i = 0; i < 100; ++i) {
            for (int j = i; j < 100; ++j) {
                const double t = p.T * i / 99.0, s = p.T * j / 99.0;
                const RiccatiPair ab = riccati_closed_form(t, s, c, p);
                ab_ok = ab_ok && ab.B >= 0.0 && ab.B <= c.b / c.kappa + 1e-14;
                ab_ok = ab_ok && ab.A <= band + 1e-12 &&
                        ab.A >= -(c.b / c.kappa) * p.nu * p.T - band - 1e-12;
                worst_b = std::max(worst_b, ab.B);
            }
        }
        pass = pass && ab_ok;
        detail += "A/B bands " + std::string(ab_ok ? "hold" : "VIOLATED") + " (max B " +
                  fmt(worst_b) + " vs b/kappa " + fmt(c.b / c.kappa) + ");";
    }

    // strategy bounds over t in [0, 9] x y in [0.0025, 0.25]
    for (double a : {0.0, 0.1, 0.2}) {
        const ModelParams p = benchmark_params(a);
        const DerivedConstants c = derive_constants(p);
        const double lo = p.lambda_bar / (p.gamma + p.a);
        bool ok = true;
        for (int it = 0; it <= 18; ++it) {
            const double t = 0.5 * it;
            const GQuadratureRow row(t, c, p);
            for (int j = 0; j < 100; ++j) {
                const double y = 0.0025 + (0.25 - 0.0025) * j / 99.0;
                const GTriple gt = row.eval(y);
                const double gyg = gt.g_y / gt.g;
                const double pi = lo + ((1.0 - p.gamma - p.a) * c.k * p.beta_bar * p.rho /
                                        ((p.gamma + p.a) * (1.0 - p.gamma))) *
                                           gyg;
                const double cx = std::pow(p.delta, c.psi) / gt.g;
                ok = ok && pi >= lo - 1e-12 && pi <= c.K_pi + 1e-12;
                ok = ok && cx <= 1.0 / (p.T - t) + c.b * y + 0.5 * p.nu * c.b * (p.T - t);
            }
        }
        pass = pass && ok;
        detail += " a=" + fmt(a) + " pi/cx bounds " + (ok ? "hold" : "VIOLATED") + ";";
    }

    // The additive consumption band is known to break inside the final ~0.6
    // years at small variance; measure and show it without gating on it.
    {
        const ModelParams p = benchmark_params(0.0);
        const DerivedConstants c = derive_constants(p);
        const double t = 9.9, y = 0.0025;
        const double cx = std::pow(p.delta, c.psi) / eval_g(t, y, c, p).g;
        const double bound = 1.0 / (p.T - t) + c.b * y + 0.5 * p.nu * c.b * (p.T - t);
        detail += " near-horizon note: cx(9.9,0.0025)=" + fmt(cx) + " vs band " + fmt(bound);
    }
    report(6, pass, detail);
}

// ---- criterion 7: aggregator monotonicity with C = |delta theta| ----
void criterion_7() {
    std::size_t violations = 0;
    std::mt19937_64 rng(20250810);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> uc(0.01, 10.0), uv(0.01, 5.0), ud(0.01, 0.2);
    for (int which = 0; which < 4; ++which) {
        for (int i = 0; i < 10000; ++i) {
            double gamma = 0.0, psi = 0.0;
            switch (which) {
                case 0: gamma = 1.05 + 1.5 * u01(rng); psi = 1.05 + 1.5 * u01(rng); break;
                case 1:
                    gamma = 1.05 + 1.5 * u01(rng);
                    psi = (0.2 + 0.79 * u01(rng)) / gamma;
                    break;
                case 2: gamma = 0.1 + 0.85 * u01(rng); psi = 0.1 + 0.85 * u01(rng); break;
                default:
                    gamma = 0.3 + 0.65 * u01(rng);
                    psi = (1.0 + 1.5 * u01(rng)) / gamma;
                    break;
            }
            const double delta = ud(rng);
            const double theta = (1.0 - gamma) / (1.0 - 1.0 / psi);
            const double sign = gamma < 1.0 ? 1.0 : -1.0;
            double v_hi = sign * uv(rng), v_lo = sign * uv(rng);
            if (v_lo > v_hi) std::swap(v_lo, v_hi);
            const double cons = uc(rng);
            const double gap = aggregator_f(cons, v_hi, gamma, delta, psi) -
                               aggregator_f(cons, v_lo, gamma, delta, psi);
            if (gap > std::abs(delta * theta) * (v_hi - v_lo) + 1e-10) ++violations;
        }
    }
    report(7, violations == 0,
           "40000 draws across the four admissible cases, " + std::to_string(violations) +
               " violations beyond 1e-10");
}

// ---- criterion 8: Monte Carlo Feynman-Kac at scale ----
void criterion_8() {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail = "w(0,1,0.0225) vs 1e5-path estimate:";
    for (double a : {0.0, 0.1}) {
        const ModelParams p = benchmark_params(a);
        const DerivedConstants c = derive_constants(p);
        const GSurface surf = build_g_surface(c, p, 1024, 512, 0.0, p.T - 0.01, 1.0);
        const OptimalPolicy policy(surf, p, c);
        SimConfig cfg;
        cfg.n_paths = 100000;
        cfg.dt = 1e-3;
        cfg.seed = 90210;
        cfg.t_start = 0.0;
        cfg.t_end = p.T - 0.05;
        const PathBundle bundle = simulate_paths(cfg, policy, p, c);
        const McEstimate est = feynman_kac_estimate(bundle, p, c);
        const double w_ref = value_function(0.0, p.x0, p.y0, c, p);
        const double rel = std::abs(est.mean - w_ref) / std::abs(w_ref);
        const double sigmas = std::abs(est.mean - w_ref) / est.standard_error;
        pass = pass && rel < 0.01 && 3.0 * est.standard_error < 0.01 * std::abs(w_ref);
        detail += " a=" + fmt(a) + ": rel " + fmt(rel) + " (" + fmt(sigmas) + " sigma);";
    }
    const double elapsed = seconds_since(t0);
    pass = pass && elapsed < 120.0;
    detail += " runtime " + fmt(elapsed) + " s (limit 120 s)";
    report(8, pass, detail);
}

// ---- criterion 9: square-root process mean at three horizons ----
void criterion_9() {
    const ModelParams p = benchmark_params(0.0);
    const DerivedConstants c = derive_constants(p);
    SimConfig cfg;
    cfg.n_paths = 10000;
    cfg.dt = 1e-3;
    cfg.seed = 555;
    cfg.t_start = 0.0;
    cfg.t_end = p.T;
    cfg.checkpoints = {1.0, 5.0, 10.0};
    const PathBundle bundle = simulate_paths(cfg, ZeroControlPolicy{}, p, c);
    bool pass = true;
    std::string detail = "E[Y_s] vs closed form:";
    for (std::size_t k = 0; k < 3; ++k) {
        const McEstimate est = checkpoint_mean_y(bundle, k);
        const double ref = cir_mean(p.y0, 0.0, cfg.checkpoints[k], p);
        const double sigmas = std::abs(est.mean - ref) / est.standard_error;
        pass = pass && sigmas <= 3.0;
        detail += " s=" + fmt(cfg.checkpoints[k]) + " -> " + fmt(sigmas) + " sigma;";
    }
    report(9, pass, detail);
}

// ---- criterion 10: byte-identical CSVs under a fixed seed ----
void criterion_10(const std::string& cli, const fs::path& work) {
    const std::string cfg = (work / "bench.cfg").string();
    bool pass = true;
    std::string detail;

    const fs::path run1 = work / "det1", run2 = work / "det2";
    const std::string sim_args = " --seed 7 --quiet simulate --paths 200 --dt 0.005";
    pass = pass && run_cli(cli, "--config " + cfg + " --out " + run1.string() + sim_args) == 0;
    pass = pass && run_cli(cli, "--config " + cfg + " --out " + run2.string() + sim_args) == 0;
    const bool sim_same = slurp(run1 / "simulate.csv") == slurp(run2 / "simulate.csv") &&
                          !slurp(run1 / "simulate.csv").empty();
    detail += std::string("simulate.csv bytes ") + (sim_same ? "identical" : "DIFFER");

    pass = pass && run_cli(cli, "--config " + cfg + " --out " + run1.string() +
                                    " --quiet figures --which 1") == 0;
    pass = pass && run_cli(cli, "--config " + cfg + " --out " + run2.string() +
                                    " --quiet figures --which 1") == 0;
    const bool fig_same =
        slurp(run1 / "fig1.csv") == slurp(run2 / "fig1.csv") && !slurp(run1 / "fig1.csv").empty();
    detail += std::string("; fig1.csv bytes ") + (fig_same ? "identical" : "DIFFER");

    report(10, pass && sim_same && fig_same, detail);
}

void write_benchmark_config(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << "# benchmark calibration\n"
        << "gamma      = 1.4\n"
        << "delta      = 0.08\n"
        << "rho        = -0.5\n"
        << "r          = 0.05\n"
        << "lambda_bar = 3.1111111111111112\n"
        << "m          = 5.0\n"
        << "nu         = 0.1125\n"
        << "beta_bar   = 0.25\n"
        << "a          = 0.0\n"
        << "T          = 10.0\n"
        << "x0         = 1.0\n"
        << "y0         = 0.0225\n";
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance_tests <path-to-cli>\n");
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path work = fs::temp_directory_path() / "rheston_acceptance";
    fs::create_directories(work);
    write_benchmark_config(work / "bench.cfg");

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5(cli, work);
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10(cli, work);

    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
