#include "rheston/closed_form.hpp"
#include "rheston/config.hpp"
#include "rheston/csv.hpp"
#include "rheston/errors.hpp"
#include "rheston/oracles.hpp"
#include "rheston/simulation.hpp"
#include "rheston/verify_suite.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace rheston;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitIoOrNumerical = 2;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 42;
    bool quiet = false;
};

struct GridSpec {
    double lo = 0.0, hi = 0.0;
    std::size_t n = 0;

    double at(std::size_t i) const {
        if (n == 1) return lo;
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
};

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ConfigError("grid spec must be min:max:n, got '" + text + "'");
    g.lo = std::stod(text.substr(0, c1));
    g.hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const long n = std::stol(text.substr(c2 + 1));
    if (n < 1 || g.hi < g.lo) throw ConfigError("bad grid spec '" + text + "'");
    g.n = static_cast<std::size_t>(n);
    return g;
}

void emit(const GlobalOpts& g, const std::string& filename, const CsvTable& table) {
    const std::string text = to_csv(table);
    if (g.out_dir == "-") {
        std::cout << text;
        return;
    }
    std::filesystem::create_directories(g.out_dir);
    const std::string path = (std::filesystem::path(g.out_dir) / filename).string();
    write_text_file(path, text);
    if (!g.quiet) std::cout << "wrote " << path << "\n";
}

void print_report(const ModelParams& p, const DerivedConstants& c, const ValidationReport& rep,
                  double q) {
    std::cout << "derived constants:\n";
    std::cout << "  psi     = " << format_csv_value(c.psi) << "\n";
    std::cout << "  phi     = " << format_csv_value(c.phi) << "\n";
    std::cout << "  theta   = " << format_csv_value(c.theta) << "\n";
    std::cout << "  k       = " << format_csv_value(c.k) << "\n";
    std::cout << "  zeta    = " << format_csv_value(c.zeta) << "\n";
    std::cout << "  b       = " << format_csv_value(c.b) << "\n";
    std::cout << "  kappa   = " << format_csv_value(c.kappa) << "\n";
    std::cout << "  d       = " << format_csv_value(c.d) << "\n";
    std::cout << "  K_pi    = " << format_csv_value(c.K_pi) << "\n";
    std::cout << "  b_tilde = " << format_csv_value(c.b_tilde) << "\n";
    std::cout << "validation (q = " << q << "):\n";
    std::cout << "  assumption_3_1_case = " << to_string(rep.assumption31_case) << "\n";
    std::cout << "  assumption_3_2_ok   = " << (rep.assumption32_ok ? "yes" : "no") << "\n";
    std::cout << "  H1 " << (rep.h1_ok ? "pass" : "FAIL") << " (slack "
              << format_csv_value(rep.h1_slack) << ")\n";
    std::cout << "  H2 " << (rep.h2_ok ? "pass" : "FAIL") << " (slack "
              << format_csv_value(rep.h2_slack) << ")\n";
    std::cout << "  H3 " << (rep.h3_ok ? "pass" : "FAIL") << " (slack "
              << format_csv_value(rep.h3_slack) << ")\n";
    std::cout << "  epsilon_ok          = " << (rep.epsilon_ok ? "yes" : "no") << "\n";
    for (const auto& m : rep.messages) std::cout << "  note: " << m << "\n";
    std::cout << "gamma*psi = " << format_csv_value(p.gamma * c.psi) << "\n";
}

int cmd_validate(const GlobalOpts& g) {
    const SolverConfig cfg = load_config(g.config_path);
    const DerivedConstants c = derive_constants(cfg.params);
    const ValidationReport rep = validate_heston(cfg.params, c, cfg.q_exponent);
    print_report(cfg.params, c, rep, cfg.q_exponent);
    return rep.all_ok() ? kExitOk : kExitCheckFailed;
}

int cmd_solve(const GlobalOpts& g, double t_single, const std::string& grid_y,
              const std::string& grid_t, double t_guard, int quad_n) {
    const SolverConfig cfg = load_config(g.config_path);
    const ModelParams& p = cfg.params;
    const DerivedConstants c = derive_constants(p);
    require_heston_valid(p, c, cfg.q_exponent);

    const GridSpec ys = parse_grid(grid_y);
    GridSpec ts{t_single, t_single, 1};
    if (!grid_t.empty()) ts = parse_grid(grid_t);

    CsvTable table;
    table.header = {"t",       "y",       "volatility", "A",          "B_ref",         "g",
                    "g_y_over_g", "pi_star", "cx_star",    "w_at_x1", "v1_star_at_x1", "v2_star"};
    for (std::size_t i = 0; i < ts.n; ++i) {
        const double t = std::min(ts.at(i), p.T - t_guard);
        const GQuadratureRow row(t, c, p, quad_n);
        const RiccatiPair ab = riccati_closed_form(t, p.T, c, p);
        for (std::size_t j = 0; j < ys.n; ++j) {
            const double y = ys.at(j);
            const GTriple gt = row.eval(y);
            const double gyg = gt.g_y / gt.g;
            const double pi = p.lambda_bar / (p.gamma + p.a) +
                              ((1.0 - p.gamma - p.a) * c.k * p.beta_bar * p.rho /
                               ((p.gamma + p.a) * (1.0 - p.gamma))) *
                                  gyg;
            const double cx = std::pow(p.delta, c.psi) / gt.g;
            const double w = std::pow(gt.g, c.k) / (1.0 - p.gamma);
            table.rows.push_back({t, y, std::sqrt(y), ab.A, ab.B, gt.g, gyg, pi, cx, w,
                                  -p.a, (p.a * c.k / (p.gamma - 1.0)) * gyg});
        }
    }
    emit(g, "solve.csv", table);
    return kExitOk;
}

// Figure sweeps re-derive psi and k for every robustness level, so each curve
// carries a slightly different EIS; that is how the preference manifold is
// parameterized.
int cmd_figures(const GlobalOpts& g, const std::string& which, double t_guard, int quad_n) {
    const SolverConfig cfg = load_config(g.config_path);
    const std::vector<double> a_values = {0.0, 0.1, 0.2};
    const std::vector<double> gamma_values = {1.2, 1.4, 1.6};

    auto with_a = [&](double a) {
        ModelParams p = cfg.params;
        p.a = a;
        p.a1 = a;
        return p;
    };
    auto with_gamma = [&](double gamma) {
        ModelParams p = cfg.params;
        p.a = 0.0;
        p.a1 = 0.0;
        p.gamma = gamma;
        return p;
    };

    const bool all = which == "all";
    const std::size_t npts = 100;

    if (all || which == "1" || which == "3") {
        CsvTable fig1, fig3;
        fig1.header = {"volatility", "pi_a0", "pi_a0.1", "pi_a0.2"};
        fig3.header = {"volatility", "cx_a0", "cx_a0.1", "cx_a0.2"};
        std::vector<std::vector<double>> pis(a_values.size()), cxs(a_values.size());
        for (std::size_t ai = 0; ai < a_values.size(); ++ai) {
            const ModelParams p = with_a(a_values[ai]);
            const DerivedConstants c = derive_constants(p);
            require_heston_valid(p, c, cfg.q_exponent);
            const GQuadratureRow row(0.0, c, p, quad_n);
            for (std::size_t j = 0; j < npts; ++j) {
                const double vol = 0.05 + 0.45 * static_cast<double>(j) /
                                              static_cast<double>(npts - 1);
                const GTriple gt = row.eval(vol * vol);
                const double gyg = gt.g_y / gt.g;
                pis[ai].push_back(p.lambda_bar / (p.gamma + p.a) +
                                  ((1.0 - p.gamma - p.a) * c.k * p.beta_bar * p.rho /
                                   ((p.gamma + p.a) * (1.0 - p.gamma))) *
                                      gyg);
                cxs[ai].push_back(std::pow(p.delta, c.psi) / gt.g);
            }
        }
        for (std::size_t j = 0; j < npts; ++j) {
            const double vol = 0.05 + 0.45 * static_cast<double>(j) / static_cast<double>(npts - 1);
            fig1.rows.push_back({vol, pis[0][j], pis[1][j], pis[2][j]});
            fig3.rows.push_back({vol, cxs[0][j], cxs[1][j], cxs[2][j]});
        }
        if (all || which == "1") emit(g, "fig1.csv", fig1);
        if (all || which == "3") emit(g, "fig3.csv", fig3);
    }

    if (all || which == "2") {
        CsvTable fig2;
        fig2.header = {"t", "pi_a0", "pi_a0.1", "pi_a0.2"};
        const double y_fig2 = 0.04; // volatility 0.2
        std::vector<std::vector<double>> pis(a_values.size());
        for (std::size_t ai = 0; ai < a_values.size(); ++ai) {
            const ModelParams p = with_a(a_values[ai]);
            const DerivedConstants c = derive_constants(p);
            require_heston_valid(p, c, cfg.q_exponent);
            for (std::size_t j = 0; j < npts; ++j) {
                const double t =
                    std::min(p.T * static_cast<double>(j) / static_cast<double>(npts - 1),
                             p.T - t_guard);
                const StrategyPoint sp = optimal_strategy(t, p.x0, y_fig2, c, p, t_guard, quad_n);
                pis[ai].push_back(sp.pi_star);
            }
        }
        const ModelParams p0 = with_a(0.0);
        for (std::size_t j = 0; j < npts; ++j) {
            const double t = p0.T * static_cast<double>(j) / static_cast<double>(npts - 1);
            fig2.rows.push_back({t, pis[0][j], pis[1][j], pis[2][j]});
        }
        emit(g, "fig2.csv", fig2);
    }

    if (all || which == "gamma-sweep") {
        CsvTable figG;
        figG.header = {"volatility", "pi_g1.2", "pi_g1.4", "pi_g1.6",
                       "cx_g1.2",    "cx_g1.4", "cx_g1.6"};
        std::vector<std::vector<double>> pis(gamma_values.size()), cxs(gamma_values.size());
        for (std::size_t gi = 0; gi < gamma_values.size(); ++gi) {
            const ModelParams p = with_gamma(gamma_values[gi]);
            const DerivedConstants c = derive_constants(p);
            const ValidationReport rep = validate_heston(p, c, cfg.q_exponent);
            // The q-bound in H1 caps gamma below 1.5 for every q > 2; the
            // closed form itself is well defined, so the sweep only refuses
            // to run on failures other than that bound.
            const bool only_h1_q = !rep.h1_ok && rep.h2_ok && rep.h3_ok &&
                                   rep.assumption32_ok && rep.epsilon_ok &&
                                   rep.assumption31_case != Assumption31Case::violated &&
                                   p.gamma > 1.0 && p.rho <= 0.0 && p.lambda_bar > 0.0 &&
                                   p.gamma < c.k + 2.0;
            if (!rep.all_ok()) {
                if (!only_h1_q) {
                    std::string what = "gamma-sweep validation failed";
                    for (const auto& m : rep.messages) what += "; " + m;
                    throw InvalidParams(what);
                }
                std::cerr << "warning: gamma = " << p.gamma
                          << " exceeds the H1 q-bound; sweep continues\n";
            }
            const GQuadratureRow row(0.0, c, p, quad_n);
            for (std::size_t j = 0; j < npts; ++j) {
                const double vol = 0.05 + 0.45 * static_cast<double>(j) /
                                              static_cast<double>(npts - 1);
                const GTriple gt = row.eval(vol * vol);
                const double gyg = gt.g_y / gt.g;
                pis[gi].push_back(p.lambda_bar / p.gamma +
                                  (c.k * p.beta_bar * p.rho / p.gamma) * gyg);
                cxs[gi].push_back(std::pow(p.delta, c.psi) / gt.g);
            }
        }
        for (std::size_t j = 0; j < npts; ++j) {
            const double vol = 0.05 + 0.45 * static_cast<double>(j) / static_cast<double>(npts - 1);
            figG.rows.push_back(
                {vol, pis[0][j], pis[1][j], pis[2][j], cxs[0][j], cxs[1][j], cxs[2][j]});
        }
        emit(g, "figG.csv", figG);
    }
    return kExitOk;
}

int cmd_simulate(const GlobalOpts& g, std::size_t n_paths, double dt, bool antithetic,
                 double fk_delta, const std::string& dump_path) {
    const SolverConfig cfg = load_config(g.config_path);
    const ModelParams& p = cfg.params;
    const DerivedConstants c = derive_constants(p);
    require_heston_valid(p, c, cfg.q_exponent);

    CsvTable table;
    table.header = {"check", "estimate", "reference", "std_error", "pass"};
    auto add_row = [&table](double id, const McEstimate& est, double reference) {
        const bool pass = std::abs(est.mean - reference) <= 3.0 * est.standard_error;
        table.rows.push_back(
            {id, est.mean, reference, est.standard_error, pass ? 1.0 : 0.0});
        return pass;
    };

    bool all_pass = true;

    // Feynman-Kac consistency of the value function under the optimal
    // controls and worst-case distortion (horizon truncated by fk_delta),
    // plus the martingale diagnostic, from one bundle.
    {
        SimConfig sc;
        sc.n_paths = n_paths;
        sc.dt = dt;
        sc.seed = g.seed;
        sc.t_start = p.t0;
        sc.t_end = p.T - fk_delta;
        sc.antithetic = antithetic;
        sc.store_paths = !dump_path.empty();
        const GSurface surf =
            build_g_surface(c, p, 1024, 512, p.t0, p.T - std::min(0.5 * fk_delta, 0.01), 1.0);
        const OptimalPolicy policy(surf, p, c);
        const PathBundle bundle = simulate_paths(sc, policy, p, c);
        const McEstimate est = feynman_kac_estimate(bundle, p, c);
        const double w_ref = value_function(p.t0, p.x0, p.y0, c, p);
        all_pass &= add_row(1, est, w_ref);
        all_pass &= add_row(2, martingale_diagnostic(bundle), 0.0);
        if (!g.quiet && !bundle.feller_ok)
            std::cerr << "note: Feller condition 2 nu >= beta_bar^2 does not hold\n";
        if (!dump_path.empty()) {
            std::ofstream os(dump_path, std::ios::binary);
            if (!os) throw ConfigError("cannot open dump path: " + dump_path);
            write_path_dump(os, bundle);
        }
    }

    // Undistorted square-root process mean at three horizons.
    {
        SimConfig sc;
        sc.n_paths = n_paths;
        sc.dt = dt;
        sc.seed = g.seed + 1;
        sc.t_start = p.t0;
        sc.t_end = p.T;
        sc.antithetic = antithetic;
        const double span = p.T - p.t0;
        sc.checkpoints = {p.t0 + 0.1 * span, p.t0 + 0.5 * span, p.T};
        for (double& ck : sc.checkpoints) ck = p.t0 + std::round((ck - p.t0) / dt) * dt;
        ModelParams p_plain = p;
        p_plain.a1 = 0.0; // v = 0 requires a1 = 0 in the admissible set
        const PathBundle bundle = simulate_paths(sc, ZeroControlPolicy{}, p_plain, c);
        for (std::size_t k = 0; k < sc.checkpoints.size(); ++k) {
            const McEstimate est = checkpoint_mean_y(bundle, k);
            all_pass &= add_row(3 + static_cast<double>(k), est,
                                cir_mean(p.y0, p.t0, sc.checkpoints[k], p));
        }
    }

    emit(g, "simulate.csv", table);
    return all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_verify(const GlobalOpts& g, const VerifyTolerances& tols) {
    const SolverConfig cfg = load_config(g.config_path);
    const ModelParams& p = cfg.params;
    const DerivedConstants c = derive_constants(p);
    require_heston_valid(p, c, cfg.q_exponent);

    const VerificationSummary summary = run_verification(p, c, tols);
    CsvTable table;
    table.header = {"check", "measured", "tolerance", "pass"};
    for (std::size_t i = 0; i < summary.checks.size(); ++i) {
        const CheckResult& cr = summary.checks[i];
        if (!g.quiet)
            std::cout << cr.name << ": measured " << format_csv_value(cr.measured)
                      << " tolerance " << format_csv_value(cr.tolerance) << " -> "
                      << (cr.pass ? "pass" : "FAIL") << "\n";
        table.rows.push_back({static_cast<double>(i + 1), cr.measured, cr.tolerance,
                              cr.pass ? 1.0 : 0.0});
    }
    emit(g, "verify.csv", table);
    if (!summary.all_pass()) {
        const CheckResult* worst = summary.worst();
        std::cerr << "verification failed; worst offender: " << (worst ? worst->name : "?")
                  << "\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust consumption-investment solver for the Heston market"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "path to key = value config file")->required();
    app.add_option("--out", g.out_dir, "output directory ('-' for stdout)");
    app.add_option("--seed", g.seed, "Monte Carlo seed");
    app.add_flag("--quiet", g.quiet, "suppress informational output");

    auto* validate = app.add_subcommand("validate", "derive constants and check assumptions");

    auto* solve = app.add_subcommand("solve", "emit the solution surface as CSV");
    double t_single = 0.0;
    std::string grid_y = "0.0025:0.25:100";
    std::string grid_t;
    double t_guard = 1e-6;
    int quad_n = 512;
    solve->add_option("--t", t_single, "evaluation time (ignored when --grid-t is given)");
    solve->add_option("--grid-y", grid_y, "variance grid min:max:n");
    solve->add_option("--grid-t", grid_t, "time grid min:max:n");
    solve->add_option("--t-guard", t_guard, "terminal guard in years");
    solve->add_option("--quad-n", quad_n, "Simpson subintervals");

    auto* figures = app.add_subcommand("figures", "emit comparison figure CSVs");
    std::string which = "all";
    figures->add_option("--which", which, "1, 2, 3, gamma-sweep or all")
        ->check(CLI::IsMember({"1", "2", "3", "gamma-sweep", "all"}));
    figures->add_option("--t-guard", t_guard, "terminal guard in years");
    figures->add_option("--quad-n", quad_n, "Simpson subintervals");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo consistency checks");
    std::size_t n_paths = 10000;
    double dt = 1e-3;
    bool antithetic = false;
    double fk_delta = 0.05;
    std::string dump_path;
    simulate->add_option("--paths", n_paths, "number of paths");
    simulate->add_option("--dt", dt, "Euler step in years");
    simulate->add_flag("--antithetic", antithetic, "antithetic variates");
    simulate->add_option("--fk-delta", fk_delta, "horizon truncation in years");
    simulate->add_option("--dump", dump_path, "binary path dump file");

    auto* verify = app.add_subcommand("verify", "cross-check the closed form against oracles");
    VerifyTolerances tols;
    verify->add_option("--tol-ode", tols.ode, "Riccati vs RK4 tolerance");
    verify->add_option("--tol-pde", tols.pde, "quadrature vs PDE tolerance");
    verify->add_option("--tol-residual", tols.residual, "HJBI residual tolerance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return cmd_validate(g);
        if (*solve) return cmd_solve(g, t_single, grid_y, grid_t, t_guard, quad_n);
        if (*figures) return cmd_figures(g, which, t_guard, quad_n);
        if (*simulate) return cmd_simulate(g, n_paths, dt, antithetic, fk_delta, dump_path);
        if (*verify) return cmd_verify(g, tols);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoOrNumerical;
    } catch (const InvalidParams& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const InstabilityDetected& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitIoOrNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoOrNumerical;
    }
    return kExitOk;
}
