#include "rheston/verify_suite.hpp"

#include "rheston/closed_form.hpp"
#include "rheston/oracles.hpp"
#include "rheston/verification.hpp"

#include <algorithm>
#include <cmath>

namespace rheston {

bool VerificationSummary::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* VerificationSummary::worst() const {
    const CheckResult* w = nullptr;
    double worst_ratio = -1.0;
    for (const auto& c : checks) {
        const double ratio = c.tolerance > 0.0 ? c.measured / c.tolerance : c.measured;
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            w = &c;
        }
    }
    return w;
}

double riccati_rk4_max_error(const ModelParams& p, const DerivedConstants& c, std::size_t n) {
    const double coarse = p.T / static_cast<double>(n - 1);
    const int n_sub = std::max(1, static_cast<int>(std::ceil(coarse / 1e-3)));
    const double fine = coarse / n_sub;

    double worst = 0.0;
    std::vector<double> grid;
    for (std::size_t j = 1; j < n; ++j) {
        const double s = static_cast<double>(j) * coarse;
        const std::size_t fine_nodes = j * static_cast<std::size_t>(n_sub) + 1;
        grid.resize(fine_nodes);
        for (std::size_t q = 0; q < fine_nodes; ++q) grid[q] = static_cast<double>(q) * fine;
        const RiccatiSolution sol = solve_riccati_ode(s, grid, p, c);
        for (std::size_t i = 0; i <= j; ++i) {
            const std::size_t q = i * static_cast<std::size_t>(n_sub);
            const RiccatiPair cf = riccati_closed_form(grid[q], s, c, p);
            worst = std::max(worst, std::abs(cf.A - sol.A[q]) / (1.0 + std::abs(sol.A[q])));
            worst = std::max(worst, std::abs(cf.B - sol.B[q]) / (1.0 + std::abs(sol.B[q])));
        }
    }
    return worst;
}

double g_pde_max_error(const ModelParams& p, const DerivedConstants& c, std::size_t n,
                       bool parallel) {
    const double y_max = 10.0 * p.nu / p.m;
    PdeGrid grid = make_pde_grid(n, n, 0.0, p.T, y_max);
    grid = solve_g_pde(CoefficientSet::heston(p), std::move(grid), p, c);

    const std::size_t lo = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(n - 1)));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(n - 1)));
    std::vector<double> row_worst(n, 0.0);

    auto do_row = [&](std::size_t i) {
        const GQuadratureRow row(grid.t_nodes[i], c, p);
        for (std::size_t j = lo; j <= hi; ++j) {
            const double ref = row.eval(grid.y_nodes[j]).g;
            row_worst[i] = std::max(row_worst[i], std::abs(grid.at(i, j) - ref) / ref);
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = static_cast<long long>(lo); i <= static_cast<long long>(hi); ++i)
            do_row(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = lo; i <= hi; ++i) do_row(i);
    }
    double worst = 0.0;
    for (double w : row_worst) worst = std::max(worst, w);
    return worst;
}

VerificationSummary run_verification(const ModelParams& p, const DerivedConstants& c,
                                     const VerifyTolerances& tols, const VerifyOptions& opts) {
    VerificationSummary summary;

    const double ode_err = riccati_rk4_max_error(p, c, opts.riccati_grid);
    summary.checks.push_back({"riccati_vs_rk4", ode_err, tols.ode, ode_err < tols.ode});

    const double pde_err = g_pde_max_error(p, c, opts.pde_nodes, opts.parallel);
    summary.checks.push_back({"g_vs_pde", pde_err, tols.pde, pde_err < tols.pde});

    const double t_hi = std::min(p.T - 0.1, 0.99 * p.T);
    const ResidualGridResult res =
        hjbi_residual_grid(p, c, 0.0, t_hi, opts.residual_grid, 0.005, 0.09, opts.residual_grid,
                           1.0, opts.parallel);
    summary.checks.push_back(
        {"hjbi_residual", res.max_normalized, tols.residual, res.max_normalized < tols.residual});

    const SaddleGridResult sad = saddle_grid(p, c, 0.0, t_hi, opts.residual_grid, 0.005, 0.09,
                                             opts.residual_grid, 1.0, 1e-3, tols.saddle_slack,
                                             opts.parallel);
    const double sad_measure = std::max(std::max(-sad.worst_v_drop, sad.worst_u_rise), 0.0);
    summary.checks.push_back(
        {"saddle_point", sad_measure, tols.saddle_slack, sad.n_failures == 0});

    return summary;
}

} // namespace rheston
