#include "rheston/oracles.hpp"

#include "rheston/errors.hpp"

#include <cmath>

namespace rheston {

CoefficientSet CoefficientSet::heston(const ModelParams& p) {
    CoefficientSet cs;
    const double lam = p.lambda_bar, m = p.m, nu = p.nu, bb = p.beta_bar;
    cs.lambda = [lam](double, double y) { return lam * y; };
    cs.sigma = [](double, double y) { return std::sqrt(y); };
    cs.alpha = [nu, m](double, double y) { return nu - m * y; };
    cs.beta = [bb](double, double y) { return bb * std::sqrt(y); };
    return cs;
}

RiccatiSolution solve_riccati_ode(double s_terminal, std::span<const double> t_grid,
                                  const ModelParams& p, const DerivedConstants& c) {
    if (t_grid.size() < 2) throw InvalidParams("solve_riccati_ode: need at least two grid nodes");
    const double h = t_grid[1] - t_grid[0];
    if (!(h > 0.0)) throw InvalidParams("solve_riccati_ode: grid must ascend");
    if (h > 1e-2) throw StepTooLarge("solve_riccati_ode: grid step exceeds 1e-2");
    for (std::size_t i = 1; i + 1 < t_grid.size(); ++i) {
        if (std::abs((t_grid[i + 1] - t_grid[i]) - h) > 1e-9 * h)
            throw InvalidParams("solve_riccati_ode: grid not uniform");
    }
    if (t_grid.back() > s_terminal + 1e-12 || t_grid.front() < -1e-12)
        throw InvalidParams("solve_riccati_ode: grid not inside [0, s_terminal]");

    const double half_beta2 = 0.5 * p.beta_bar * p.beta_bar;
    const double cA = ((1.0 - p.gamma) * p.r - p.delta * c.theta) / c.k;
    auto fB = [&](double B) { return c.kappa * B + half_beta2 * B * B - c.b; };
    auto fA = [&](double B) { return p.nu * B - cA; };

    auto rk4_step = [&](double& A, double& B, double step) {
        // backward in t: step < 0
        const double k1B = fB(B), k1A = fA(B);
        const double k2B = fB(B + 0.5 * step * k1B), k2A = fA(B + 0.5 * step * k1B);
        const double k3B = fB(B + 0.5 * step * k2B), k3A = fA(B + 0.5 * step * k2B);
        const double k4B = fB(B + step * k3B), k4A = fA(B + step * k3B);
        B += step / 6.0 * (k1B + 2.0 * k2B + 2.0 * k3B + k4B);
        A += step / 6.0 * (k1A + 2.0 * k2A + 2.0 * k3A + k4A);
    };

    double A = 0.0, B = 0.0;
    // Bridge from s_terminal down to the last grid node if they differ.
    const double gap = s_terminal - t_grid.back();
    if (gap > 1e-12) {
        const int n = static_cast<int>(std::ceil(gap / h));
        const double step = -gap / n;
        for (int i = 0; i < n; ++i) rk4_step(A, B, step);
    }

    RiccatiSolution sol;
    sol.t.assign(t_grid.begin(), t_grid.end());
    sol.A.resize(t_grid.size());
    sol.B.resize(t_grid.size());
    sol.A.back() = A;
    sol.B.back() = B;
    for (std::size_t i = t_grid.size() - 1; i-- > 0;) {
        rk4_step(A, B, -h);
        sol.A[i] = A;
        sol.B[i] = B;
    }
    return sol;
}

PdeGrid make_pde_grid(std::size_t nt, std::size_t ny, double t_lo, double t_hi, double y_max) {
    if (nt < 64 || ny < 64) throw InvalidParams("make_pde_grid: node counts must be >= 64");
    if (!(t_hi > t_lo) || !(y_max > 0.0)) throw InvalidParams("make_pde_grid: empty range");
    PdeGrid grid;
    grid.t_nodes.resize(nt);
    grid.y_nodes.resize(ny);
    for (std::size_t i = 0; i < nt; ++i)
        grid.t_nodes[i] = t_lo + (t_hi - t_lo) * static_cast<double>(i) / static_cast<double>(nt - 1);
    for (std::size_t j = 0; j < ny; ++j)
        grid.y_nodes[j] = y_max * static_cast<double>(j) / static_cast<double>(ny - 1);
    grid.values.assign(nt * ny, 0.0);
    return grid;
}

namespace {

// Tridiagonal rows of the spatial operator L at time t:
// (L g)_j = H1_j g_j + H2_j D g_j + (1/2) beta_j^2 D2 g_j, with one-sided
// differences on the boundary rows.
struct OperatorRows {
    std::vector<double> lo, di, up;
};

OperatorRows assemble(const CoefficientSet& cs, const std::vector<double>& y, double t,
                      const ModelParams& p, const DerivedConstants& c) {
    const std::size_t ny = y.size();
    const double dy = y[1] - y[0];
    OperatorRows op;
    op.lo.assign(ny, 0.0);
    op.di.assign(ny, 0.0);
    op.up.assign(ny, 0.0);

    const double coef_h1 = (1.0 - p.gamma) / (2.0 * (p.gamma + p.a));
    const double coef_h2 = (1.0 - p.gamma - p.a) / (p.gamma + p.a);
    const double base_h1 = ((1.0 - p.gamma) * p.r - p.delta * c.theta) / c.k;

    for (std::size_t j = 0; j < ny; ++j) {
        const double lam = cs.lambda(t, y[j]);
        const double sig = cs.sigma(t, y[j]);
        const double bet = cs.beta(t, y[j]);
        const double alp = cs.alpha(t, y[j]);
        const double lam_over_sig = sig != 0.0 ? lam / sig : 0.0;
        const double H1 = base_h1 + coef_h1 * lam_over_sig * lam_over_sig / c.k;
        const double H2 = coef_h2 * bet * p.rho * lam_over_sig + alp;
        const double half_b2 = 0.5 * bet * bet;

        if (j == 0) {
            // degenerate boundary: no diffusion, inward one-sided drift
            op.di[j] = H1 - H2 / dy;
            op.up[j] = H2 / dy;
        } else if (j == ny - 1) {
            // homogeneous second derivative, one-sided drift from inside
            op.lo[j] = -H2 / dy;
            op.di[j] = H1 + H2 / dy;
        } else {
            op.lo[j] = -H2 / (2.0 * dy) + half_b2 / (dy * dy);
            op.di[j] = H1 - 2.0 * half_b2 / (dy * dy);
            op.up[j] = H2 / (2.0 * dy) + half_b2 / (dy * dy);
        }
    }
    return op;
}

void thomas_solve(std::vector<double>& lo, std::vector<double>& di, std::vector<double>& up,
                  std::vector<double>& rhs) {
    const std::size_t n = di.size();
    for (std::size_t j = 1; j < n; ++j) {
        const double w = lo[j] / di[j - 1];
        di[j] -= w * up[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    rhs[n - 1] /= di[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) rhs[j] = (rhs[j] - up[j] * rhs[j + 1]) / di[j];
}

PdeGrid cn_solve(const CoefficientSet& cs, PdeGrid grid, const ModelParams& p,
                 const DerivedConstants& c, double source, double terminal) {
    const std::size_t nt = grid.t_nodes.size();
    const std::size_t ny = grid.y_nodes.size();
    for (std::size_t j = 0; j < ny; ++j) grid.at(nt - 1, j) = terminal;

    std::vector<double> lo(ny), di(ny), up(ny), rhs(ny);
    for (std::size_t n = nt - 1; n-- > 0;) {
        const double t_new = grid.t_nodes[n];
        const double t_old = grid.t_nodes[n + 1];
        const double dt = t_old - t_new;
        const OperatorRows Lold = assemble(cs, grid.y_nodes, t_old, p, c);
        const OperatorRows Lnew = assemble(cs, grid.y_nodes, t_new, p, c);

        // (I - dt/2 L_new) g_new = (I + dt/2 L_old) g_old + dt * source
        for (std::size_t j = 0; j < ny; ++j) {
            const double gm = j > 0 ? grid.at(n + 1, j - 1) : 0.0;
            const double gp = j + 1 < ny ? grid.at(n + 1, j + 1) : 0.0;
            const double g0 = grid.at(n + 1, j);
            rhs[j] = g0 + 0.5 * dt * (Lold.lo[j] * gm + Lold.di[j] * g0 + Lold.up[j] * gp) +
                     dt * source;
            lo[j] = -0.5 * dt * Lnew.lo[j];
            di[j] = 1.0 - 0.5 * dt * Lnew.di[j];
            up[j] = -0.5 * dt * Lnew.up[j];
        }
        thomas_solve(lo, di, up, rhs);
        for (std::size_t j = 0; j < ny; ++j) {
            if (!std::isfinite(rhs[j]) || rhs[j] < -1e-8)
                throw InstabilityDetected("cn_solve: non-finite or negative solution value");
            grid.at(n, j) = rhs[j];
        }
    }
    return grid;
}

} // namespace

PdeGrid solve_g_pde(const CoefficientSet& coeffs, PdeGrid grid, const ModelParams& p,
                    const DerivedConstants& c) {
    const double terminal = p.epsilon == 0.0 ? 0.0 : std::pow(p.epsilon, 1.0 / c.k);
    return cn_solve(coeffs, std::move(grid), p, c, std::pow(p.delta, c.psi), terminal);
}

PdeGrid solve_h_pde(const CoefficientSet& coeffs, PdeGrid grid, const ModelParams& p,
                    const DerivedConstants& c) {
    return cn_solve(coeffs, std::move(grid), p, c, 0.0, 1.0);
}

} // namespace rheston
