#pragma once

#include "rheston/params.hpp"

#include <functional>
#include <span>
#include <vector>

namespace rheston {

// Coefficient functions of the general factor model; the Heston instance
// fills lambda(t,y) = lambda_bar y, sigma = sqrt(y), alpha = nu - m y,
// beta = beta_bar sqrt(y). Where a ratio lambda/sigma is needed and sigma
// vanishes, the solvers use 0 (the correct Heston limit at y = 0).
struct CoefficientSet {
    std::function<double(double, double)> lambda;
    std::function<double(double, double)> sigma;
    std::function<double(double, double)> alpha;
    std::function<double(double, double)> beta;

    static CoefficientSet heston(const ModelParams& p);
};

struct RiccatiSolution {
    std::vector<double> t;
    std::vector<double> A;
    std::vector<double> B;
};

// Classical RK4 integration of the backward system
//   dB/dt = kappa B + (1/2) beta^2 B^2 - b,   B(s,s) = 0
//   dA/dt = nu B - ((1-gamma) r - delta theta)/k,   A(s,s) = 0
// from s_terminal down the (uniform, ascending) t_grid; the grid spacing is
// the RK4 step. Throws StepTooLarge when the spacing exceeds 1e-2.
RiccatiSolution solve_riccati_ode(double s_terminal, std::span<const double> t_grid,
                                  const ModelParams& p, const DerivedConstants& c);

struct PdeGrid {
    std::vector<double> t_nodes; // uniform on [t0, T]
    std::vector<double> y_nodes; // uniform on [0, y_max]
    std::vector<double> values;  // row-major by (t, y)

    double& at(std::size_t i, std::size_t j) { return values[i * y_nodes.size() + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * y_nodes.size() + j]; }
};

// Node counts of at least 64 per axis; y_max should dominate every queried y.
PdeGrid make_pde_grid(std::size_t nt, std::size_t ny, double t_lo, double t_hi, double y_max);

// Crank-Nicolson solve of  g_t + H1 g + H2 g_y + (1/2) beta^2 g_yy + src = 0
// backward from the terminal row. The y = 0 row drops the (vanishing)
// diffusion and one-sides the first derivative; the y_max row extrapolates
// with a homogeneous second derivative. Throws InstabilityDetected when a
// value turns non-finite or dips below -1e-8.
PdeGrid solve_g_pde(const CoefficientSet& coeffs, PdeGrid grid, const ModelParams& p,
                    const DerivedConstants& c);

// Same operator without the source term and with terminal value 1; solves for
// the exponential-affine kernel h(., .; s) with s = grid.t_nodes.back().
PdeGrid solve_h_pde(const CoefficientSet& coeffs, PdeGrid grid, const ModelParams& p,
                    const DerivedConstants& c);

} // namespace rheston
