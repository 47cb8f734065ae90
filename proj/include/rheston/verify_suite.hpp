#pragma once

#include "rheston/params.hpp"

#include <string>
#include <vector>

namespace rheston {

struct VerifyTolerances {
    double ode = 1e-8;      // Riccati closed form vs RK4, normalized
    double pde = 1e-3;      // quadrature g vs Crank-Nicolson, relative, interior
    double residual = 1e-6; // normalized HJBI residual at the optimum
    double saddle_slack = 1e-10;
};

struct VerifyOptions {
    std::size_t riccati_grid = 100; // (t, s) nodes per axis
    std::size_t pde_nodes = 256;    // CN nodes per axis
    std::size_t residual_grid = 20; // (t, y) nodes per axis
    bool parallel = true;
};

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerificationSummary {
    std::vector<CheckResult> checks;

    bool all_pass() const;
    const CheckResult* worst() const; // largest measured/tolerance ratio
};

// Riccati-vs-RK4, quadrature-vs-PDE, HJBI residual and saddle checks on the
// default grids. Used by both the CLI and the acceptance suite.
VerificationSummary run_verification(const ModelParams& p, const DerivedConstants& c,
                                     const VerifyTolerances& tols = {},
                                     const VerifyOptions& opts = {});

// Max normalized discrepancy between the closed-form pair and RK4 on an
// n x n (t, s) grid over [0, T], integrating each terminal column separately.
double riccati_rk4_max_error(const ModelParams& p, const DerivedConstants& c, std::size_t n);

// Max relative discrepancy between quadrature g and the Crank-Nicolson solve
// on the interior 80% of an n x n grid over [0, T] x [0, 10 nu/m].
double g_pde_max_error(const ModelParams& p, const DerivedConstants& c, std::size_t n,
                       bool parallel = true);

} // namespace rheston
