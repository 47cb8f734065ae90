#pragma once

#include "rheston/params.hpp"

#include <array>
#include <string>
#include <vector>

namespace rheston {

// Value-function partials at a point, built analytically from the ansatz
// w = x^{1-gamma} g^k / (1-gamma).
struct WDerivatives {
    double w = 0.0;
    double w_t = 0.0;
    double w_x = 0.0;
    double w_y = 0.0;
    double w_xx = 0.0;
    double w_yy = 0.0;
    double w_xy = 0.0;
};

WDerivatives w_derivatives(double t, double x, double y, const DerivedConstants& c,
                           const ModelParams& p, int quadrature_n = 512);

// Epstein-Zin aggregator. Requires c > 0 and (1-gamma) v > 0.
double aggregator_f(double c, double v, double gamma, double delta, double psi);
double aggregator_f(double c, double v, const ModelParams& p, const DerivedConstants& dc);

// Quadratic distortion penalty (1/(2 eta)) v' Sigma v with the value-scaled
// eta = a / ((1-gamma) w). At v = 0 the penalty is 0 for every a; for a = 0
// and v != 0 it is +infinity (the adversary cannot deviate at all).
double penalty_given_w(const std::array<double, 2>& v, double x, double y, double pi, double w,
                       const ModelParams& p);
double penalty(const std::array<double, 2>& v, double t, double x, double y, double pi,
               const ModelParams& p, const DerivedConstants& c, int quadrature_n = 512);

struct HamiltonianInput {
    double t = 0.0, x = 0.0, y = 0.0;
    double c = 0.0;  // consumption level (not the ratio)
    double pi = 0.0;
    std::array<double, 2> v{0.0, 0.0};
    WDerivatives wd;
    const ModelParams* params = nullptr;
    const DerivedConstants* consts = nullptr;
};

// Inner bracket of the dynamic-programming equation at the given controls and
// distortion; zero at the optimal triple.
double hamiltonian(const HamiltonianInput& in);

struct ResidualReport {
    double residual = 0.0;
    double normalized_residual = 0.0; // residual / (1 + sum |term|)
    std::vector<std::pair<std::string, double>> term_breakdown;
    double g_pde_residual = 0.0; // residual of the scalar g equation
    double g_pde_normalized = 0.0;
};

// Plugs the closed-form optimum into the Hamiltonian and, separately, g and
// its derivatives into the scalar PDE for g. Both residuals are pure
// quadrature/derivative error when the closed form is correct.
ResidualReport hjbi_residual(double t, double x, double y, const ModelParams& p,
                             const DerivedConstants& c, double t_guard = 1e-6,
                             int quadrature_n = 512);

struct SaddleCheck {
    bool v_ok = false;
    bool u_ok = false;
    double worst_v_drop = 0.0; // most negative H(v') - H(v*); should be >= -slack
    double worst_u_rise = 0.0; // most positive H(u') - H(u*); should be <= +slack
};

// One-sided perturbations of size `bump` in each control coordinate: the
// distortion perturbations must not lower the Hamiltonian and the (c, pi)
// perturbations must not raise it, within `slack`.
SaddleCheck saddle_check(double t, double x, double y, const ModelParams& p,
                         const DerivedConstants& c, double bump = 1e-3, double slack = 1e-10,
                         double t_guard = 1e-6, int quadrature_n = 512);

struct ResidualGridResult {
    double max_normalized = 0.0;
    double max_g_pde_normalized = 0.0;
    double worst_t = 0.0, worst_y = 0.0;
};

// Sweep kernel over a (t, y) grid; `parallel` distributes rows over OpenMP
// threads and must agree bit-for-bit with the serial reference.
ResidualGridResult hjbi_residual_grid(const ModelParams& p, const DerivedConstants& c,
                                      double t_lo, double t_hi, std::size_t nt, double y_lo,
                                      double y_hi, std::size_t ny, double x = 1.0,
                                      bool parallel = true, int quadrature_n = 512);

struct SaddleGridResult {
    std::size_t n_states = 0;
    std::size_t n_failures = 0;
    double worst_v_drop = 0.0;
    double worst_u_rise = 0.0;
};

SaddleGridResult saddle_grid(const ModelParams& p, const DerivedConstants& c, double t_lo,
                             double t_hi, std::size_t nt, double y_lo, double y_hi,
                             std::size_t ny, double x = 1.0, double bump = 1e-3,
                             double slack = 1e-10, bool parallel = true);

} // namespace rheston
