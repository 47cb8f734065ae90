#pragma once

#include "rheston/params.hpp"

#include <cstddef>
#include <vector>

namespace rheston {

// Exponential-affine exponent pair: h(t,y;s) = exp(A(t,s) - B(t,s) y).
struct RiccatiPair {
    double A = 0.0;
    double B = 0.0;
};

// Both functions depend on (t,s) only through the gap s - t; the evaluation
// factors exp(-d (s-t)) so that long horizons do not overflow, and builds
// kappa - d as -2 b beta^2 / (kappa + d) to avoid cancellation when d is
// close to kappa.
RiccatiPair riccati_closed_form(double t, double s, const DerivedConstants& c,
                                const ModelParams& p);

struct GTriple {
    double g = 0.0;
    double g_y = 0.0;  // <= 0
    double g_yy = 0.0; // >= 0
};

// Composite-Simpson nodes over s in [t, T], reusable across many y at the
// same t: g(t,y) = sum_j W_j exp(-B_j y) with W_j carrying delta^psi, the
// Simpson weight and exp(A_j).
class GQuadratureRow {
  public:
    GQuadratureRow(double t, const DerivedConstants& c, const ModelParams& p,
                   int quadrature_n = 512);
    GTriple eval(double y) const;
    double t() const { return t_; }

  private:
    double t_ = 0.0;
    std::vector<double> B_, W_;
};

// g(t,y) and its y-derivatives by composite Simpson quadrature over the
// horizon; the derivative integrands are differentiated analytically.
GTriple eval_g(double t, double y, const DerivedConstants& c, const ModelParams& p,
               int quadrature_n = 512);

// Time derivative of g, by differentiating under the integral (the moving
// lower limit contributes the -delta^psi term).
double eval_g_t(double t, double y, const DerivedConstants& c, const ModelParams& p,
                int quadrature_n = 512);

struct StrategyPoint {
    double pi_star = 0.0;  // portfolio fraction
    double cx_star = 0.0;  // consumption-wealth ratio, 1/year
    double w = 0.0;        // value-function level
    double v1_star = 0.0;  // wealth-channel distortion, -a/x
    double v2_star = 0.0;  // variance-channel distortion, <= 0 for gamma > 1
};

StrategyPoint optimal_strategy(double t, double x, double y, const DerivedConstants& c,
                               const ModelParams& p, double t_guard = 1e-6,
                               int quadrature_n = 512);

// w(t,x,y) = x^{1-gamma} g(t,y)^k / (1-gamma).
double value_function(double t, double x, double y, const DerivedConstants& c,
                      const ModelParams& p, int quadrature_n = 512);

// Precomputed (t,y) table of g and g_y/g with bilinear lookup, for hot loops
// that cannot afford a quadrature per query. Rows share their Riccati nodes,
// so construction is far cheaper than pointwise eval_g.
class GSurface {
  public:
    GSurface() = default;
    GSurface(std::size_t nt, std::size_t ny, double t_lo, double t_hi, double y_hi);

    double t_lo() const { return t_lo_; }
    double t_hi() const { return t_hi_; }
    double y_hi() const { return y_hi_; }
    std::size_t nt() const { return nt_; }
    std::size_t ny() const { return ny_; }

    struct Point {
        double g;
        double gy_over_g;
        double ln_g; // interpolated separately; serves the g^k powers
    };
    // Clamps to the table range; callers size the table so that clamping
    // never matters in practice.
    Point lookup(double t, double y) const;

    double& g_node(std::size_t i, std::size_t j) { return g_[i * ny_ + j]; }
    double& gyg_node(std::size_t i, std::size_t j) { return gyg_[i * ny_ + j]; }
    double& lng_node(std::size_t i, std::size_t j) { return lng_[i * ny_ + j]; }
    double g_node(std::size_t i, std::size_t j) const { return g_[i * ny_ + j]; }
    double gyg_node(std::size_t i, std::size_t j) const { return gyg_[i * ny_ + j]; }

  private:
    std::size_t nt_ = 0, ny_ = 0;
    double t_lo_ = 0.0, t_hi_ = 0.0, y_hi_ = 0.0;
    double dt_ = 0.0, dy_ = 0.0;
    std::vector<double> g_, gyg_, lng_;
};

// Grid evaluation kernel. `parallel` fans rows out over OpenMP threads; the
// serial path is kept as the reference and must produce bit-identical tables.
GSurface build_g_surface(const DerivedConstants& c, const ModelParams& p, std::size_t nt,
                         std::size_t ny, double t_lo, double t_hi, double y_hi,
                         int quadrature_n = 512, bool parallel = true);

} // namespace rheston
