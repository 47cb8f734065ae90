#include "rheston/closed_form.hpp"

#include "rheston/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rheston {

namespace {

struct RiccatiCoeffs {
    double kpd;   // kappa + d
    double kmd;   // kappa - d, computed as -2 b beta^2 / (kappa + d)
    double pref;  // -2 nu / beta^2
    double cA;    // ((1-gamma) r - delta theta) / k
    double b, kappa, d, nu, half_beta2;
};

RiccatiCoeffs make_coeffs(const DerivedConstants& c, const ModelParams& p) {
    RiccatiCoeffs rc;
    rc.b = c.b;
    rc.kappa = c.kappa;
    rc.d = c.d;
    rc.nu = p.nu;
    rc.half_beta2 = 0.5 * p.beta_bar * p.beta_bar;
    rc.kpd = c.kappa + c.d;
    rc.kmd = rc.kpd != 0.0 ? -2.0 * c.b * p.beta_bar * p.beta_bar / rc.kpd : 0.0;
    rc.pref = p.beta_bar != 0.0 ? -2.0 * p.nu / (p.beta_bar * p.beta_bar) : 0.0;
    rc.cA = ((1.0 - p.gamma) * p.r - p.delta * c.theta) / c.k;
    return rc;
}

RiccatiPair riccati_tau(double tau, const RiccatiCoeffs& rc) {
    RiccatiPair out;
    if (tau == 0.0 || rc.b == 0.0) {
        out.A = rc.cA * tau;
        out.B = 0.0;
        return out;
    }
    const double one_minus_e = -std::expm1(-rc.d * tau); // 1 - exp(-d tau)
    const double e = std::exp(-rc.d * tau);
    const double denom = rc.kpd - rc.kmd * e;
    out.B = 2.0 * rc.b * one_minus_e / denom;
    out.A = rc.pref * (0.5 * (rc.d - rc.kappa) * tau +
                       std::log1p(rc.kmd * one_minus_e / (2.0 * rc.d))) +
            rc.cA * tau;
    return out;
}

// dB/dtau and dA/dtau, used for the g time derivative.
inline double dB_dtau(double B, const RiccatiCoeffs& rc) {
    return rc.b - rc.kappa * B - rc.half_beta2 * B * B;
}
inline double dA_dtau(double B, const RiccatiCoeffs& rc) { return rc.cA - rc.nu * B; }

int even_subintervals(int n) {
    n = std::max(2, n);
    return n % 2 ? n + 1 : n;
}

// Simpson weight of interior node i on n subintervals.
inline double simpson_weight(int i, int n) {
    if (i == 0 || i == n) return 1.0;
    return (i % 2) ? 4.0 : 2.0;
}

} // namespace

RiccatiPair riccati_closed_form(double t, double s, const DerivedConstants& c,
                                const ModelParams& p) {
    if (t > s) throw DomainError("riccati_closed_form: t > s");
    return riccati_tau(s - t, make_coeffs(c, p));
}

GQuadratureRow::GQuadratureRow(double t, const DerivedConstants& c, const ModelParams& p,
                               int quadrature_n)
    : t_(t) {
    if (t > p.T || t < 0.0) throw DomainError("eval_g: t outside [0, T]");
    if (t == p.T) return; // g(T, .) = epsilon^{1/k} = 0 on this path

    const RiccatiCoeffs rc = make_coeffs(c, p);
    const int n = even_subintervals(quadrature_n);
    const double h = (p.T - t) / n;
    const double scale = std::pow(p.delta, c.psi) * h / 3.0;
    B_.resize(n + 1);
    W_.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        const RiccatiPair ab = riccati_tau(i * h, rc);
        B_[i] = ab.B;
        W_[i] = simpson_weight(i, n) * std::exp(ab.A) * scale;
    }
}

GTriple GQuadratureRow::eval(double y) const {
    if (y < 0.0) throw DomainError("eval_g: y < 0");
    GTriple out;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < B_.size(); ++i) {
        const double w = W_[i] * std::exp(-B_[i] * y);
        s0 += w;
        s1 += B_[i] * w;
        s2 += B_[i] * B_[i] * w;
    }
    out.g = s0;
    out.g_y = -s1;
    out.g_yy = s2;
    return out;
}

GTriple eval_g(double t, double y, const DerivedConstants& c, const ModelParams& p,
               int quadrature_n) {
    return GQuadratureRow(t, c, p, quadrature_n).eval(y);
}

double eval_g_t(double t, double y, const DerivedConstants& c, const ModelParams& p,
                int quadrature_n) {
    if (t > p.T || t < 0.0) throw DomainError("eval_g_t: t outside [0, T]");
    if (y < 0.0) throw DomainError("eval_g_t: y < 0");
    const double dpsi = std::pow(p.delta, c.psi);
    if (t == p.T) return -dpsi;

    const RiccatiCoeffs rc = make_coeffs(c, p);
    const int n = even_subintervals(quadrature_n);
    const double h = (p.T - t) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const RiccatiPair ab = riccati_tau(i * h, rc);
        const double integrand =
            (-dA_dtau(ab.B, rc) + dB_dtau(ab.B, rc) * y) * std::exp(ab.A - ab.B * y);
        acc += simpson_weight(i, n) * integrand;
    }
    return dpsi * (acc * h / 3.0 - 1.0);
}

StrategyPoint optimal_strategy(double t, double x, double y, const DerivedConstants& c,
                               const ModelParams& p, double t_guard, int quadrature_n) {
    if (x <= 0.0) throw DomainError("optimal_strategy: x <= 0");
    if (y < 0.0) throw DomainError("optimal_strategy: y < 0");
    // tolerant comparison: t = T - t_guard computed in doubles must pass
    if (p.T - t < t_guard * (1.0 - 1e-9))
        throw TerminalSingularity("optimal_strategy: T - t below the terminal guard");

    const GTriple gt = eval_g(t, y, c, p, quadrature_n);
    const double gyg = gt.g_y / gt.g;
    StrategyPoint sp;
    sp.pi_star = p.lambda_bar / (p.gamma + p.a) +
                 ((1.0 - p.gamma - p.a) * c.k * p.beta_bar * p.rho /
                  ((p.gamma + p.a) * (1.0 - p.gamma))) *
                     gyg;
    sp.cx_star = std::pow(p.delta, c.psi) / gt.g;
    sp.w = std::pow(x, 1.0 - p.gamma) * std::pow(gt.g, c.k) / (1.0 - p.gamma);
    sp.v1_star = -p.a / x;
    sp.v2_star = (p.a * c.k / (p.gamma - 1.0)) * gyg;
    return sp;
}

double value_function(double t, double x, double y, const DerivedConstants& c,
                      const ModelParams& p, int quadrature_n) {
    if (x <= 0.0) throw DomainError("value_function: x <= 0");
    const GTriple gt = eval_g(t, y, c, p, quadrature_n);
    return std::pow(x, 1.0 - p.gamma) * std::pow(gt.g, c.k) / (1.0 - p.gamma);
}

GSurface::GSurface(std::size_t nt, std::size_t ny, double t_lo, double t_hi, double y_hi)
    : nt_(nt), ny_(ny), t_lo_(t_lo), t_hi_(t_hi), y_hi_(y_hi) {
    if (nt < 2 || ny < 2) throw InvalidParams("GSurface: need at least 2 nodes per axis");
    if (!(t_hi > t_lo) || !(y_hi > 0.0)) throw InvalidParams("GSurface: empty range");
    dt_ = (t_hi - t_lo) / static_cast<double>(nt - 1);
    dy_ = y_hi / static_cast<double>(ny - 1);
    g_.assign(nt * ny, 0.0);
    gyg_.assign(nt * ny, 0.0);
    lng_.assign(nt * ny, 0.0);
}

GSurface::Point GSurface::lookup(double t, double y) const {
    const double ft = std::clamp((t - t_lo_) / dt_, 0.0, static_cast<double>(nt_ - 1));
    const double fy = std::clamp(y / dy_, 0.0, static_cast<double>(ny_ - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(ft), nt_ - 2);
    const std::size_t j = std::min(static_cast<std::size_t>(fy), ny_ - 2);
    const double u = ft - static_cast<double>(i);
    const double v = fy - static_cast<double>(j);
    const std::size_t idx = i * ny_ + j;
    const double w00 = (1.0 - u) * (1.0 - v), w01 = (1.0 - u) * v;
    const double w10 = u * (1.0 - v), w11 = u * v;
    Point out;
    out.g = w00 * g_[idx] + w01 * g_[idx + 1] + w10 * g_[idx + ny_] + w11 * g_[idx + ny_ + 1];
    out.gy_over_g =
        w00 * gyg_[idx] + w01 * gyg_[idx + 1] + w10 * gyg_[idx + ny_] + w11 * gyg_[idx + ny_ + 1];
    out.ln_g =
        w00 * lng_[idx] + w01 * lng_[idx + 1] + w10 * lng_[idx + ny_] + w11 * lng_[idx + ny_ + 1];
    return out;
}

GSurface build_g_surface(const DerivedConstants& c, const ModelParams& p, std::size_t nt,
                         std::size_t ny, double t_lo, double t_hi, double y_hi, int quadrature_n,
                         bool parallel) {
    if (!(t_hi < p.T)) throw InvalidParams("build_g_surface: t_hi must be below T");
    GSurface surf(nt, ny, t_lo, t_hi, y_hi);
    const double dt = (t_hi - t_lo) / static_cast<double>(nt - 1);
    const double dy = y_hi / static_cast<double>(ny - 1);

    auto fill_row = [&](std::size_t i) {
        const double t = t_lo + static_cast<double>(i) * dt;
        // Shorter horizons need proportionally fewer quadrature nodes.
        const int n = std::max(16, static_cast<int>(std::lround(quadrature_n * (p.T - t) / p.T)));
        const GQuadratureRow row(t, c, p, n);
        for (std::size_t j = 0; j < ny; ++j) {
            const GTriple gt = row.eval(static_cast<double>(j) * dy);
            surf.g_node(i, j) = gt.g;
            surf.gyg_node(i, j) = gt.g_y / gt.g;
            surf.lng_node(i, j) = std::log(gt.g);
        }
    };

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(nt); ++i)
            fill_row(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < nt; ++i) fill_row(i);
    }
    return surf;
}

} // namespace rheston
