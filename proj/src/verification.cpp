#include "rheston/verification.hpp"

#include "rheston/closed_form.hpp"
#include "rheston/errors.hpp"

#include <cmath>
#include <limits>

namespace rheston {

namespace {

struct HestonCoeffsAt {
    double lambda, sigma, alpha, beta;
};

HestonCoeffsAt heston_at(double y, const ModelParams& p) {
    return {p.lambda_bar * y, std::sqrt(y), p.nu - p.m * y, p.beta_bar * std::sqrt(y)};
}

} // namespace

WDerivatives w_derivatives(double t, double x, double y, const DerivedConstants& c,
                           const ModelParams& p, int quadrature_n) {
    if (x <= 0.0) throw DomainError("w_derivatives: x <= 0");
    const GTriple gt = eval_g(t, y, c, p, quadrature_n);
    const double g_t = eval_g_t(t, y, c, p, quadrature_n);
    const double gyg = gt.g_y / gt.g;

    WDerivatives wd;
    wd.w = std::pow(x, 1.0 - p.gamma) * std::pow(gt.g, c.k) / (1.0 - p.gamma);
    wd.w_t = c.k * (g_t / gt.g) * wd.w;
    wd.w_x = (1.0 - p.gamma) * wd.w / x;
    wd.w_xx = -p.gamma * (1.0 - p.gamma) * wd.w / (x * x);
    wd.w_y = c.k * gyg * wd.w;
    wd.w_yy = (c.k * (c.k - 1.0) * gyg * gyg + c.k * gt.g_yy / gt.g) * wd.w;
    wd.w_xy = (1.0 - p.gamma) * (c.k / x) * gyg * wd.w;
    return wd;
}

double aggregator_f(double c, double v, double gamma, double delta, double psi) {
    if (!(c > 0.0)) throw DomainError("aggregator_f: c must be positive");
    const double base = (1.0 - gamma) * v;
    if (!(base > 0.0)) throw DomainError("aggregator_f: (1-gamma) v must be positive");
    const double phi = 1.0 / psi;
    const double theta = (1.0 - gamma) / (1.0 - phi);
    const double certainty = std::pow(base, 1.0 / (1.0 - gamma));
    return delta * theta * v * (std::pow(c / certainty, 1.0 - phi) - 1.0);
}

double aggregator_f(double c, double v, const ModelParams& p, const DerivedConstants& dc) {
    return aggregator_f(c, v, p.gamma, p.delta, dc.psi);
}

double penalty_given_w(const std::array<double, 2>& v, double x, double y, double pi, double w,
                       const ModelParams& p) {
    const auto co = heston_at(y, p);
    const double s11 = x * pi * co.sigma * (x * pi * co.sigma);
    const double s12 = x * pi * co.sigma * p.rho * co.beta;
    const double s22 = co.beta * co.beta;
    const double quad = v[0] * v[0] * s11 + 2.0 * v[0] * v[1] * s12 + v[1] * v[1] * s22;
    if (quad == 0.0) return 0.0;
    if (w == 0.0) throw DomainError("penalty: w = 0 leaves eta undefined");
    if (p.a == 0.0) {
        const double inv_eta = (1.0 - p.gamma) * w; // sign of 1/eta in the a->0 limit
        return inv_eta > 0.0 ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
    }
    const double inv_two_eta = (1.0 - p.gamma) * w / (2.0 * p.a);
    return inv_two_eta * quad;
}

double penalty(const std::array<double, 2>& v, double t, double x, double y, double pi,
               const ModelParams& p, const DerivedConstants& c, int quadrature_n) {
    const double w = value_function(t, x, y, c, p, quadrature_n);
    return penalty_given_w(v, x, y, pi, w, p);
}

double hamiltonian(const HamiltonianInput& in) {
    const ModelParams& p = *in.params;
    const DerivedConstants& dc = *in.consts;
    const auto co = heston_at(in.y, p);
    const WDerivatives& wd = in.wd;

    const double f = aggregator_f(in.c, wd.w, p, dc);
    const double drift_x = in.x * (p.r + in.pi * co.lambda) * wd.w_x;
    const double consume = -in.c * wd.w_x;
    const double diff_xx = 0.5 * in.x * in.x * in.pi * in.pi * co.sigma * co.sigma * wd.w_xx;
    const double drift_y = co.alpha * wd.w_y;
    const double diff_yy = 0.5 * co.beta * co.beta * wd.w_yy;
    const double cross = in.x * in.pi * co.sigma * co.beta * p.rho * wd.w_xy;

    const double s11 = in.x * in.pi * co.sigma * (in.x * in.pi * co.sigma);
    const double s12 = in.x * in.pi * co.sigma * p.rho * co.beta;
    const double s22 = co.beta * co.beta;
    const double tilt = in.v[0] * (s11 * wd.w_x + s12 * wd.w_y) +
                        in.v[1] * (s12 * wd.w_x + s22 * wd.w_y);
    const double pen = penalty_given_w(in.v, in.x, in.y, in.pi, wd.w, p);

    return f + wd.w_t + drift_x + consume + diff_xx + drift_y + diff_yy + cross + tilt + pen;
}

namespace {

struct OptimumAt {
    HamiltonianInput in;
    GTriple gt;
    double g_t;
};

OptimumAt optimum_at(double t, double x, double y, const ModelParams& p,
                     const DerivedConstants& c, double t_guard, int quadrature_n) {
    if (x <= 0.0) throw DomainError("hjbi_residual: x <= 0");
    if (p.T - t < t_guard * (1.0 - 1e-9))
        throw TerminalSingularity("hjbi_residual: too close to the horizon");

    OptimumAt opt;
    opt.gt = eval_g(t, y, c, p, quadrature_n);
    opt.g_t = eval_g_t(t, y, c, p, quadrature_n);
    const double gyg = opt.gt.g_y / opt.gt.g;

    WDerivatives wd;
    wd.w = std::pow(x, 1.0 - p.gamma) * std::pow(opt.gt.g, c.k) / (1.0 - p.gamma);
    wd.w_t = c.k * (opt.g_t / opt.gt.g) * wd.w;
    wd.w_x = (1.0 - p.gamma) * wd.w / x;
    wd.w_xx = -p.gamma * (1.0 - p.gamma) * wd.w / (x * x);
    wd.w_y = c.k * gyg * wd.w;
    wd.w_yy = (c.k * (c.k - 1.0) * gyg * gyg + c.k * opt.gt.g_yy / opt.gt.g) * wd.w;
    wd.w_xy = (1.0 - p.gamma) * (c.k / x) * gyg * wd.w;

    HamiltonianInput in;
    in.t = t;
    in.x = x;
    in.y = y;
    in.pi = p.lambda_bar / (p.gamma + p.a) +
            ((1.0 - p.gamma - p.a) * c.k * p.beta_bar * p.rho /
             ((p.gamma + p.a) * (1.0 - p.gamma))) *
                gyg;
    in.c = std::pow(p.delta, c.psi) / opt.gt.g * x;
    in.v = {-p.a / x, (p.a * c.k / (p.gamma - 1.0)) * gyg};
    in.wd = wd;
    in.params = &p;
    in.consts = &c;
    opt.in = in;
    return opt;
}

} // namespace

ResidualReport hjbi_residual(double t, double x, double y, const ModelParams& p,
                             const DerivedConstants& c, double t_guard, int quadrature_n) {
    const OptimumAt opt = optimum_at(t, x, y, p, c, t_guard, quadrature_n);
    const HamiltonianInput& in = opt.in;
    const WDerivatives& wd = in.wd;
    const auto co = heston_at(y, p);

    ResidualReport rep;
    auto push = [&rep](const char* name, double value) {
        rep.term_breakdown.emplace_back(name, value);
    };
    push("aggregator", aggregator_f(in.c, wd.w, p, c));
    push("w_t", wd.w_t);
    push("drift_x", in.x * (p.r + in.pi * co.lambda) * wd.w_x);
    push("consumption", -in.c * wd.w_x);
    push("diffusion_xx", 0.5 * in.x * in.x * in.pi * in.pi * co.sigma * co.sigma * wd.w_xx);
    push("drift_y", co.alpha * wd.w_y);
    push("diffusion_yy", 0.5 * co.beta * co.beta * wd.w_yy);
    push("cross_xy", in.x * in.pi * co.sigma * co.beta * p.rho * wd.w_xy);
    const double s11 = in.x * in.pi * co.sigma * (in.x * in.pi * co.sigma);
    const double s12 = in.x * in.pi * co.sigma * p.rho * co.beta;
    const double s22 = co.beta * co.beta;
    push("drift_tilt", in.v[0] * (s11 * wd.w_x + s12 * wd.w_y) +
                           in.v[1] * (s12 * wd.w_x + s22 * wd.w_y));
    push("penalty", penalty_given_w(in.v, in.x, in.y, in.pi, wd.w, p));

    double sum = 0.0, abs_sum = 0.0;
    for (const auto& [name, value] : rep.term_breakdown) {
        sum += value;
        abs_sum += std::abs(value);
    }
    rep.residual = sum;
    rep.normalized_residual = sum / (1.0 + abs_sum);

    // Scalar equation for g. H1 and H2 are rebuilt from the raw parameters
    // rather than taken from DerivedConstants, so that an inconsistency
    // between the constants used by A, B and the model itself shows up here.
    const double cA = ((1.0 - p.gamma) * p.r - p.delta * c.theta) / c.k;
    const double H1 = cA + ((1.0 - p.gamma) / (2.0 * c.k * (p.gamma + p.a))) * p.lambda_bar *
                               p.lambda_bar * y;
    const double H2 = p.nu - (p.m - ((1.0 - p.gamma - p.a) / (p.gamma + p.a)) * p.rho *
                                        p.lambda_bar * p.beta_bar) *
                                 y;
    const double diff = 0.5 * p.beta_bar * p.beta_bar * y;
    const double dpsi = std::pow(p.delta, c.psi);
    const double terms[] = {opt.g_t, H1 * opt.gt.g, H2 * opt.gt.g_y, diff * opt.gt.g_yy, dpsi};
    double gsum = 0.0, gabs = 0.0;
    for (double v : terms) {
        gsum += v;
        gabs += std::abs(v);
    }
    rep.g_pde_residual = gsum;
    rep.g_pde_normalized = gsum / (1.0 + gabs);
    return rep;
}

SaddleCheck saddle_check(double t, double x, double y, const ModelParams& p,
                         const DerivedConstants& c, double bump, double slack, double t_guard,
                         int quadrature_n) {
    const OptimumAt opt = optimum_at(t, x, y, p, c, t_guard, quadrature_n);
    const double h0 = hamiltonian(opt.in);

    SaddleCheck out;
    out.worst_v_drop = 0.0;
    out.worst_u_rise = 0.0;

    for (int i = 0; i < 2; ++i) {
        for (double sgn : {+1.0, -1.0}) {
            HamiltonianInput in = opt.in;
            in.v[static_cast<std::size_t>(i)] += sgn * bump;
            const double diff = hamiltonian(in) - h0; // should be >= 0
            if (std::isfinite(diff)) out.worst_v_drop = std::min(out.worst_v_drop, diff);
        }
    }
    for (double sgn : {+1.0, -1.0}) {
        HamiltonianInput in = opt.in;
        in.pi += sgn * bump;
        out.worst_u_rise = std::max(out.worst_u_rise, hamiltonian(in) - h0);
    }
    for (double sgn : {+1.0, -1.0}) {
        HamiltonianInput in = opt.in;
        in.c += sgn * bump * x;
        out.worst_u_rise = std::max(out.worst_u_rise, hamiltonian(in) - h0);
    }
    out.v_ok = out.worst_v_drop >= -slack;
    out.u_ok = out.worst_u_rise <= slack;
    return out;
}

ResidualGridResult hjbi_residual_grid(const ModelParams& p, const DerivedConstants& c,
                                      double t_lo, double t_hi, std::size_t nt, double y_lo,
                                      double y_hi, std::size_t ny, double x, bool parallel,
                                      int quadrature_n) {
    const double dt = nt > 1 ? (t_hi - t_lo) / static_cast<double>(nt - 1) : 0.0;
    const double dy = ny > 1 ? (y_hi - y_lo) / static_cast<double>(ny - 1) : 0.0;
    std::vector<double> row_max(nt, 0.0), row_gmax(nt, 0.0), row_worst_y(nt, y_lo);

    auto do_row = [&](std::size_t i) {
        const double t = t_lo + static_cast<double>(i) * dt;
        for (std::size_t j = 0; j < ny; ++j) {
            const double y = y_lo + static_cast<double>(j) * dy;
            const ResidualReport rep = hjbi_residual(t, x, y, p, c, 1e-6, quadrature_n);
            if (std::abs(rep.normalized_residual) > row_max[i]) {
                row_max[i] = std::abs(rep.normalized_residual);
                row_worst_y[i] = y;
            }
            row_gmax[i] = std::max(row_gmax[i], std::abs(rep.g_pde_normalized));
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(nt); ++i)
            do_row(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < nt; ++i) do_row(i);
    }

    ResidualGridResult res;
    for (std::size_t i = 0; i < nt; ++i) {
        if (row_max[i] > res.max_normalized) {
            res.max_normalized = row_max[i];
            res.worst_t = t_lo + static_cast<double>(i) * dt;
            res.worst_y = row_worst_y[i];
        }
        res.max_g_pde_normalized = std::max(res.max_g_pde_normalized, row_gmax[i]);
    }
    return res;
}

SaddleGridResult saddle_grid(const ModelParams& p, const DerivedConstants& c, double t_lo,
                             double t_hi, std::size_t nt, double y_lo, double y_hi,
                             std::size_t ny, double x, double bump, double slack, bool parallel) {
    const double dt = nt > 1 ? (t_hi - t_lo) / static_cast<double>(nt - 1) : 0.0;
    const double dy = ny > 1 ? (y_hi - y_lo) / static_cast<double>(ny - 1) : 0.0;
    std::vector<double> drops(nt, 0.0), rises(nt, 0.0);
    std::vector<std::size_t> fails(nt, 0);

    auto do_row = [&](std::size_t i) {
        const double t = t_lo + static_cast<double>(i) * dt;
        for (std::size_t j = 0; j < ny; ++j) {
            const double y = y_lo + static_cast<double>(j) * dy;
            const SaddleCheck sc = saddle_check(t, x, y, p, c, bump, slack);
            drops[i] = std::min(drops[i], sc.worst_v_drop);
            rises[i] = std::max(rises[i], sc.worst_u_rise);
            if (!sc.v_ok || !sc.u_ok) ++fails[i];
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(nt); ++i)
            do_row(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < nt; ++i) do_row(i);
    }

    SaddleGridResult res;
    res.n_states = nt * ny;
    for (std::size_t i = 0; i < nt; ++i) {
        res.n_failures += fails[i];
        res.worst_v_drop = std::min(res.worst_v_drop, drops[i]);
        res.worst_u_rise = std::max(res.worst_u_rise, rises[i]);
    }
    return res;
}

} // namespace rheston
