#include "rheston/params.hpp"

#include "rheston/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rheston {

void check_raw(const ModelParams& p) {
    auto fail = [](const std::string& what) { throw InvalidParams("invalid parameters: " + what); };
    if (!(p.gamma > 0.0) || p.gamma == 1.0) fail("gamma must be > 0 and != 1");
    if (!(p.delta > 0.0)) fail("delta must be > 0");
    if (!(std::abs(p.rho) <= 1.0)) fail("|rho| must be <= 1");
    if (!(p.r > 0.0)) fail("r must be > 0");
    if (!(p.m > 0.0)) fail("m must be > 0");
    if (!(p.nu > 0.0)) fail("nu must be > 0");
    if (!(p.beta_bar > 0.0)) fail("beta_bar must be > 0");
    if (!(p.T > 0.0)) fail("T must be > 0");
    if (!(p.a >= 0.0)) fail("a must be >= 0");
    if (!(p.a1 >= 0.0)) fail("a1 must be >= 0");
    if (!(p.epsilon >= 0.0)) fail("epsilon must be >= 0");
    if (!(p.t0 >= 0.0 && p.t0 < p.T)) fail("t0 must lie in [0, T)");
    if (!(p.x0 > 0.0)) fail("x0 must be > 0");
    if (!(p.y0 >= 0.0)) fail("y0 must be >= 0");
}

DerivedConstants derive_constants(const ModelParams& p) {
    check_raw(p);
    const double g = p.gamma, a = p.a, rho = p.rho;
    if (g + a == 0.0) throw ZeroDenominator("gamma + a vanishes");

    DerivedConstants c;
    c.psi = 2.0 - g - a + ((1.0 - g - a) * (1.0 - g - a) / (g + a)) * rho * rho;
    const double k_den =
        ((1.0 - g - a) * (1.0 - g - a) * rho * rho) / ((g + a) * (1.0 - g)) + 1.0 - a / (1.0 - g);
    if (k_den == 0.0) throw ZeroDenominator("denominator of k vanishes");
    c.k = 1.0 / k_den;
    if (c.psi == 0.0 || c.psi == 1.0) throw ZeroDenominator("derived psi degenerate");
    c.phi = 1.0 / c.psi;
    c.theta = (1.0 - g) / (1.0 - c.phi);
    c.zeta = -c.k / c.theta;

    const double lam2 = p.lambda_bar * p.lambda_bar;
    c.b = -(1.0 / (2.0 * c.k)) * ((1.0 - g) / (g + a)) * lam2;
    c.kappa = p.m - ((1.0 - g - a) / (g + a)) * rho * p.lambda_bar * p.beta_bar;
    c.d = std::sqrt(c.kappa * c.kappa + 2.0 * c.b * p.beta_bar * p.beta_bar);
    const double b_over_kappa = c.kappa != 0.0 ? c.b / c.kappa : 0.0;
    c.K_pi = p.lambda_bar / (g + a) +
             ((1.0 - g - a) / ((g + a) * (1.0 - g))) * c.k * p.beta_bar * std::abs(rho) * b_over_kappa;
    c.b_tilde = c.b + ((2.0 * g - 1.0) / 2.0 + p.a1) * c.K_pi * c.K_pi;
    return c;
}

const char* to_string(Assumption31Case c) {
    switch (c) {
        case Assumption31Case::a: return "a";
        case Assumption31Case::b: return "b";
        case Assumption31Case::c: return "c";
        case Assumption31Case::d: return "d";
        default: return "violated";
    }
}

Assumption31Case validate_assumption31(double gamma, double psi) {
    if (gamma > 1.0 && psi > 1.0) return Assumption31Case::a;
    if (gamma > 1.0 && psi < 1.0 && gamma * psi <= 1.0) return Assumption31Case::b;
    if (gamma < 1.0 && psi < 1.0) return Assumption31Case::c;
    if (gamma < 1.0 && psi > 1.0 && gamma * psi >= 1.0) return Assumption31Case::d;
    return Assumption31Case::violated;
}

bool ValidationReport::all_ok() const {
    return assumption31_case != Assumption31Case::violated && assumption32_ok && h1_ok && h2_ok &&
           h3_ok && epsilon_ok;
}

ValidationReport validate_heston(const ModelParams& p, const DerivedConstants& c, double q) {
    if (!(q > 2.0)) throw InvalidParams("oversampling exponent q must exceed 2");

    ValidationReport rep;
    std::ostringstream msg;

    rep.assumption31_case = validate_assumption31(p.gamma, c.psi);
    if (rep.assumption31_case == Assumption31Case::violated) {
        msg.str("");
        msg << "(gamma, psi) = (" << p.gamma << ", " << c.psi << ") falls outside all four cases";
        rep.messages.push_back(msg.str());
    }

    // k*psi = theta is an identity of the construction; its failure flags a
    // degenerate denominator or a numerics bug.
    const double id_err = std::abs(c.k * c.psi - c.theta) / std::max(1.0, std::abs(c.theta));
    rep.assumption32_ok = id_err < 1e-12 && std::isfinite(c.k) && std::isfinite(c.psi);
    if (!rep.assumption32_ok) {
        rep.messages.push_back("k*psi = theta identity violated; derived constants degenerate");
    }

    const double h1_upper = std::min(c.k + 2.0, 1.0 / q + 1.0);
    rep.h1_slack = h1_upper - p.gamma;
    rep.h1_ok = p.gamma > 1.0 && p.gamma < h1_upper && p.rho <= 0.0 && p.lambda_bar > 0.0;
    if (!rep.h1_ok) {
        msg.str("");
        msg << "H1 fails: need 1 < gamma < min{k+2, 1/q+1} = " << h1_upper
            << ", rho <= 0, lambda_bar > 0";
        rep.messages.push_back(msg.str());
    }

    const double h2_arg1 = ((1.0 - p.gamma - p.a) / (p.gamma + p.a)) * p.lambda_bar * p.beta_bar * p.rho;
    const double h2_arg2 = p.beta_bar * c.K_pi * (2.0 * (p.gamma - 1.0) + p.a1);
    rep.h2_slack = p.m - std::max(h2_arg1, h2_arg2);
    rep.h2_ok = rep.h2_slack > 0.0;
    if (!rep.h2_ok) {
        msg.str("");
        msg << "H2 fails: m = " << p.m << " <= max{" << h2_arg1 << ", " << h2_arg2 << "}";
        rep.messages.push_back(msg.str());
    }

    const double h3_lhs = 4.0 * (p.gamma - 1.0) * p.beta_bar * p.beta_bar * c.b_tilde;
    const double h3_gap = p.m - h2_arg2;
    const double h3_rhs = h3_gap * h3_gap;
    rep.h3_slack = h3_rhs - h3_lhs;
    rep.h3_ok = h3_lhs < h3_rhs;
    if (!rep.h3_ok) {
        msg.str("");
        msg << "H3 fails: " << h3_lhs << " >= " << h3_rhs;
        rep.messages.push_back(msg.str());
    }

    rep.epsilon_ok = p.epsilon == 0.0;
    if (!rep.epsilon_ok) {
        rep.messages.push_back("epsilon must be 0 on the Heston solver path");
    }
    if (p.a1 != p.a) {
        rep.messages.push_back("nonstandard: a1 differs from a");
    }
    return rep;
}

void require_heston_valid(const ModelParams& p, const DerivedConstants& c, double q) {
    const ValidationReport rep = validate_heston(p, c, q);
    if (!rep.all_ok()) {
        std::string what = "parameter validation failed";
        for (const auto& m : rep.messages) what += "; " + m;
        throw InvalidParams(what);
    }
}

} // namespace rheston
