#pragma once

#include <string>
#include <vector>

namespace rheston {

// Raw market, preference and robustness inputs. Rates are per year, the
// variance state y is the square of volatility.
struct ModelParams {
    double gamma = 0.0;      // relative risk aversion, > 0 and != 1
    double delta = 0.0;      // rate of time preference, > 0
    double rho = 0.0;        // stock/variance correlation, in [-1, 1]
    double r = 0.0;          // riskless rate, > 0
    double lambda_bar = 0.0; // excess return per unit variance
    double m = 0.0;          // variance mean-reversion speed, > 0
    double nu = 0.0;         // variance drift level, > 0
    double beta_bar = 0.0;   // volatility of variance, > 0
    double a = 0.0;          // robustness preference, >= 0
    double a1 = 0.0;         // distortion scale, >= 0 (defaults to a)
    double epsilon = 0.0;    // bequest weight, >= 0 (must be 0 on the Heston path)
    double T = 0.0;          // horizon in years, > 0
    double t0 = 0.0;         // start time, in [0, T)
    double x0 = 1.0;         // initial wealth, > 0
    double y0 = 0.0;         // initial variance, >= 0
};

// Throws InvalidParams when a raw invariant fails.
void check_raw(const ModelParams& p);

// Everything the closed form needs that is pinned by the raw inputs. The EIS
// psi is never user-supplied: it is a function of (gamma, a, rho).
struct DerivedConstants {
    double psi = 0.0;     // elasticity of intertemporal substitution
    double phi = 0.0;     // 1/psi
    double theta = 0.0;   // (1-gamma)/(1-phi); equals k*psi
    double k = 0.0;       // ansatz exponent
    double zeta = 0.0;    // -k/theta
    double b = 0.0;       // Riccati constant, > 0 for gamma > 1
    double kappa = 0.0;   // m - ((1-gamma-a)/(gamma+a)) rho lambda_bar beta_bar
    double d = 0.0;       // sqrt(kappa^2 + 2 b beta_bar^2)
    double K_pi = 0.0;    // upper bound of the optimal portfolio fraction
    double b_tilde = 0.0; // b + ((2 gamma - 1)/2 + a1) K_pi^2
};

DerivedConstants derive_constants(const ModelParams& p);

enum class Assumption31Case { a, b, c, d, violated };

const char* to_string(Assumption31Case c);

// Classifies (gamma, psi) into one of the four admissible cases, or reports
// `violated`. Violation is a return value, not an error.
Assumption31Case validate_assumption31(double gamma, double psi);

struct ValidationReport {
    Assumption31Case assumption31_case = Assumption31Case::violated;
    bool assumption32_ok = false; // k*psi == theta identity, k-denominator sane
    bool h1_ok = false;
    bool h2_ok = false;
    bool h3_ok = false;
    bool epsilon_ok = false; // epsilon == 0 required on the Heston path
    double h1_slack = 0.0;   // min{k+2, 1/q+1} - gamma
    double h2_slack = 0.0;   // m - max{...}
    double h3_slack = 0.0;   // rhs - lhs
    std::vector<std::string> messages;

    bool all_ok() const;
};

// Checks (H1)-(H3) plus the Heston-path preconditions. q is the oversampling
// exponent in (H1); it must exceed 2.
ValidationReport validate_heston(const ModelParams& p, const DerivedConstants& c, double q = 2.01);

// Gate used by solver entry points: throws InvalidParams unless the report
// passes outright.
void require_heston_valid(const ModelParams& p, const DerivedConstants& c, double q = 2.01);

} // namespace rheston
