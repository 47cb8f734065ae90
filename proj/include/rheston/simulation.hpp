#pragma once

#include "rheston/closed_form.hpp"
#include "rheston/errors.hpp"
#include "rheston/params.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

namespace rheston {

struct SimConfig {
    std::size_t n_paths = 10000;
    double dt = 1e-3; // must divide t_end - t_start
    std::uint64_t seed = 42;
    double t_start = 0.0;
    double t_end = 0.0;
    bool antithetic = false;
    std::vector<double> checkpoints; // times at which X, Y snapshots are kept
    bool store_paths = false;        // full trajectories; memory-heavy
    double cx_bound_K = std::numeric_limits<double>::quiet_NaN(); // default (1/2) nu b T
    double admissibility_tol = 1e-9;
};

// One Monte Carlo sweep. Per-path quantities are indexed by path so that the
// parallel and serial kernels produce bit-identical bundles.
struct PathBundle {
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    double dt = 0.0;
    double t_start = 0.0, t_end = 0.0;
    bool antithetic = false;
    bool feller_ok = false; // 2 nu >= beta_bar^2, reported not enforced

    std::vector<double> x_terminal;
    std::vector<double> y_terminal;
    std::vector<double> running_reward;  // accumulated (f + penalty) dt
    std::vector<double> stoch_integral;  // accumulated grad(w)' Lambda dB
    std::vector<std::uint64_t> path_seeds;

    std::vector<double> checkpoint_times;
    std::vector<std::vector<double>> x_at_checkpoint; // [checkpoint][path]
    std::vector<std::vector<double>> y_at_checkpoint;

    // Only filled when store_paths is set: path-major rows of n_steps+1 values.
    std::vector<double> x_paths;
    std::vector<double> y_paths;
};

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n_effective = 0;
};

// Controls and functionals evaluated along a path at one state. The wealth
// channels are wealth-scaled (v1x = v1 * x, wx_x = w_x * x) because only the
// products enter the dynamics; reward_rate and the w-gradient feed the
// running-reward and stochastic-integral accumulators.
struct ControlPoint {
    double cx = 0.0;
    double pi = 0.0;
    double v1x = 0.0; // v1 * x; equals -a1 for admissible distortions
    double v2 = 0.0;
    double reward_rate = 0.0;
    double wx_x = 0.0; // w_x * x
    double w_y = 0.0;
};

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

struct GaussPair {
    double z1, z2;
};

// Box-Muller from two engine words. Pinning the transform here (instead of
// std::normal_distribution) keeps path draws bit-identical across standard
// libraries, which the determinism contract relies on.
inline GaussPair gauss_pair(std::mt19937_64& rng) {
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;        // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.28318530717958647692529 * u2;
    return {r * std::cos(angle), r * std::sin(angle)};
}

namespace detail {

struct KernelScalars {
    double sqrt_dt, rho, rho_ortho, lambda_bar, beta_bar, r, nu, m, a1, T;
    double K_pi, cx_K, b, tol;
    const double* inv_horizon; // 1/(T - t_i) per step, hoisted out of the path loop
};

// Euler-Maruyama with full truncation for the variance and log coordinates
// for wealth. `sign` flips the Gaussian draws for antithetic partners.
template <class Policy>
void advance_path(const SimConfig& cfg, const KernelScalars& ks, const Policy& policy,
                  std::mt19937_64& rng, double sign, std::size_t n_steps, std::size_t path_index,
                  PathBundle& out) {
    double ln_x = std::log(out.x_terminal[path_index]); // seeded with x0
    double y_raw = out.y_terminal[path_index];
    double reward = 0.0, integral = 0.0;
    std::size_t next_ck = 0;

    auto store_checkpoints_at = [&](std::size_t step) {
        while (next_ck < out.checkpoint_times.size()) {
            const double ck = out.checkpoint_times[next_ck];
            const std::size_t ck_step = static_cast<std::size_t>(
                std::llround((ck - cfg.t_start) / cfg.dt));
            if (ck_step != step) break;
            out.x_at_checkpoint[next_ck][path_index] = std::exp(ln_x);
            out.y_at_checkpoint[next_ck][path_index] = std::max(y_raw, 0.0);
            ++next_ck;
        }
    };
    auto store_path_node = [&](std::size_t step) {
        if (!cfg.store_paths) return;
        const std::size_t base = path_index * (n_steps + 1);
        out.x_paths[base + step] = std::exp(ln_x);
        out.y_paths[base + step] = std::max(y_raw, 0.0);
    };

    store_checkpoints_at(0);
    store_path_node(0);

    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = cfg.t_start + static_cast<double>(i) * cfg.dt;
        const double y = std::max(y_raw, 0.0);
        const ControlPoint cp = policy(t, ln_x, y);

        const double cx_bound = ks.inv_horizon[i] + ks.b * y + ks.cx_K;
        if (!(cp.pi >= -ks.tol && cp.pi <= ks.K_pi + ks.tol))
            throw AdmissibilityViolation("pi outside [0, K_pi]");
        if (!(cp.cx >= -ks.tol && cp.cx <= cx_bound + ks.tol))
            throw AdmissibilityViolation("c/x outside the admissible band");
        if (!(std::abs(cp.v1x + ks.a1) <= ks.tol * (1.0 + ks.a1)))
            throw AdmissibilityViolation("v1 must equal -a1/x");
        if (!(cp.v2 <= ks.tol))
            throw AdmissibilityViolation("v2 must be nonpositive");

        const GaussPair z = gauss_pair(rng);
        const double dB = ks.sqrt_dt * sign * z.z1;
        const double dWy = ks.rho * dB + ks.rho_ortho * ks.sqrt_dt * sign * z.z2;
        const double sqrt_y = std::sqrt(y);

        reward += cp.reward_rate * cfg.dt;
        integral += cp.wx_x * cp.pi * sqrt_y * dB + cp.w_y * ks.beta_bar * sqrt_y * dWy;

        ln_x += (ks.r + cp.pi * ks.lambda_bar * y - cp.cx + cp.pi * cp.pi * cp.v1x * y +
                 cp.pi * ks.rho * ks.beta_bar * cp.v2 * y - 0.5 * cp.pi * cp.pi * y) *
                    cfg.dt +
                cp.pi * sqrt_y * dB;
        y_raw += (ks.nu - ks.m * y + ks.rho * ks.beta_bar * cp.pi * cp.v1x * y +
                  ks.beta_bar * ks.beta_bar * cp.v2 * y) *
                     cfg.dt +
                 ks.beta_bar * sqrt_y * dWy;

        store_checkpoints_at(i + 1);
        store_path_node(i + 1);
    }

    out.x_terminal[path_index] = std::exp(ln_x);
    out.y_terminal[path_index] = std::max(y_raw, 0.0);
    out.running_reward[path_index] = reward;
    out.stoch_integral[path_index] = integral;
}

} // namespace detail

// Core Monte Carlo kernel; Policy is any callable
//   ControlPoint operator()(double t, double ln_x, double y) const.
// Paths are seeded as hash(seed, index); with antithetic sampling, paths 2p
// and 2p+1 share a generator with mirrored draws. Parallel execution must
// match the serial reference bit for bit.
template <class Policy>
PathBundle simulate_paths(const SimConfig& cfg, const Policy& policy, const ModelParams& p,
                          const DerivedConstants& c, bool parallel = true) {
    if (cfg.n_paths == 0) throw InvalidParams("simulate_paths: n_paths must be >= 1");
    if (!(cfg.dt > 0.0) || cfg.dt > 1e-2) throw InvalidParams("simulate_paths: dt must lie in (0, 1e-2]");
    if (cfg.t_end < cfg.t_start) throw InvalidParams("simulate_paths: t_end < t_start");
    if (cfg.antithetic && cfg.n_paths % 2 != 0)
        throw InvalidParams("simulate_paths: antithetic sampling needs an even path count");
    const double span = cfg.t_end - cfg.t_start;
    const double steps_real = span / cfg.dt;
    const auto n_steps = static_cast<std::size_t>(std::llround(steps_real));
    if (std::abs(steps_real - static_cast<double>(n_steps)) > 1e-6)
        throw InvalidParams("simulate_paths: (t_end - t_start)/dt must be an integer");

    detail::KernelScalars ks;
    ks.sqrt_dt = std::sqrt(cfg.dt);
    ks.rho = p.rho;
    ks.rho_ortho = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
    ks.lambda_bar = p.lambda_bar;
    ks.beta_bar = p.beta_bar;
    ks.r = p.r;
    ks.nu = p.nu;
    ks.m = p.m;
    ks.a1 = p.a1;
    ks.T = p.T;
    ks.K_pi = c.K_pi;
    ks.b = c.b;
    ks.cx_K = std::isnan(cfg.cx_bound_K) ? 0.5 * p.nu * c.b * p.T : cfg.cx_bound_K;
    ks.tol = cfg.admissibility_tol;
    std::vector<double> inv_horizon(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i)
        inv_horizon[i] = 1.0 / (p.T - (cfg.t_start + static_cast<double>(i) * cfg.dt));
    ks.inv_horizon = inv_horizon.data();

    PathBundle out;
    out.n_paths = cfg.n_paths;
    out.n_steps = n_steps;
    out.dt = cfg.dt;
    out.t_start = cfg.t_start;
    out.t_end = cfg.t_end;
    out.antithetic = cfg.antithetic;
    out.feller_ok = 2.0 * p.nu >= p.beta_bar * p.beta_bar;
    out.x_terminal.assign(cfg.n_paths, p.x0);
    out.y_terminal.assign(cfg.n_paths, p.y0);
    out.running_reward.assign(cfg.n_paths, 0.0);
    out.stoch_integral.assign(cfg.n_paths, 0.0);
    out.path_seeds.resize(cfg.n_paths);
    out.checkpoint_times = cfg.checkpoints;
    for (double ck : out.checkpoint_times) {
        const double steps = (ck - cfg.t_start) / cfg.dt;
        if (ck < cfg.t_start || ck > cfg.t_end ||
            std::abs(steps - std::llround(steps)) > 1e-6)
            throw InvalidParams("simulate_paths: checkpoint off the step grid");
    }
    out.x_at_checkpoint.assign(out.checkpoint_times.size(),
                               std::vector<double>(cfg.n_paths, 0.0));
    out.y_at_checkpoint.assign(out.checkpoint_times.size(),
                               std::vector<double>(cfg.n_paths, 0.0));
    if (cfg.store_paths) {
        out.x_paths.assign(cfg.n_paths * (n_steps + 1), 0.0);
        out.y_paths.assign(cfg.n_paths * (n_steps + 1), 0.0);
    }

    const std::size_t n_units = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
    // Exceptions from worker iterations are stashed and rethrown.
    std::exception_ptr error = nullptr;

    auto run_unit = [&](std::size_t u) {
        const std::uint64_t ps = path_seed(cfg.seed, u);
        if (cfg.antithetic) {
            out.path_seeds[2 * u] = ps;
            out.path_seeds[2 * u + 1] = ps;
            std::mt19937_64 rng(ps);
            detail::advance_path(cfg, ks, policy, rng, +1.0, n_steps, 2 * u, out);
            std::mt19937_64 rng2(ps);
            detail::advance_path(cfg, ks, policy, rng2, -1.0, n_steps, 2 * u + 1, out);
        } else {
            out.path_seeds[u] = ps;
            std::mt19937_64 rng(ps);
            detail::advance_path(cfg, ks, policy, rng, +1.0, n_steps, u, out);
        }
    };

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long long u = 0; u < static_cast<long long>(n_units); ++u) {
            try {
                run_unit(static_cast<std::size_t>(u));
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
    } else {
        for (std::size_t u = 0; u < n_units; ++u) run_unit(u);
    }
    if (error) std::rethrow_exception(error);
    return out;
}

template <class Policy>
PathBundle simulate_paths_serial(const SimConfig& cfg, const Policy& policy,
                                 const ModelParams& p, const DerivedConstants& c) {
    return simulate_paths(cfg, policy, p, c, /*parallel=*/false);
}

// std::function-based control set for callers that do not need the inlined
// hot path.
struct StrategyFns {
    std::function<double(double, double)> cx;
    std::function<double(double, double)> pi;
    std::function<std::array<double, 2>(double, double, double)> v;
    std::function<double(double, double, double)> reward_rate;          // optional
    std::function<std::array<double, 2>(double, double, double)> w_grad; // optional
};

PathBundle simulate_paths(const SimConfig& cfg, const StrategyFns& fns, const ModelParams& p,
                          const DerivedConstants& c, bool parallel = true);

// Closed-form optimal controls, worst-case distortion, running reward
// f(c*, w) + penalty and the w-gradient, all served from a GSurface table.
class OptimalPolicy {
  public:
    OptimalPolicy(const GSurface& surf, const ModelParams& p, const DerivedConstants& c);

    ControlPoint operator()(double t, double ln_x, double y) const {
        const GSurface::Point pt = surf_->lookup(t, y);
        ControlPoint cp;
        cp.cx = dpsi_ / pt.g;
        cp.pi = myopic_ + hedge_ * pt.gy_over_g;
        cp.v1x = -a_;
        cp.v2 = v2_coef_ * pt.gy_over_g;
        // w_core = x^{1-gamma} g^{k-1}, one exp for every wealth-scaled output
        const double w_core = std::exp(one_minus_gamma_ * ln_x + (k_ - 1.0) * pt.ln_g);
        const double wg = w_core * pt.g; // = (1-gamma) w
        const double w = wg * inv_one_minus_gamma_;
        cp.wx_x = wg;
        cp.w_y = k_ * pt.gy_over_g * w;
        // f(c*, w) = (delta theta/(1-gamma)) x^{1-gamma} (delta^{psi-1} g^{k-1} - g^k)
        cp.reward_rate = f_coef_ * (dpsi_m1_ * w_core - wg);
        if (a_ > 0.0) {
            const double hv = one_minus_gamma_ * cp.pi + k_ * rho_beta_ * pt.gy_over_g;
            const double quad =
                hv * hv + k_ * k_ * beta2_ortho_ * pt.gy_over_g * pt.gy_over_g;
            cp.reward_rate += 0.5 * a_ * w * y * inv_one_minus_gamma_ * quad;
        }
        return cp;
    }

  private:
    const GSurface* surf_;
    double dpsi_, dpsi_m1_, myopic_, hedge_, v2_coef_, a_, k_;
    double one_minus_gamma_, inv_one_minus_gamma_, f_coef_, rho_beta_, beta2_ortho_;
};

// pi = 0, c = 0, v = 0: wealth grows at the riskless rate, variance is plain
// CIR. Used by moment checks and degenerate-case tests.
struct ZeroControlPolicy {
    ControlPoint operator()(double, double, double) const { return {}; }
};

// Feynman-Kac consistency estimator: running reward plus the closed-form
// value at the truncation time, averaged over paths (pairs when antithetic).
McEstimate feynman_kac_estimate(const PathBundle& bundle, const ModelParams& p,
                                const DerivedConstants& c, int quadrature_n = 512);

// Mean and standard error of the accumulated stochastic integral; zero in
// expectation when the integral is a true martingale.
McEstimate martingale_diagnostic(const PathBundle& bundle);

// E[Y_s | Y_t = y0] for the undistorted square-root process.
double cir_mean(double y0, double t, double s, const ModelParams& p);

McEstimate checkpoint_mean_y(const PathBundle& bundle, std::size_t checkpoint_index);

// Binary dump of stored trajectories: header {magic "RZEH", version u32,
// n_paths u64, n_steps u64, dt f64}, then per path the X row followed by the
// Y row, little-endian 64-bit floats.
void write_path_dump(std::ostream& os, const PathBundle& bundle);

struct PathDumpHeader {
    std::uint32_t version = 0;
    std::uint64_t n_paths = 0;
    std::uint64_t n_steps = 0;
    double dt = 0.0;
};

PathDumpHeader read_path_dump_header(std::istream& is);

} // namespace rheston
