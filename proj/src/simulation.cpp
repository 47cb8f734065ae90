#include "rheston/simulation.hpp"

#include <istream>
#include <numeric>
#include <ostream>

namespace rheston {

namespace {

struct FnPolicy {
    const StrategyFns* fns;

    ControlPoint operator()(double t, double ln_x, double y) const {
        const double x = std::exp(ln_x);
        ControlPoint cp;
        cp.cx = fns->cx(t, y);
        cp.pi = fns->pi(t, y);
        const auto v = fns->v(t, x, y);
        cp.v1x = v[0] * x;
        cp.v2 = v[1];
        if (fns->reward_rate) cp.reward_rate = fns->reward_rate(t, x, y);
        if (fns->w_grad) {
            const auto g = fns->w_grad(t, x, y);
            cp.wx_x = g[0] * x;
            cp.w_y = g[1];
        }
        return cp;
    }
};

McEstimate summarize(const std::vector<double>& values, bool antithetic) {
    McEstimate est;
    if (antithetic) {
        const std::size_t n = values.size() / 2;
        est.n_effective = n;
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += 0.5 * (values[2 * i] + values[2 * i + 1]);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = 0.5 * (values[2 * i] + values[2 * i + 1]) - mean;
            ss += d * d;
        }
        est.mean = mean;
        est.standard_error =
            n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    } else {
        const std::size_t n = values.size();
        est.n_effective = n;
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                            static_cast<double>(n);
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        est.mean = mean;
        est.standard_error =
            n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    }
    return est;
}

template <class T>
void write_raw(std::ostream& os, const T& value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <class T>
void read_raw(std::istream& is, T& value) {
    is.read(reinterpret_cast<char*>(&value), sizeof value);
}

} // namespace

PathBundle simulate_paths(const SimConfig& cfg, const StrategyFns& fns, const ModelParams& p,
                          const DerivedConstants& c, bool parallel) {
    return simulate_paths(cfg, FnPolicy{&fns}, p, c, parallel);
}

OptimalPolicy::OptimalPolicy(const GSurface& surf, const ModelParams& p,
                             const DerivedConstants& c)
    : surf_(&surf) {
    dpsi_ = std::pow(p.delta, c.psi);
    dpsi_m1_ = std::pow(p.delta, c.psi - 1.0);
    myopic_ = p.lambda_bar / (p.gamma + p.a);
    hedge_ = (1.0 - p.gamma - p.a) * c.k * p.beta_bar * p.rho /
             ((p.gamma + p.a) * (1.0 - p.gamma));
    v2_coef_ = p.a * c.k / (p.gamma - 1.0);
    a_ = p.a;
    k_ = c.k;
    one_minus_gamma_ = 1.0 - p.gamma;
    inv_one_minus_gamma_ = 1.0 / (1.0 - p.gamma);
    f_coef_ = p.delta * c.theta / (1.0 - p.gamma);
    rho_beta_ = p.rho * p.beta_bar;
    beta2_ortho_ = p.beta_bar * p.beta_bar * (1.0 - p.rho * p.rho);
}

namespace {

// Kept out of line so the per-path loop calls the same scalar pow as
// value_function; the zero-horizon estimate is then bit-identical to it.
[[gnu::noinline]] double terminal_value(const GQuadratureRow& row, double x, double y,
                                        double gamma, double k, bool at_horizon) {
    const double g = at_horizon ? 0.0 : row.eval(y).g;
    return std::pow(x, 1.0 - gamma) * std::pow(g, k) / (1.0 - gamma);
}

} // namespace

McEstimate feynman_kac_estimate(const PathBundle& bundle, const ModelParams& p,
                                const DerivedConstants& c, int quadrature_n) {
    const GQuadratureRow row(bundle.t_end, c, p, quadrature_n);
    const bool at_horizon = bundle.t_end == p.T;
    std::vector<double> values(bundle.n_paths);
    for (std::size_t i = 0; i < bundle.n_paths; ++i) {
        values[i] = bundle.running_reward[i] +
                    terminal_value(row, bundle.x_terminal[i], bundle.y_terminal[i], p.gamma, c.k,
                                   at_horizon);
    }
    return summarize(values, bundle.antithetic);
}

McEstimate martingale_diagnostic(const PathBundle& bundle) {
    return summarize(bundle.stoch_integral, bundle.antithetic);
}

double cir_mean(double y0, double t, double s, const ModelParams& p) {
    const double decay = std::exp(-p.m * (s - t));
    return y0 * decay + (p.nu / p.m) * (1.0 - decay);
}

McEstimate checkpoint_mean_y(const PathBundle& bundle, std::size_t checkpoint_index) {
    return summarize(bundle.y_at_checkpoint.at(checkpoint_index), bundle.antithetic);
}

void write_path_dump(std::ostream& os, const PathBundle& bundle) {
    if (bundle.x_paths.empty())
        throw InvalidParams("write_path_dump: bundle was simulated without store_paths");
    os.write("RZEH", 4);
    write_raw(os, std::uint32_t{1});
    write_raw(os, static_cast<std::uint64_t>(bundle.n_paths));
    write_raw(os, static_cast<std::uint64_t>(bundle.n_steps));
    write_raw(os, bundle.dt);
    const std::size_t row = bundle.n_steps + 1;
    for (std::size_t i = 0; i < bundle.n_paths; ++i) {
        os.write(reinterpret_cast<const char*>(bundle.x_paths.data() + i * row),
                 static_cast<std::streamsize>(row * sizeof(double)));
        os.write(reinterpret_cast<const char*>(bundle.y_paths.data() + i * row),
                 static_cast<std::streamsize>(row * sizeof(double)));
    }
}

PathDumpHeader read_path_dump_header(std::istream& is) {
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::string_view(magic, 4) != "RZEH")
        throw ConfigError("path dump: bad magic");
    PathDumpHeader h;
    read_raw(is, h.version);
    read_raw(is, h.n_paths);
    read_raw(is, h.n_steps);
    read_raw(is, h.dt);
    if (!is) throw ConfigError("path dump: truncated header");
    return h;
}

} // namespace rheston
