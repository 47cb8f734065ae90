// Timings of the OpenMP kernels against their serial reference paths:
// Monte Carlo path sweep, g-surface construction and the HJBI residual grid.

#include "rheston/closed_form.hpp"
#include "rheston/params.hpp"
#include "rheston/simulation.hpp"
#include "rheston/verification.hpp"

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace rheston;

namespace {

ModelParams benchmark_params() {
    ModelParams p;
    p.gamma = 1.4;
    p.delta = 0.08;
    p.rho = -0.5;
    p.r = 0.05;
    p.lambda_bar = 0.07 / 0.0225;
    p.m = 5.0;
    p.nu = 0.1125;
    p.beta_bar = 0.25;
    p.a = 0.1;
    p.a1 = 0.1;
    p.T = 10.0;
    p.x0 = 1.0;
    p.y0 = 0.0225;
    return p;
}

template <class F>
double time_seconds(F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-22s serial %8.3f s   parallel %8.3f s   speedup %.2fx\n", name, serial,
                parallel, serial / parallel);
}

} // namespace

int main() {
    const ModelParams p = benchmark_params();
    const DerivedConstants c = derive_constants(p);

#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both columns run the serial path\n");
#endif

    const GSurface surf = build_g_surface(c, p, 512, 256, 0.0, p.T - 0.01, 1.0);

    {
        SimConfig cfg;
        cfg.n_paths = 20000;
        cfg.dt = 1e-3;
        cfg.seed = 7;
        cfg.t_start = 0.0;
        cfg.t_end = 1.0;
        const OptimalPolicy policy(surf, p, c);
        PathBundle serial_bundle, parallel_bundle;
        const double ts =
            time_seconds([&] { serial_bundle = simulate_paths(cfg, policy, p, c, false); });
        const double tp =
            time_seconds([&] { parallel_bundle = simulate_paths(cfg, policy, p, c, true); });
        report("simulate_paths", ts, tp);
        if (serial_bundle.x_terminal != parallel_bundle.x_terminal ||
            serial_bundle.stoch_integral != parallel_bundle.stoch_integral) {
            std::printf("MISMATCH: parallel path sweep differs from serial reference\n");
            return 1;
        }
    }

    {
        GSurface a, b;
        const double ts =
            time_seconds([&] { a = build_g_surface(c, p, 512, 256, 0.0, p.T - 0.01, 1.0, 512, false); });
        const double tp =
            time_seconds([&] { b = build_g_surface(c, p, 512, 256, 0.0, p.T - 0.01, 1.0, 512, true); });
        report("build_g_surface", ts, tp);
        for (std::size_t i = 0; i < a.nt(); ++i)
            for (std::size_t j = 0; j < a.ny(); ++j)
                if (a.g_node(i, j) != b.g_node(i, j)) {
                    std::printf("MISMATCH: parallel surface differs from serial reference\n");
                    return 1;
                }
    }

    {
        ResidualGridResult rs, rp;
        const double ts = time_seconds(
            [&] { rs = hjbi_residual_grid(p, c, 0.0, 9.5, 24, 0.005, 0.09, 24, 1.0, false); });
        const double tp = time_seconds(
            [&] { rp = hjbi_residual_grid(p, c, 0.0, 9.5, 24, 0.005, 0.09, 24, 1.0, true); });
        report("hjbi_residual_grid", ts, tp);
        if (rs.max_normalized != rp.max_normalized) {
            std::printf("MISMATCH: parallel residual grid differs from serial reference\n");
            return 1;
        }
    }
    return 0;
}
