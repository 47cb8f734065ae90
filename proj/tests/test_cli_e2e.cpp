// End-to-end checks of the CLI surface: exit codes, solve-surface bounds and
// tolerance knobs. The CLI binary path arrives as argv[1].

#include "rheston/csv.hpp"
#include "rheston/params.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void expect(bool ok, const std::string& what) {
    std::printf("%s: %s\n", ok ? "ok" : "FAILED", what.c_str());
    if (!ok) ++g_failures;
}

int exit_code(const std::string& cmd) {
    const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kBenchmark = R"(gamma      = 1.4
delta      = 0.08
rho        = -0.5
r          = 0.05
lambda_bar = 3.1111111111111112
m          = 5.0
nu         = 0.1125
beta_bar   = 0.25
a          = 0.0
T          = 10.0
x0         = 1.0
y0         = 0.0225
)";

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: cli_tests <path-to-cli>\n");
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path work = fs::temp_directory_path() / "rheston_cli_e2e";
    fs::create_directories(work);

    const fs::path good_cfg = work / "good.cfg";
    write_file(good_cfg, kBenchmark);
    const fs::path h1_cfg = work / "h1fail.cfg";
    {
        std::string text = kBenchmark; // same calibration with gamma = 3.5
        text.replace(text.find("1.4"), 3, "3.5");
        write_file(h1_cfg, text);
    }
    const fs::path bad_cfg = work / "bad.cfg";
    write_file(bad_cfg, "gamma == 1.4\n");

    expect(exit_code(cli + " --config " + good_cfg.string() + " validate") == 0,
           "validate exits 0 on the benchmark config");
    expect(exit_code(cli + " --config " + h1_cfg.string() + " validate") == 1,
           "validate exits 1 when H1 fails");
    expect(exit_code(cli + " --config " + (work / "missing.cfg").string() + " validate") == 2,
           "validate exits 2 on a missing config");
    expect(exit_code(cli + " --config " + bad_cfg.string() + " validate") == 2,
           "validate exits 2 on a malformed config");
    expect(exit_code(cli + " --config " + h1_cfg.string() + " --out " + work.string() +
                     " solve") == 1,
           "solve refuses to run without validation");

    // one solve row: the allocation sits inside [myopic, K_pi]
    {
        const int rc = exit_code(cli + " --config " + good_cfg.string() + " --out " +
                                 work.string() + " --quiet solve --t 0 --grid-y 0.0225:0.0225:1");
        expect(rc == 0, "solve exits 0");
        const rheston::CsvTable table = rheston::parse_csv(slurp(work / "solve.csv"));
        expect(table.header.size() == 12 && table.rows.size() == 1, "solve emits one row");
        const double pi = table.rows[0][7];
        expect(pi >= 3.1111111111111112 / 1.4 && pi <= 2.2474747474747475,
               "pi_star row lies in [myopic, K_pi]");
        const double w = table.rows[0][9];
        expect(w < 0.0, "value level is negative for gamma > 1");
    }

    expect(exit_code(cli + " --config " + good_cfg.string() + " --out " + work.string() +
                     " --quiet verify") == 0,
           "verify exits 0 at the default tolerances");
    expect(exit_code(cli + " --config " + good_cfg.string() + " --out " + work.string() +
                     " --quiet verify --tol-ode 1e-15") == 1,
           "verify exits 1 when the tolerance sits below attainable accuracy");

    if (g_failures == 0) {
        std::printf("all CLI checks passed\n");
        return 0;
    }
    std::printf("%d CLI check(s) failed\n", g_failures);
    return 1;
}
