#include "rheston/config.hpp"

#include "rheston/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rheston {

namespace {

std::string_view trim(std::string_view s) {
    const char* ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

double parse_number(std::string_view key, std::string_view value) {
    // std::from_chars does not accept leading '+'; strtod handles all of the
    // usual decimal spellings.
    std::string tmp(value);
    char* end = nullptr;
    const double x = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || tmp.empty()) {
        throw ConfigError("config: value for '" + std::string(key) + "' is not a number: '" +
                          tmp + "'");
    }
    return x;
}

} // namespace

SolverConfig parse_config(std::string_view text) {
    std::map<std::string, double, std::less<>> values;
    size_t lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        }
        if (values.count(key)) {
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "'");
        }
        values[key] = parse_number(key, value);
    }

    static const std::set<std::string, std::less<>> known = {
        "gamma", "delta", "rho", "r", "lambda_bar", "m", "nu", "beta_bar",
        "a", "a1", "epsilon", "T", "t0", "x0", "y0", "q_exponent", "psi_expected"};
    for (const auto& [key, _] : values) {
        if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    }

    SolverConfig cfg;
    auto take = [&](const char* key, double* dst, bool required) {
        auto it = values.find(key);
        if (it == values.end()) {
            if (required) throw ConfigError("config: missing required key '" + std::string(key) + "'");
            return false;
        }
        *dst = it->second;
        return true;
    };

    ModelParams& p = cfg.params;
    take("gamma", &p.gamma, true);
    take("delta", &p.delta, true);
    take("rho", &p.rho, true);
    take("r", &p.r, true);
    take("lambda_bar", &p.lambda_bar, true);
    take("m", &p.m, true);
    take("nu", &p.nu, true);
    take("beta_bar", &p.beta_bar, true);
    take("a", &p.a, true);
    take("T", &p.T, true);
    take("y0", &p.y0, true);
    if (!take("a1", &p.a1, false)) p.a1 = p.a;
    take("epsilon", &p.epsilon, false);
    take("t0", &p.t0, false);
    take("x0", &p.x0, false);
    take("q_exponent", &cfg.q_exponent, false);
    if (auto it = values.find("psi_expected"); it != values.end()) cfg.psi_expected = it->second;

    check_raw(p);
    if (cfg.psi_expected) {
        const DerivedConstants c = derive_constants(p);
        const double err = std::abs(c.psi - *cfg.psi_expected) / std::max(1.0, std::abs(c.psi));
        if (err > 1e-10) {
            std::ostringstream msg;
            msg << "psi_expected = " << *cfg.psi_expected << " but (gamma, a, rho) pin psi = "
                << c.psi;
            throw InvalidParams(msg.str());
        }
    }
    return cfg;
}

SolverConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace rheston
