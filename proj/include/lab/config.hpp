#pragma once

// Experiment configuration: flat key = value text with optional [section]
// headers, one experiment per file. Unknown keys are rejected and every
// violation names the offending field.

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "lab/extension.hpp"

namespace lab {

struct ExperimentConfig {
    std::string kind;  // identities | decay | rescale | kakeya | bg | acs | bl
    int n = 2;
    int k = 2;
    int K = 8;
    double R = 16.0;
    RVec deltas = {0.25, 0.125, 0.0625, 0.03125};
    double nu = 0.05;
    double c = 0.01;
    QuadratureSpec quad{0, QuadratureSpec::Rule::gauss_legendre, 8.0};
    int64_t samples = 1000000;
    int tubes_per_family = 50;
    uint64_t seed = 1;
    int workers = 0;  // 0 = hardware default
    std::string out_dir = "out";
    int trials = 10000;
    int size = 6;  // acs matrix dimension (even)
    double sigma = 0.0;  // gaussian amplitude width; 0 = per-dimension default
    RVec t_values;  // empty = per-n default
    int instances = 50;
    std::vector<int> K_list;  // bg sweep; empty = {K}
    int bg_exact_pairs = 0;   // comparability subsample size (exact mode)
    int narrow_cap_max = 10;
    double epsilon_max = 0.3;  // kakeya sweep assertion; <= 0 disables
    std::string surface_file;
    std::string seed_source = "config";
};

inline RVec default_t_values(int n) {
    // geometric ladder, ratio 1.5, truncated by the per-dimension |w| budget
    RVec ts = {8, 12, 18, 27, 40, 60, 91, 128};
    const double cap = n <= 2 ? 256.0 : 64.0;
    RVec out;
    for (double t : ts)
        if (t <= cap) out.push_back(t);
    return out;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline RVec parse_list(const std::string& v, const std::string& key) {
    RVec out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        size_t used = 0;
        const double x = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("config: bad number in " + key + ": " + item);
        out.push_back(x);
    }
    return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue;  // section headers are organizational
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        try {
            if (key == "kind") cfg.kind = val;
            else if (key == "n") cfg.n = std::stoi(val);
            else if (key == "k") cfg.k = std::stoi(val);
            else if (key == "K") cfg.K = std::stoi(val);
            else if (key == "R") cfg.R = std::stod(val);
            else if (key == "deltas") cfg.deltas = detail::parse_list(val, key);
            else if (key == "nu") cfg.nu = std::stod(val);
            else if (key == "c") cfg.c = std::stod(val);
            else if (key == "quad_points") cfg.quad.points_per_axis = std::stoi(val);
            else if (key == "quad_rule") {
                if (val == "midpoint") cfg.quad.rule = QuadratureSpec::Rule::midpoint;
                else if (val == "gauss-legendre") cfg.quad.rule = QuadratureSpec::Rule::gauss_legendre;
                else throw std::invalid_argument("config: quad_rule must be midpoint or gauss-legendre");
            } else if (key == "nyquist") cfg.quad.nyquist_factor = std::stod(val);
            else if (key == "samples") cfg.samples = std::stoll(val);
            else if (key == "tubes_per_family") cfg.tubes_per_family = std::stoi(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "workers") cfg.workers = std::stoi(val);
            else if (key == "out_dir") cfg.out_dir = val;
            else if (key == "trials") cfg.trials = std::stoi(val);
            else if (key == "size") cfg.size = std::stoi(val);
            else if (key == "sigma") cfg.sigma = std::stod(val);
            else if (key == "t_values") cfg.t_values = detail::parse_list(val, key);
            else if (key == "instances") cfg.instances = std::stoi(val);
            else if (key == "K_list") {
                cfg.K_list.clear();
                for (double x : detail::parse_list(val, key)) cfg.K_list.push_back(static_cast<int>(x));
            } else if (key == "bg_exact_pairs") cfg.bg_exact_pairs = std::stoi(val);
            else if (key == "narrow_cap_max") cfg.narrow_cap_max = std::stoi(val);
            else if (key == "epsilon_max") cfg.epsilon_max = std::stod(val);
            else if (key == "surface_file") cfg.surface_file = val;
            else throw std::invalid_argument("config: unknown key: " + key);
        } catch (const std::exception& e) {
            if (std::string(e.what()).rfind("config:", 0) == 0) throw;
            throw std::invalid_argument("config: bad value for " + key + ": " + val);
        }
    }
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config: cannot open " + path);
    return parse_config(is);
}

// Pure validation; each violation names the field.
inline std::vector<std::string> validate(const ExperimentConfig& cfg) {
    std::vector<std::string> v;
    static const std::set<std::string> kinds = {"identities", "decay", "rescale", "kakeya", "bg", "acs", "bl"};
    if (!kinds.count(cfg.kind)) v.push_back("kind: must be one of identities|decay|rescale|kakeya|bg|acs|bl");
    if (cfg.n < 2 || cfg.n > 6) v.push_back("n: must be in [2, 6]");
    if (cfg.kind == "kakeya" || cfg.kind == "bg") {
        if (cfg.k < 2 || cfg.k > cfg.n) v.push_back("k: must satisfy 2 <= k <= n");
    }
    for (double d : cfg.deltas)
        if (!(d > 0.0 && d <= 1.0)) v.push_back("deltas: each delta must lie in (0, 1]");
    if (!(cfg.nu >= 0.0 && cfg.nu <= 0.5)) v.push_back("nu: must lie in [0, 0.5]");
    if (!(cfg.c > 0.0)) v.push_back("c: must be positive");
    if (!(cfg.quad.nyquist_factor >= 4.0)) v.push_back("nyquist: must be >= 4");
    if (cfg.quad.points_per_axis < 0) v.push_back("quad_points: must be >= 0");
    if (cfg.workers < 0) v.push_back("workers: must be >= 0");
    if (cfg.kind == "kakeya" && cfg.samples < 10000) v.push_back("samples: kakeya needs at least 1e4");
    if (cfg.kind == "kakeya" && cfg.tubes_per_family < 1) v.push_back("tubes_per_family: must be >= 1");
    if (cfg.kind == "bg") {
        std::vector<int> ks = cfg.K_list.empty() ? std::vector<int>{cfg.K} : cfg.K_list;
        for (int kk : ks) {
            if (kk < 4) v.push_back("K: must be >= 4");
            if (std::pow(kk, 2 * cfg.n - 2) > 1e4) v.push_back("K: cap budget K^{2n-2} <= 1e4 exceeded");
            const double r = cfg.R < kk ? 2.0 * kk : cfg.R;  // per-K default handled by the runner
            if (std::pow(r / kk, 2 * cfg.n) > 1e4) v.push_back("R: box budget (R/K)^{2n} <= 1e4 exceeded");
        }
    }
    if (cfg.kind == "decay") {
        if (cfg.n > 3) v.push_back("n: decay budget admits n in {2, 3}");
        const double cap = cfg.n <= 2 ? 256.0 : 64.0;
        const RVec ts = cfg.t_values.empty() ? default_t_values(cfg.n) : cfg.t_values;
        for (double t : ts)
            if (!(t > 0.0 && t <= cap))
                v.push_back("t_values: |w| budget is 256 at n=2 and 64 at n=3");
        if (ts.size() < 6) v.push_back("t_values: need at least 6 magnitudes for the fit");
    }
    if (cfg.sigma < 0.0) v.push_back("sigma: must be nonnegative (0 = default width)");
    if (cfg.kind == "bl" || cfg.kind == "acs") {
        if (cfg.trials < 1) v.push_back("trials: must be >= 1");
    }
    if (cfg.kind == "acs") {
        if (cfg.size < 2 || cfg.size % 2 != 0) v.push_back("size: must be a positive even dimension");
        if (cfg.size > 16) v.push_back("size: budget admits size <= 16");
    }
    if (cfg.kind == "rescale" && cfg.instances < 1) v.push_back("instances: must be >= 1");
    return v;
}

}  // namespace lab
