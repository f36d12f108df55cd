// lab: experiment runner CLI.
//
//   lab <kind> [--config FILE] [--workers N] [--out DIR] [--seed S]
//   lab acs [--size N] [--trials T] ...
//
// Exit codes: 0 all asserted checks pass, 1 assertion failure, 2 config error.

#include <iostream>

#include <CLI11.hpp>

#include "lab/runner.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    int workers = -1;
    std::string out_dir;
    long long seed = -1;
    int size = -1;
    int trials = -1;
};

int run_kind(const std::string& kind, const CommonOpts& opts) {
    lab::ExperimentConfig cfg;
    try {
        if (!opts.config_path.empty()) cfg = lab::parse_config_file(opts.config_path);
        if (cfg.kind.empty()) cfg.kind = kind;
        if (cfg.kind != kind) {
            std::cerr << "error: config kind '" << cfg.kind << "' does not match subcommand '" << kind << "'\n";
            return 2;
        }
        if (opts.workers >= 0) cfg.workers = opts.workers;
        if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
        if (opts.seed >= 0) cfg.seed = static_cast<uint64_t>(opts.seed);
        if (opts.size >= 0) cfg.size = opts.size;
        if (opts.trials >= 0) cfg.trials = opts.trials;

        const auto violations = lab::validate(cfg);
        if (!violations.empty()) {
            std::cerr << "invalid config:\n";
            for (const auto& v : violations) std::cerr << "  " << v << "\n";
            return 2;
        }
        const lab::RunReport rep = lab::run(cfg);
        std::cout << rep.report.dump(2) << "\n";
        return rep.pass ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical experiments for Fourier extension operators on complex hypersurfaces"};
    app.require_subcommand(1);

    const std::vector<std::string> kinds = {"identities", "decay", "rescale", "kakeya", "bg", "acs", "bl"};
    std::map<std::string, CommonOpts> opts;
    for (const std::string& kind : kinds) {
        auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        CommonOpts& o = opts[kind];
        sub->add_option("--config", o.config_path, "experiment config file (key = value)");
        sub->add_option("--workers", o.workers, "worker count (default: hardware)");
        sub->add_option("--out", o.out_dir, "output directory for report.json and CSVs");
        sub->add_option("--seed", o.seed, "seed override (LAB_SEED env wins over both)");
        if (kind == "acs") {
            sub->add_option("--size", o.size, "matrix dimension (even)");
            sub->add_option("--trials", o.trials, "number of random structures");
        }
        if (kind == "bl") sub->add_option("--trials", o.trials, "subspace samples per seed");
    }

    CLI11_PARSE(app, argc, argv);
    for (const std::string& kind : kinds)
        if (app.get_subcommand(kind)->parsed()) return run_kind(kind, opts[kind]);
    return 2;
}
