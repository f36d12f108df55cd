#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "lab/runner.hpp"

using namespace lab;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const auto dir = std::filesystem::temp_directory_path() / "lab_cli_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream os(path);
    os << body;
    return path.string();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LAB_BIN_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("sections and comments are organizational") {
        std::stringstream ss("[experiment]\nkind = kakeya  # a comment\nn = 2\nseed = 9\ndeltas = 0.25, 0.125\n");
        const ExperimentConfig cfg = parse_config(ss);
        CHECK(cfg.kind == "kakeya");
        CHECK(cfg.n == 2);
        CHECK(cfg.seed == 9);
        CHECK(cfg.deltas == RVec({0.25, 0.125}));
    }
    SUBCASE("unknown keys are rejected by name") {
        std::stringstream ss("kind = decay\nnonsense_key = 3\n");
        CHECK_THROWS_WITH_AS(parse_config(ss), doctest::Contains("nonsense_key"), std::invalid_argument);
    }
    SUBCASE("bad values are rejected by key") {
        std::stringstream ss("kind = decay\nn = banana\n");
        CHECK_THROWS_WITH_AS(parse_config(ss), doctest::Contains("n"), std::invalid_argument);
    }
    SUBCASE("missing equals sign") {
        std::stringstream ss("kind decay\n");
        CHECK_THROWS_AS(parse_config(ss), std::invalid_argument);
    }
}

TEST_CASE("validation names the offending field") {
    ExperimentConfig cfg;
    cfg.kind = "kakeya";
    CHECK(validate(cfg).empty());

    SUBCASE("delta = 0") {
        cfg.deltas = {0.0};
        const auto v = validate(cfg);
        REQUIRE(v.size() == 1);
        CHECK(v[0].find("deltas") != std::string::npos);
    }
    SUBCASE("k > n") {
        cfg.k = 3;
        cfg.n = 2;
        const auto v = validate(cfg);
        REQUIRE(!v.empty());
        CHECK(v[0].find("k") != std::string::npos);
    }
    SUBCASE("cap budget") {
        cfg.kind = "bg";
        cfg.n = 3;
        cfg.K = 12;  // 12^4 > 1e4
        const auto v = validate(cfg);
        REQUIRE(!v.empty());
        CHECK(v[0].find("K") != std::string::npos);
    }
    SUBCASE("nyquist floor") {
        cfg.quad.nyquist_factor = 2.0;
        const auto v = validate(cfg);
        REQUIRE(!v.empty());
        CHECK(v[0].find("nyquist") != std::string::npos);
    }
    SUBCASE("decay |w| budget") {
        cfg.kind = "decay";
        cfg.n = 3;
        cfg.t_values = {8, 12, 18, 27, 40, 60, 91};  // 91 > 64
        const auto v = validate(cfg);
        REQUIRE(!v.empty());
        CHECK(v[0].find("t_values") != std::string::npos);
    }
}

TEST_CASE("determinism: identical config and workers reproduce bodies bit-exactly") {
    ExperimentConfig cfg;
    cfg.kind = "kakeya";
    cfg.n = 2;
    cfg.k = 2;
    cfg.deltas = {0.25, 0.125};
    cfg.tubes_per_family = 10;
    cfg.samples = 20000;
    cfg.seed = 5;
    cfg.workers = 2;
    cfg.out_dir.clear();

    const RunReport a = run(cfg);
    const RunReport b = run(cfg);
    REQUIRE(a.csv_bodies.count("kakeya.csv") == 1);
    CHECK(a.csv_bodies.at("kakeya.csv") == b.csv_bodies.at("kakeya.csv"));

    ojson ja = a.report, jb = b.report;
    ja.erase("wall_clock_ms");
    jb.erase("wall_clock_ms");
    CHECK(ja == jb);

    // chunked reduction makes the result independent of the worker count too
    cfg.workers = 1;
    const RunReport c = run(cfg);
    CHECK(a.csv_bodies.at("kakeya.csv") == c.csv_bodies.at("kakeya.csv"));
}

TEST_CASE("LAB_SEED overrides the config seed and is recorded") {
    setenv("LAB_SEED", "987", 1);
    ExperimentConfig cfg;
    cfg.kind = "bl";
    cfg.n = 2;
    cfg.trials = 50;
    cfg.out_dir.clear();
    const RunReport rep = run(cfg);
    unsetenv("LAB_SEED");
    CHECK(rep.report["config"]["seed"] == 987);
    CHECK(rep.report["config"]["seed_source"] == "env");
}

TEST_CASE("cli exit codes: 0 pass, 1 assertion failure, 2 config error") {
    const auto out = std::filesystem::temp_directory_path() / "lab_cli_tests" / "out";
    SUBCASE("pass") {
        const std::string cfg = write_temp("ok.cfg",
                                           "kind = kakeya\nn = 2\nk = 2\ndeltas = 0.25\n"
                                           "tubes_per_family = 8\nsamples = 20000\nseed = 3\nepsilon_max = 0\n");
        CHECK(run_cli("kakeya --config " + cfg + " --out " + out.string()) == 0);
        CHECK(std::filesystem::exists(out / "report.json"));
        CHECK(std::filesystem::exists(out / "kakeya.csv"));
    }
    SUBCASE("config error: k > n") {
        const std::string cfg = write_temp("bad.cfg", "kind = kakeya\nn = 2\nk = 3\n");
        CHECK(run_cli("kakeya --config " + cfg) == 2);
    }
    SUBCASE("config error: unknown key") {
        const std::string cfg = write_temp("bad2.cfg", "kind = kakeya\nwat = 1\n");
        CHECK(run_cli("kakeya --config " + cfg) == 2);
    }
    SUBCASE("config error: kind mismatch") {
        const std::string cfg = write_temp("mismatch.cfg", "kind = decay\n");
        CHECK(run_cli("kakeya --config " + cfg) == 2);
    }
    SUBCASE("assertion failure: narrow cap bound forced to an impossible value") {
        const std::string cfg = write_temp("fail.cfg",
                                           "kind = bg\nn = 2\nk = 2\nK = 4\nR = 8\nseed = 3\n"
                                           "narrow_cap_max = -1\n");
        CHECK(run_cli("bg --config " + cfg) == 1);
    }
    SUBCASE("remaining kinds run end to end") {
        CHECK(run_cli("identities --seed 4 --out " + out.string() + "_id") == 0);
        CHECK(run_cli("acs --size 6 --trials 5 --seed 4 --out " + out.string() + "_acs") == 0);
        CHECK(run_cli("bl --trials 100 --seed 4 --out " + out.string() + "_bl") == 0);
        const std::string dcfg = write_temp("decay2.cfg", "kind = decay\nn = 2\nseed = 4\n");
        CHECK(run_cli("decay --config " + dcfg + " --out " + out.string() + "_dec") == 0);
        // decay CSV carries the columns and the JSON footer
        std::ifstream f(out.string() + "_dec/decay.csv");
        const std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        CHECK(body.rfind("t,absE,log_t,log_absE\n", 0) == 0);
        CHECK(body.find("# {\"exponent\": ") != std::string::npos);
    }
    SUBCASE("byte-identical CSV bodies across reruns of the binary") {
        const std::string cfg = write_temp("det.cfg",
                                           "kind = kakeya\nn = 2\nk = 2\ndeltas = 0.25\n"
                                           "tubes_per_family = 8\nsamples = 20000\nseed = 3\nworkers = 2\n"
                                           "epsilon_max = 0\n");
        const auto out1 = out.string() + "_d1";
        const auto out2 = out.string() + "_d2";
        REQUIRE(run_cli("kakeya --config " + cfg + " --out " + out1) == 0);
        REQUIRE(run_cli("kakeya --config " + cfg + " --out " + out2) == 0);
        std::ifstream f1(out1 + "/kakeya.csv"), f2(out2 + "/kakeya.csv");
        const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
        const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
        CHECK(b1 == b2);
        CHECK(!b1.empty());
    }
}
