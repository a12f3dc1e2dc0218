#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "deepiv/csv.hpp"
#include "deepiv/simlab.hpp"

#ifndef DEEPIV_CLI_PATH
#error "DEEPIV_CLI_PATH must point at the cli binary"
#endif

using namespace deepiv;
namespace fs = std::filesystem;
using njson = nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    return fs::exists(path) ? read_text_file(path) : std::string();
}

// run the cli with stdout/stderr captured; args is the raw argument tail
CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string base = "/tmp/deepiv_cli_" + std::to_string(getpid()) + "_" +
                             std::to_string(counter++);
    const std::string out_path = base + ".out";
    const std::string err_path = base + ".err";
    const std::string cmd = std::string(DEEPIV_CLI_PATH) + " " + args + " > " + out_path +
                            " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    CliResult res;
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    res.out = slurp(out_path);
    res.err = slurp(err_path);
    fs::remove(out_path);
    fs::remove(err_path);
    return res;
}

// fresh working directory + dgp2 fixture shared by the cases
struct Fixture {
    fs::path dir;
    std::string data_csv;

    Fixture() {
        dir = fs::path("/tmp") / ("deepiv_cli_fix_" + std::to_string(getpid()));
        fs::create_directories(dir);
        DgpSpec spec;
        spec.kind = DgpKind::dgp2;
        spec.n = 120;
        RngStream rng(2026, 0);
        const DgpDraw draw = gen_dgp(spec, rng);
        data_csv = (dir / "data.csv").string();
        write_text_file(data_csv, dataset_to_csv(draw.data));
    }
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("no arguments prints usage and fails") {
    const CliResult res = run_cli("");
    CHECK(res.code == 2);
}

TEST_CASE("fit with the linear first stage is deterministic and sane") {
    const std::string args = "fit " + fixture().data_csv + " --first-stage lr";
    const CliResult res = run_cli(args);
    REQUIRE(res.code == 0);
    const njson j = njson::parse(res.out);
    CHECK(j["n"] == 120);
    const double beta = j["beta"][0].get<double>();
    CHECK(beta > 2.0);
    CHECK(beta < 4.0);
    CHECK(j["ci"]["level"] == 0.95);
    CHECK(j["ci"]["lower"][0].get<double>() < beta);
    CHECK(j["ci"]["upper"][0].get<double>() > beta);
    CHECK(j.contains("vcov"));
    CHECK(j.contains("sigma2"));

    // byte-identical on a rerun
    const CliResult again = run_cli(args);
    CHECK(again.out == res.out);
}

TEST_CASE("fit dnn honors the seed flag") {
    const std::string base = "fit " + fixture().data_csv + " --first-stage dnn --epochs 30";
    const CliResult a1 = run_cli(base + " --seed 5");
    const CliResult a2 = run_cli(base + " --seed 5");
    const CliResult b = run_cli(base + " --seed 6");
    REQUIRE(a1.code == 0);
    CHECK(a1.out == a2.out);
    CHECK(a1.out != b.out);
}

TEST_CASE("fit oracle requires --f0 and matches the builtin") {
    const CliResult missing = run_cli("fit " + fixture().data_csv + " --first-stage oracle");
    CHECK(missing.code == 2);
    CHECK(missing.err.find("--f0") != std::string::npos);

    const CliResult ok =
        run_cli("fit " + fixture().data_csv + " --first-stage oracle --f0 dgp2");
    REQUIRE(ok.code == 0);
    const njson j = njson::parse(ok.out);
    CHECK(std::abs(j["beta"][0].get<double>() - 3.0) < 0.5);
}

TEST_CASE("fit writes artifacts and replay reproduces them byte for byte") {
    const fs::path out = fixture().dir / "fitout";
    fs::remove_all(out);
    const CliResult res = run_cli("fit " + fixture().data_csv +
                                  " --first-stage lr --out " + out.string());
    REQUIRE(res.code == 0);
    REQUIRE(fs::exists(out / "estimate.json"));
    REQUIRE(fs::exists(out / "manifest.json"));
    const std::string estimate = slurp((out / "estimate.json").string());
    CHECK(estimate == res.out);  // file mirrors stdout

    const njson manifest = njson::parse(slurp((out / "manifest.json").string()));
    CHECK(manifest["command"] == "fit");
    CHECK(manifest["version"].get<std::string>() == "0.1.0");
    CHECK(manifest["outputs"].size() == 1);

    const CliResult replay = run_cli("replay " + (out / "manifest.json").string());
    REQUIRE(replay.code == 0);
    CHECK(slurp((out / "estimate.json").string()) == estimate);
}

TEST_CASE("missing and malformed inputs exit 2") {
    const CliResult missing = run_cli("fit /tmp/deepiv_no_such_file.csv --first-stage lr");
    CHECK(missing.code == 2);

    const std::string bad = (fixture().dir / "bad.csv").string();
    write_text_file(bad, "y,x1,w1\n1,2,3\n");
    const CliResult malformed = run_cli("fit " + bad + " --first-stage lr");
    CHECK(malformed.code == 2);
    CHECK(malformed.err.find("csv") != std::string::npos);
}

TEST_CASE("constant instruments exit 3 with the weak-instrument message") {
    const std::string path = (fixture().dir / "const_z.csv").string();
    write_text_file(path, "y,x1,z1\n1,-1,5\n2,1,5\n-1,0.5,5\n0,2,5\n");
    const CliResult res = run_cli("fit " + path + " --first-stage lr");
    CHECK(res.code == 3);
    CHECK(res.err.find("singular moment matrix") != std::string::npos);
    CHECK(res.err.find("instruments") != std::string::npos);
}

TEST_CASE("split writes split.json with the auto truncation level") {
    const fs::path out = fixture().dir / "splitout";
    fs::remove_all(out);
    const CliResult res = run_cli("split " + fixture().data_csv +
                                  " --seed 4 --epochs 40 --out " + out.string());
    REQUIRE(res.code == 0);
    const njson j = njson::parse(res.out);
    CHECK(j["n"] == 120);
    // auto c_n = 3 log(120)
    CHECK(j["c_n"].get<double>() == doctest::Approx(3.0 * std::log(120.0)).epsilon(1e-12));
    CHECK(j.contains("beta_a"));
    CHECK(j.contains("beta_b"));
    CHECK(j.contains("ci"));
    CHECK(slurp((out / "split.json").string()) == res.out);

    // explicit cap is taken literally
    const CliResult manual = run_cli("split " + fixture().data_csv +
                                     " --seed 4 --epochs 40 --cn 9.5");
    REQUIRE(manual.code == 0);
    CHECK(njson::parse(manual.out)["c_n"] == 9.5);
}

TEST_CASE("spectest validates the baseline count") {
    const CliResult zero = run_cli("spectest " + fixture().data_csv +
                                   " --baseline 0 --epochs 30 --seed 2");
    CHECK(zero.code == 2);
    const CliResult wide = run_cli("spectest " + fixture().data_csv +
                                   " --baseline 4 --epochs 30 --seed 2");
    CHECK(wide.code == 2);  // baseline must leave instruments to test

    // baseline 1 keeps the efficiency gap between the two fits wide enough
    // for the inner variance to stay positive at this sample size
    const CliResult ok = run_cli("spectest " + fixture().data_csv +
                                 " --baseline 1 --epochs 30 --seed 2");
    REQUIRE(ok.code == 0);
    const njson j = njson::parse(ok.out);
    CHECK(j["dof"] == 1);
    CHECK(j["alpha"] == 0.05);
    CHECK(j["J"].get<double>() >= 0.0);
    CHECK(j.contains("reject"));
    CHECK(j.contains("p_value"));
    CHECK_FALSE(j.contains("sigma2_tilde"));
}

TEST_CASE("theory reproduces the frozen minimum sizes") {
    const std::string spec_path = (fixture().dir / "comp.json").string();
    write_text_file(spec_path,
                    "{\"l_star\": 0, \"dims\": [1, 1], \"active\": [1], \"smoothness\": [1.0]}\n");
    const CliResult res = run_cli("theory " + spec_path);
    REQUIRE(res.code == 0);
    const njson j = njson::parse(res.out);
    CHECK(j["min_depth"] == 217.0);
    CHECK(j["min_width"] == 11664.0);
    CHECK(j["rate_exponent"].get<double>() == doctest::Approx(1.0 / 3.0));
    CHECK(j["lw_exponent"].get<double>() == doctest::Approx(1.0 / 6.0));
    CHECK(j["infinite_smoothness"] == false);

    const CliResult bad = run_cli("theory /tmp/deepiv_no_such_spec.json");
    CHECK(bad.code == 2);
}

TEST_CASE("simulate writes results, figures, and a replayable manifest") {
    const fs::path out = fixture().dir / "simout";
    fs::remove_all(out);
    const std::string cfg_path = (fixture().dir / "sim.json").string();
    write_text_file(cfg_path, R"({
  "dgp": {"kind": "dgp2"},
  "sample_sizes": [60, 100],
  "replications": 3,
  "estimators": ["ols", "oracle"],
  "grid": [],
  "master_seed": 11,
  "eval_points": 100
})");
    const CliResult res = run_cli("simulate " + cfg_path + " --out " + out.string());
    REQUIRE(res.code == 0);
    REQUIRE(fs::exists(out / "results.csv"));
    REQUIRE(fs::exists(out / "manifest.json"));
    // no dnn estimator: only the three by-estimator tables
    CHECK(fs::exists(out / "fig2.csv"));
    CHECK(fs::exists(out / "fig6.csv"));
    CHECK(fs::exists(out / "fig10.csv"));
    CHECK_FALSE(fs::exists(out / "fig4.csv"));
    CHECK_FALSE(fs::exists(out / "fig2.svg"));

    const std::string results = slurp((out / "results.csv").string());
    CHECK(results.find("dgp2,oracle,60,") != std::string::npos);
    CHECK(results.find("dgp2,ols,100,") != std::string::npos);

    // replay with a different worker count: byte-identical results
    const njson manifest = njson::parse(slurp((out / "manifest.json").string()));
    CHECK(manifest["command"] == "simulate");
    setenv("DEEPIV_THREADS", "2", 1);
    const CliResult replay = run_cli("replay " + (out / "manifest.json").string());
    unsetenv("DEEPIV_THREADS");
    REQUIRE(replay.code == 0);
    CHECK(slurp((out / "results.csv").string()) == results);
}

TEST_CASE("simulate with svg emits charts") {
    const fs::path out = fixture().dir / "simsvg";
    fs::remove_all(out);
    const std::string cfg_path = (fixture().dir / "sim_svg.json").string();
    write_text_file(cfg_path, R"({
  "dgp": {"kind": "dgp1"},
  "sample_sizes": [60],
  "replications": 2,
  "estimators": ["ols", "oracle"],
  "grid": [],
  "master_seed": 3,
  "eval_points": 50
})");
    const CliResult res = run_cli("simulate " + cfg_path + " --svg --out " + out.string());
    REQUIRE(res.code == 0);
    // dgp1 fills the odd figure slots
    CHECK(fs::exists(out / "fig1.csv"));
    CHECK(fs::exists(out / "fig1.svg"));
    const std::string svg = slurp((out / "fig1.svg").string());
    CHECK(svg.rfind("<svg", 0) == 0);
}

TEST_CASE("simulate rejects unknown config keys") {
    const std::string cfg_path = (fixture().dir / "sim_bad.json").string();
    write_text_file(cfg_path, R"({"dgp": {"kind": "dgp2"}, "reps": 3})");
    const CliResult res = run_cli("simulate " + cfg_path + " --out /tmp/deepiv_never");
    CHECK(res.code == 2);
    CHECK(res.err.find("unknown key") != std::string::npos);
}
