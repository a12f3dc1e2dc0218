// Command line front end: fit | split | spectest | theory | simulate | replay.
// Exit codes: 0 success, 2 input/config error, 3 numerical failure.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "deepiv/csv.hpp"
#include "deepiv/errors.hpp"
#include "deepiv/first_stage.hpp"
#include "deepiv/inference.hpp"
#include "deepiv/serialize.hpp"
#include "deepiv/simlab.hpp"
#include "deepiv/spec_test.hpp"
#include "deepiv/split_sample.hpp"
#include "deepiv/theory_calc.hpp"
#include "deepiv/version.hpp"

namespace {

using ojson = nlohmann::ordered_json;
using namespace deepiv;

std::string now_utc() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

const ojson& field(const ojson& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw DomainError(std::string("config: missing field '") + key + "'");
    return *it;
}

std::string get_str(const ojson& j, const char* key) {
    const ojson& v = field(j, key);
    if (!v.is_string()) throw DomainError(std::string("config: '") + key + "' must be a string");
    return v.get<std::string>();
}

std::size_t get_count(const ojson& j, const char* key) {
    const ojson& v = field(j, key);
    if (!v.is_number_unsigned())
        throw DomainError(std::string("config: '") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

double get_real(const ojson& j, const char* key) {
    const ojson& v = field(j, key);
    if (!v.is_number()) throw DomainError(std::string("config: '") + key + "' must be a number");
    return v.get<double>();
}

bool get_bool(const ojson& j, const char* key) {
    const ojson& v = field(j, key);
    if (!v.is_boolean()) throw DomainError(std::string("config: '") + key + "' must be a boolean");
    return v.get<bool>();
}

void reject_unknown_keys(const ojson& j, std::initializer_list<const char*> allowed,
                         const char* where) {
    for (const auto& kv : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (kv.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw DomainError(std::string("config: unknown key '") + kv.key() + "' in " + where);
    }
}

// Writes result files plus manifest.json under out_dir. `outputs` holds
// (file name, content) pairs; paths recorded in the manifest are as written.
void write_artifacts(const std::string& out_dir, const std::string& command,
                     const ojson& config, std::uint64_t seed, const std::string& started,
                     const std::vector<std::pair<std::string, std::string>>& outputs) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.command = command;
    manifest.config_json = config.dump(2);
    manifest.seed = seed;
    manifest.version = kVersion;
    manifest.started_at = started;
    for (const auto& [name, content] : outputs) {
        const std::string path = (fs::path(out_dir) / name).string();
        write_text_file(path, content);
        manifest.outputs.push_back(path);
    }
    manifest.finished_at = now_utc();
    write_text_file((fs::path(out_dir) / "manifest.json").string(),
                    manifest_to_json(manifest) + "\n");
}

double resolve_z_bound(const ojson& cfg, const char* key, const Dataset& data, bool lo) {
    const ojson& v = field(cfg, key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && v.get<std::string>() == "auto") {
        double best = data.z(0, 0);
        auto scan = [&](const Matrix& m) {
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < m.cols(); ++j)
                    best = lo ? std::min(best, m(i, j)) : std::max(best, m(i, j));
        };
        scan(data.z);
        if (data.r) scan(*data.r);
        return best;
    }
    throw DomainError(std::string("config: '") + key + "' must be a number or \"auto\"");
}

SplineSpec resolve_spline(const ojson& cfg, const Dataset& data, bool tensor) {
    std::size_t knots = get_count(cfg, "knots");
    if (knots == 0) knots = tensor ? 5 : 20;
    return SplineSpec::equally_spaced(knots, resolve_z_bound(cfg, "z_low", data, true),
                                      resolve_z_bound(cfg, "z_high", data, false),
                                      tensor ? SplineSpec::Interaction::tensor
                                             : SplineSpec::Interaction::additive);
}

TrainConfig resolve_train(const ojson& cfg) {
    TrainConfig tc;
    tc.seed = get_count(cfg, "seed");
    tc.max_epochs = get_count(cfg, "epochs");
    return tc;
}

int run_fit(const ojson& cfg) {
    const std::string started = now_utc();
    const Dataset data = read_dataset_csv(get_str(cfg, "input"));
    const FsFamily family = family_from_name(get_str(cfg, "first_stage"));
    const double alpha = get_real(cfg, "alpha");
    const std::uint64_t seed = get_count(cfg, "seed");

    BetaEstimate est;
    if (data.r) {
        if (family == FsFamily::oracle)
            throw DomainError("the oracle first stage is unavailable with exogenous columns");
        ExogenousConfig ec;
        ec.family = family;
        ec.L = get_count(cfg, "depth");
        ec.W = get_count(cfg, "width");
        ec.train = resolve_train(cfg);
        if (family == FsFamily::tensor_spline || family == FsFamily::additive_spline)
            ec.spline = resolve_spline(cfg, data, family == FsFamily::tensor_spline);
        ec.cv.seed = seed;
        est = estimate_with_exogenous(data, ec);
    } else {
        FirstStageModel model;
        switch (family) {
            case FsFamily::dnn:
                model = fit_dnn(data, get_count(cfg, "depth"), get_count(cfg, "width"),
                                resolve_train(cfg));
                break;
            case FsFamily::tensor_spline:
            case FsFamily::additive_spline: {
                LassoCvSpec cv;
                cv.seed = seed;
                model = fit_spline_lasso(
                    data, resolve_spline(cfg, data, family == FsFamily::tensor_spline), cv);
                break;
            }
            case FsFamily::linear:
                model = fit_linear(data);
                break;
            case FsFamily::oracle: {
                const std::string f0_name = get_str(cfg, "f0");
                if (f0_name.empty())
                    throw DomainError("--f0 dgp1|dgp2 is required with --first-stage oracle");
                if (data.q() != 1) throw DomainError("built-in oracles have a single regressor");
                DgpSpec spec;
                spec.kind = dgp_from_name(f0_name);
                spec.d = data.d();
                ScalarF0 f0 = dgp_f0(spec);
                model = oracle_model(
                    [f0](std::span<const double> z) { return std::vector<double>{f0(z)}; },
                    data.d(), 1, f0_name);
                break;
            }
        }
        est = make_estimate(predict(model, data.z), data.x, data.y);
    }

    const ConfidenceInterval ci = confidence_interval(est, alpha);
    const std::string text = estimate_to_json(est, ci) + "\n";
    std::cout << text;
    const std::string out_dir = get_str(cfg, "out");
    if (!out_dir.empty())
        write_artifacts(out_dir, "fit", cfg, seed, started, {{"estimate.json", text}});
    return 0;
}

int run_split(const ojson& cfg) {
    const std::string started = now_utc();
    const Dataset data = read_dataset_csv(get_str(cfg, "input"));
    if (data.r)
        throw DomainError("the split estimator does not support exogenous columns");
    const double alpha = get_real(cfg, "alpha");
    const std::uint64_t seed = get_count(cfg, "seed");

    double c_n;
    const ojson& cn = field(cfg, "cn");
    if (cn.is_number()) {
        c_n = cn.get<double>();
    } else if (cn.is_string() && cn.get<std::string>() == "auto") {
        c_n = 3.0 * std::log(static_cast<double>(data.n()));
    } else {
        throw DomainError("config: 'cn' must be a number or \"auto\"");
    }

    const SplitEstimate split = fit_split_estimator(data, get_count(cfg, "depth"),
                                                    get_count(cfg, "width"), c_n,
                                                    resolve_train(cfg));
    BetaEstimate as_estimate;
    as_estimate.beta = split.beta_ab;
    as_estimate.vcov = split.vcov_ab;
    as_estimate.se = split.se;
    as_estimate.n = split.n;
    as_estimate.residual_variance = split.sigma2;
    const ConfidenceInterval ci = confidence_interval(as_estimate, alpha);
    const std::string text = split_to_json(split, ci) + "\n";
    std::cout << text;
    const std::string out_dir = get_str(cfg, "out");
    if (!out_dir.empty())
        write_artifacts(out_dir, "split", cfg, seed, started, {{"split.json", text}});
    return 0;
}

int run_spectest(const ojson& cfg) {
    const std::string started = now_utc();
    const Dataset data = read_dataset_csv(get_str(cfg, "input"));
    if (data.r)
        throw DomainError("the specification test does not support exogenous columns");
    const std::size_t baseline = get_count(cfg, "baseline");
    if (baseline == 0 || baseline >= data.d())
        throw DomainError("--baseline must satisfy 1 <= baseline < d (d = " +
                          std::to_string(data.d()) + ")");
    const double alpha = get_real(cfg, "alpha");
    const std::uint64_t seed = get_count(cfg, "seed");
    const SpecTestResult result =
        hausman_test(data, baseline, get_count(cfg, "depth"), get_count(cfg, "width"),
                     resolve_train(cfg), alpha);
    const std::string text = spec_test_to_json(result) + "\n";
    std::cout << text;
    const std::string out_dir = get_str(cfg, "out");
    if (!out_dir.empty())
        write_artifacts(out_dir, "spectest", cfg, seed, started, {{"spectest.json", text}});
    return 0;
}

int run_theory(const ojson& cfg) {
    const std::string started = now_utc();
    const CompositionalSpec spec = comp_spec_from_json(read_text_file(get_str(cfg, "input")));
    const IntrinsicSummary summary = intrinsic_summary(spec, get_count(cfg, "q"));
    const std::string text = summary_to_json(summary) + "\n";
    std::cout << text;
    const std::string out_dir = get_str(cfg, "out");
    if (!out_dir.empty())
        write_artifacts(out_dir, "theory", cfg, 0, started, {{"theory.json", text}});
    return 0;
}

McConfig mc_config_from_json(const ojson& j) {
    reject_unknown_keys(j,
                        {"dgp", "sample_sizes", "replications", "estimators", "grid", "ci_level",
                         "master_seed", "eval_points", "train", "aspline_knots", "pspline_knots",
                         "cv"},
                        "simulate config");
    McConfig cfg;
    if (j.contains("dgp")) {
        const ojson& d = j["dgp"];
        reject_unknown_keys(d, {"kind", "beta0", "noise_scale", "d", "z_low", "z_high"}, "dgp");
        cfg.dgp.kind = dgp_from_name(get_str(d, "kind"));
        if (cfg.dgp.kind == DgpKind::custom)
            throw DomainError("config: custom dgp is available through the library only");
        if (d.contains("beta0")) cfg.dgp.beta0 = get_real(d, "beta0");
        if (d.contains("noise_scale")) cfg.dgp.noise_scale = get_real(d, "noise_scale");
        if (d.contains("d")) cfg.dgp.d = get_count(d, "d");
        if (d.contains("z_low")) cfg.dgp.z_low = get_real(d, "z_low");
        if (d.contains("z_high")) cfg.dgp.z_high = get_real(d, "z_high");
    }
    if (j.contains("sample_sizes")) {
        cfg.sample_sizes.clear();
        for (const auto& e : field(j, "sample_sizes")) {
            if (!e.is_number_unsigned())
                throw DomainError("config: sample_sizes entries must be positive integers");
            cfg.sample_sizes.push_back(e.get<std::size_t>());
        }
    }
    if (j.contains("replications")) cfg.replications = get_count(j, "replications");
    if (j.contains("estimators")) {
        cfg.estimators.clear();
        for (const auto& e : field(j, "estimators")) {
            if (!e.is_string()) throw DomainError("config: estimators entries must be names");
            cfg.estimators.push_back(estimator_from_name(e.get<std::string>()));
        }
    }
    if (j.contains("grid")) {
        cfg.grid.clear();
        for (const auto& e : field(j, "grid")) {
            NetSize g;
            if (e.is_array() && e.size() == 2 && e[0].is_number_unsigned() &&
                e[1].is_number_unsigned()) {
                g.depth = e[0].get<std::size_t>();
                g.width = e[1].get<std::size_t>();
            } else if (e.is_object()) {
                reject_unknown_keys(e, {"depth", "width"}, "grid entry");
                g.depth = get_count(e, "depth");
                g.width = get_count(e, "width");
            } else {
                throw DomainError("config: grid entries are [depth, width] or {depth, width}");
            }
            cfg.grid.push_back(g);
        }
    }
    if (j.contains("ci_level")) cfg.ci_level = get_real(j, "ci_level");
    if (j.contains("master_seed")) cfg.master_seed = get_count(j, "master_seed");
    if (j.contains("eval_points")) cfg.eval_points = get_count(j, "eval_points");
    if (j.contains("train")) {
        const ojson& t = j["train"];
        reject_unknown_keys(t,
                            {"learning_rate", "batch_size", "max_epochs", "patience",
                             "train_fraction", "optimizer", "return_best"},
                            "train");
        if (t.contains("learning_rate")) cfg.train.learning_rate = get_real(t, "learning_rate");
        if (t.contains("batch_size")) cfg.train.batch_size = get_count(t, "batch_size");
        if (t.contains("max_epochs")) cfg.train.max_epochs = get_count(t, "max_epochs");
        if (t.contains("patience")) cfg.train.patience = get_count(t, "patience");
        if (t.contains("train_fraction")) cfg.train.train_fraction = get_real(t, "train_fraction");
        if (t.contains("optimizer")) {
            const std::string opt = get_str(t, "optimizer");
            if (opt == "adam") cfg.train.optimizer = TrainConfig::Optimizer::adam;
            else if (opt == "sgd") cfg.train.optimizer = TrainConfig::Optimizer::sgd;
            else throw DomainError("config: optimizer must be adam or sgd");
        }
        if (t.contains("return_best")) cfg.train.return_best = get_bool(t, "return_best");
    }
    if (j.contains("aspline_knots")) cfg.aspline_knots = get_count(j, "aspline_knots");
    if (j.contains("pspline_knots")) cfg.pspline_knots = get_count(j, "pspline_knots");
    if (j.contains("cv")) {
        const ojson& c = j["cv"];
        reject_unknown_keys(c, {"folds", "n_lambda", "ratio"}, "cv");
        if (c.contains("folds")) cfg.cv.folds = get_count(c, "folds");
        if (c.contains("n_lambda")) cfg.cv.n_lambda = get_count(c, "n_lambda");
        if (c.contains("ratio")) cfg.cv.ratio = get_real(c, "ratio");
    }
    cfg.check();
    return cfg;
}

ojson mc_config_to_json(const McConfig& cfg) {
    ojson j;
    ojson dgp;
    dgp["kind"] = dgp_name(cfg.dgp.kind);
    dgp["beta0"] = cfg.dgp.beta0;
    dgp["noise_scale"] = cfg.dgp.noise_scale;
    dgp["d"] = cfg.dgp.d;
    dgp["z_low"] = cfg.dgp.z_low;
    dgp["z_high"] = cfg.dgp.z_high;
    j["dgp"] = std::move(dgp);
    j["sample_sizes"] = cfg.sample_sizes;
    j["replications"] = cfg.replications;
    ojson ests = ojson::array();
    for (McEstimator e : cfg.estimators) ests.push_back(estimator_name(e));
    j["estimators"] = std::move(ests);
    ojson grid = ojson::array();
    for (const NetSize& g : cfg.grid) {
        ojson e;
        e["depth"] = g.depth;
        e["width"] = g.width;
        grid.push_back(std::move(e));
    }
    j["grid"] = std::move(grid);
    j["ci_level"] = cfg.ci_level;
    j["master_seed"] = cfg.master_seed;
    j["eval_points"] = cfg.eval_points;
    ojson train;
    train["learning_rate"] = cfg.train.learning_rate;
    train["batch_size"] = cfg.train.batch_size;
    train["max_epochs"] = cfg.train.max_epochs;
    train["patience"] = cfg.train.patience;
    train["train_fraction"] = cfg.train.train_fraction;
    train["optimizer"] = cfg.train.optimizer == TrainConfig::Optimizer::adam ? "adam" : "sgd";
    train["return_best"] = cfg.train.return_best;
    j["train"] = std::move(train);
    j["aspline_knots"] = cfg.aspline_knots;
    j["pspline_knots"] = cfg.pspline_knots;
    ojson cv;
    cv["folds"] = cfg.cv.folds;
    cv["n_lambda"] = cfg.cv.n_lambda;
    cv["ratio"] = cfg.cv.ratio;
    j["cv"] = std::move(cv);
    return j;
}

int run_simulate(const ojson& cfg) {
    const std::string started = now_utc();
    const McConfig mc = mc_config_from_json(field(cfg, "mc"));
    const bool svg = get_bool(cfg, "svg");
    const std::string out_dir = get_str(cfg, "out");
    if (out_dir.empty()) throw DomainError("simulate needs --out");

    const McResult result = run_monte_carlo(mc);

    std::vector<std::pair<std::string, std::string>> outputs;
    outputs.emplace_back("results.csv", mc_result_to_csv(result));
    for (const FigureTable& fig : figure_tables(result)) {
        outputs.emplace_back(fig.name + ".csv", fig.csv);
        if (svg)
            outputs.emplace_back(fig.name + ".svg",
                                 svg_line_chart(fig.csv, fig.name + " (" + result.dgp + ")"));
    }
    // resolved config goes into the manifest so a replay is self-contained
    ojson resolved;
    resolved["mc"] = mc_config_to_json(mc);
    resolved["svg"] = svg;
    resolved["out"] = out_dir;
    write_artifacts(out_dir, "simulate", resolved, mc.master_seed, started, outputs);
    std::cout << "wrote " << outputs.size() << " files to " << out_dir << "\n";
    return 0;
}

int dispatch(const std::string& command, const ojson& cfg) {
    if (command == "fit") return run_fit(cfg);
    if (command == "split") return run_split(cfg);
    if (command == "spectest") return run_spectest(cfg);
    if (command == "theory") return run_theory(cfg);
    if (command == "simulate") return run_simulate(cfg);
    throw DomainError("manifest: unknown command '" + command + "'");
}

int run_replay(const std::string& manifest_path) {
    const RunManifest manifest = manifest_from_json(read_text_file(manifest_path));
    ojson cfg;
    try {
        cfg = ojson::parse(manifest.config_json);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("manifest: bad config snapshot: ") + e.what());
    }
    return dispatch(manifest.command, cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-stage instrumental-variable estimation with deep-network first stages"};
    app.require_subcommand(1);

    // fit
    std::string fit_input, fit_family = "dnn", fit_f0, fit_out;
    std::size_t fit_depth = 3, fit_width = 10, fit_epochs = 500, fit_knots = 0;
    std::uint64_t fit_seed = 0;
    double fit_alpha = 0.05;
    CLI::App* fit = app.add_subcommand("fit", "two-stage estimate from a dataset csv");
    fit->add_option("input", fit_input, "dataset csv (y,x1..,z1..[,r1..])")->required();
    fit->add_option("--first-stage", fit_family, "dnn|pspline|aspline|lr|oracle");
    fit->add_option("--depth", fit_depth, "hidden layers (dnn)");
    fit->add_option("--width", fit_width, "hidden width (dnn)");
    fit->add_option("--alpha", fit_alpha, "confidence level is 1-alpha");
    fit->add_option("--seed", fit_seed, "training/cv seed");
    fit->add_option("--epochs", fit_epochs, "training epoch cap (dnn)");
    fit->add_option("--knots", fit_knots, "spline interior knots (0 = family default)");
    fit->add_option("--f0", fit_f0, "built-in truth for --first-stage oracle (dgp1|dgp2)");
    fit->add_option("--out", fit_out, "artifact directory (estimate.json + manifest.json)");

    // split
    std::string split_input, split_cn = "auto", split_out;
    std::size_t split_depth = 3, split_width = 10, split_epochs = 500;
    std::uint64_t split_seed = 0;
    double split_alpha = 0.05;
    CLI::App* split = app.add_subcommand("split", "split-sample truncated estimator");
    split->add_option("input", split_input, "dataset csv")->required();
    split->add_option("--depth", split_depth, "hidden layers");
    split->add_option("--width", split_width, "hidden width");
    split->add_option("--cn", split_cn, "truncation level (number or 'auto' = 3 log n)");
    split->add_option("--alpha", split_alpha, "confidence level is 1-alpha");
    split->add_option("--seed", split_seed, "split/training seed");
    split->add_option("--epochs", split_epochs, "training epoch cap");
    split->add_option("--out", split_out, "artifact directory");

    // spectest
    std::string st_input, st_out;
    std::size_t st_baseline = 0, st_depth = 3, st_width = 10, st_epochs = 500;
    std::uint64_t st_seed = 0;
    double st_alpha = 0.05;
    CLI::App* st = app.add_subcommand("spectest", "overidentification test of extra instruments");
    st->add_option("input", st_input, "dataset csv")->required();
    st->add_option("--baseline", st_baseline, "count of known-valid leading z columns")
        ->required();
    st->add_option("--depth", st_depth, "hidden layers");
    st->add_option("--width", st_width, "hidden width");
    st->add_option("--alpha", st_alpha, "test level");
    st->add_option("--seed", st_seed, "training seed");
    st->add_option("--epochs", st_epochs, "training epoch cap");
    st->add_option("--out", st_out, "artifact directory");

    // theory
    std::string th_input, th_out;
    std::size_t th_q = 1;
    CLI::App* th = app.add_subcommand("theory", "intrinsic smoothness/dimension calculator");
    th->add_option("input", th_input, "compositional spec json")->required();
    th->add_option("--q", th_q, "output dimension of the first stage");
    th->add_option("--out", th_out, "artifact directory");

    // simulate
    std::string sim_config, sim_out;
    bool sim_svg = false;
    CLI::App* sim = app.add_subcommand("simulate", "monte carlo campaign");
    sim->add_option("config", sim_config, "campaign config json")->required();
    sim->add_option("--out", sim_out, "artifact directory")->required();
    sim->add_flag("--svg", sim_svg, "also render svg line charts");

    // replay
    std::string rp_manifest;
    CLI::App* rp = app.add_subcommand("replay", "re-run a recorded manifest");
    rp->add_option("manifest", rp_manifest, "manifest.json from a previous run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) {
            ojson cfg;
            cfg["input"] = fit_input;
            cfg["first_stage"] = fit_family;
            cfg["depth"] = fit_depth;
            cfg["width"] = fit_width;
            cfg["alpha"] = fit_alpha;
            cfg["seed"] = fit_seed;
            cfg["epochs"] = fit_epochs;
            cfg["knots"] = fit_knots;
            cfg["z_low"] = "auto";
            cfg["z_high"] = "auto";
            cfg["f0"] = fit_f0;
            cfg["out"] = fit_out;
            return run_fit(cfg);
        }
        if (split->parsed()) {
            ojson cfg;
            cfg["input"] = split_input;
            cfg["depth"] = split_depth;
            cfg["width"] = split_width;
            char* end = nullptr;
            const double cn_val = std::strtod(split_cn.c_str(), &end);
            if (split_cn == "auto") cfg["cn"] = "auto";
            else if (end && *end == '\0' && !split_cn.empty()) cfg["cn"] = cn_val;
            else throw DomainError("--cn must be a number or 'auto'");
            cfg["alpha"] = split_alpha;
            cfg["seed"] = split_seed;
            cfg["epochs"] = split_epochs;
            cfg["out"] = split_out;
            return run_split(cfg);
        }
        if (st->parsed()) {
            ojson cfg;
            cfg["input"] = st_input;
            cfg["baseline"] = st_baseline;
            cfg["depth"] = st_depth;
            cfg["width"] = st_width;
            cfg["alpha"] = st_alpha;
            cfg["seed"] = st_seed;
            cfg["epochs"] = st_epochs;
            cfg["out"] = st_out;
            return run_spectest(cfg);
        }
        if (th->parsed()) {
            ojson cfg;
            cfg["input"] = th_input;
            cfg["q"] = th_q;
            cfg["out"] = th_out;
            return run_theory(cfg);
        }
        if (sim->parsed()) {
            ojson cfg;
            try {
                cfg["mc"] = ojson::parse(read_text_file(sim_config));
            } catch (const nlohmann::json::exception& e) {
                throw DomainError(std::string("config: parse failed: ") + e.what());
            }
            cfg["svg"] = sim_svg;
            cfg["out"] = sim_out;
            return run_simulate(cfg);
        }
        if (rp->parsed()) return run_replay(rp_manifest);
        throw DomainError("no subcommand");
    } catch (const SingularMatrix& e) {
        std::cerr << "error: singular moment matrix — weak or invalid instruments ("
                  << e.what() << ")\n";
        return 3;
    } catch (const NonConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NonPositiveInner& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
