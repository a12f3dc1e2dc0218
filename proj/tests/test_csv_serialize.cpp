#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include <json.hpp>

#include "deepiv/csv.hpp"
#include "deepiv/errors.hpp"
#include "deepiv/serialize.hpp"
#include "deepiv/simlab.hpp"
#include "deepiv/split_sample.hpp"
#include "deepiv/spec_test.hpp"
#include "deepiv/theory_calc.hpp"

using namespace deepiv;

namespace {

Dataset sample_dataset(std::size_t n, std::size_t d, bool with_r, std::uint64_t seed) {
    RngStream rng(seed, 0);
    Dataset data;
    data.y.resize(n);
    data.x = Matrix(n, 1);
    data.z = Matrix(n, d);
    if (with_r) data.r = Matrix(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        data.y[i] = rng.normal() * 1e3;
        data.x(i, 0) = rng.uniform(-5.0, 5.0);
        for (std::size_t j = 0; j < d; ++j) data.z(i, j) = rng.normal() / 7.0;
        if (with_r) {
            (*data.r)(i, 0) = rng.uniform01();
            (*data.r)(i, 1) = -rng.normal();
        }
    }
    return data;
}

}  // namespace

TEST_CASE("format_double round trips and handles non-finite values") {
    for (double v : {0.0, -0.0, 1.0, -1.5, 0.1, 1e-300, -2.2250738585072014e-308,
                     3.141592653589793, 1e17, 123456.789}) {
        const std::string s = format_double(v);
        CHECK(parse_double_field(s, 1, 1) == v);
    }
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("parse_double_field strictness") {
    CHECK(parse_double_field("2.5", 1, 1) == 2.5);
    CHECK(parse_double_field("-1e3", 1, 1) == -1000.0);
    CHECK_THROWS_AS(parse_double_field("", 3, 2), DomainError);
    CHECK_THROWS_AS(parse_double_field("1.5x", 3, 2), DomainError);
    CHECK_THROWS_AS(parse_double_field("one", 3, 2), DomainError);
    CHECK_THROWS_AS(parse_double_field("inf", 3, 2), DomainError);  // data must be finite
    // the error message carries the location
    try {
        parse_double_field("bad", 7, 4);
        FAIL("expected a throw");
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("7") != std::string::npos);
        CHECK(msg.find("4") != std::string::npos);
    }
}

TEST_CASE("dataset csv round trip, with and without exogenous block") {
    for (bool with_r : {false, true}) {
        const Dataset data = sample_dataset(23, 3, with_r, 99);
        const std::string csv = dataset_to_csv(data);
        const Dataset back = parse_dataset_csv(csv);
        CHECK(back.y == data.y);  // bit-exact via shortest round-trip format
        CHECK(back.x == data.x);
        CHECK(back.z == data.z);
        CHECK(back.r.has_value() == with_r);
        if (with_r) CHECK(*back.r == *data.r);
    }
}

TEST_CASE("dataset csv header validation") {
    CHECK_THROWS_AS(parse_dataset_csv("x1,z1\n1,2\n"), DomainError);        // y missing
    CHECK_THROWS_AS(parse_dataset_csv("y,x1\n1,2\n"), DomainError);          // no z block
    CHECK_THROWS_AS(parse_dataset_csv("y,x1,z1,z3\n1,2,3,4\n"), DomainError);  // gap in z
    CHECK_THROWS_AS(parse_dataset_csv("y,z1,x1\n1,2,3\n"), DomainError);     // order wrong
    CHECK_THROWS_AS(parse_dataset_csv("y,x1,z1\n"), DomainError);            // no rows
    CHECK_THROWS_AS(parse_dataset_csv("y,x1,z1\n1,2\n"), DomainError);       // short row
    CHECK_THROWS_AS(parse_dataset_csv("y,x1,z1\n1,2,3,4\n"), DomainError);   // long row

    // crlf and a trailing newline are tolerated
    const Dataset ok = parse_dataset_csv("y,x1,z1,z2\r\n1,2,3,4\r\n5,6,7,8\r\n");
    CHECK(ok.n() == 2);
    CHECK(ok.d() == 2);
    CHECK(ok.z(1, 1) == 8.0);
}

TEST_CASE("text file io round trips") {
    const std::string path = "/tmp/deepiv_test_io.txt";
    const std::string body = "line1\nline2 with spaces\n";
    write_text_file(path, body);
    CHECK(read_text_file(path) == body);
    CHECK_THROWS_AS(read_text_file("/tmp/deepiv_does_not_exist_12345"), DomainError);
}

TEST_CASE("network json round trip is bit exact") {
    RngStream rng(31, 0);
    const MlpNetwork net = init_network(3, 2, 2, 5, rng);
    const std::string js = network_to_json(net);
    const MlpNetwork back = network_from_json(js);
    CHECK(back.d == net.d);
    CHECK(back.q == net.q);
    CHECK(back.L == net.L);
    CHECK(back.W == net.W);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        CHECK(back.weights[l] == net.weights[l]);
        CHECK(back.shifts[l] == net.shifts[l]);
    }
    CHECK_THROWS_AS(network_from_json("{\"d\": 1}"), DomainError);
    CHECK_THROWS_AS(network_from_json("not json"), DomainError);
}

TEST_CASE("model json round trip per family") {
    const Dataset data = sample_dataset(40, 2, false, 12);

    // linear
    const FirstStageModel lin = fit_linear(data);
    const FirstStageModel lin_back = model_from_json(model_to_json(lin));
    CHECK(lin_back.family == FsFamily::linear);
    CHECK(lin_back.coef == lin.coef);

    // dnn, truncated
    TrainConfig cfg;
    cfg.seed = 5;
    cfg.max_epochs = 10;
    const FirstStageModel dnn = truncate_model(fit_dnn(data, 2, 4, cfg), 7.5);
    const FirstStageModel dnn_back = model_from_json(model_to_json(dnn));
    CHECK(dnn_back.family == FsFamily::dnn);
    CHECK(dnn_back.truncated);
    CHECK(dnn_back.c_n == 7.5);
    for (std::size_t l = 0; l < dnn.net.weights.size(); ++l)
        CHECK(dnn_back.net.weights[l] == dnn.net.weights[l]);
    // identical predictions after the round trip
    const std::vector<double> z{0.3, -1.2};
    CHECK(predict_row(dnn_back, z) == predict_row(dnn, z));

    // additive spline
    const SplineSpec sp = SplineSpec::equally_spaced(2, -3.0, 3.0,
                                                     SplineSpec::Interaction::additive);
    LassoCvSpec cv;
    cv.folds = 3;
    cv.n_lambda = 10;
    cv.seed = 2;
    const FirstStageModel spl = fit_spline_lasso(data, sp, cv);
    const FirstStageModel spl_back = model_from_json(model_to_json(spl));
    CHECK(spl_back.family == FsFamily::additive_spline);
    CHECK(spl_back.coef == spl.coef);
    CHECK(spl_back.intercepts == spl.intercepts);
    CHECK(spl_back.spline.knots == spl.spline.knots);
    CHECK(predict_row(spl_back, z) == predict_row(spl, z));

    // oracle: built-ins only
    DgpSpec dspec;
    dspec.kind = DgpKind::dgp1;
    const ScalarF0 f0 = dgp_f0(dspec);
    const FirstStageModel ora = oracle_model(
        [f0](std::span<const double> zz) { return std::vector<double>{f0(zz)}; }, 4, 1, "dgp1");
    const FirstStageModel ora_back = model_from_json(model_to_json(ora));
    const std::vector<double> z4{1.0, 0.5, -2.0, 1.5};
    CHECK(predict_row(ora_back, z4) == predict_row(ora, z4));

    const FirstStageModel anon = oracle_model(
        [](std::span<const double>) { return std::vector<double>{0.0}; }, 4, 1);
    CHECK_THROWS_AS(model_to_json(anon), DomainError);
}

TEST_CASE("estimate json carries the full inference payload") {
    const Dataset data = sample_dataset(60, 2, false, 44);
    Matrix x_hat = data.x;  // use x itself, any estimate works for the schema
    const BetaEstimate est = make_estimate(x_hat, data.x, data.y);
    const ConfidenceInterval ci = confidence_interval(est, 0.05);
    const std::string js = estimate_to_json(est, ci);
    CHECK(js.find("\"beta\"") != std::string::npos);
    CHECK(js.find("\"se\"") != std::string::npos);
    CHECK(js.find("\"vcov\"") != std::string::npos);
    CHECK(js.find("\"sigma2\"") != std::string::npos);
    CHECK(js.find("\"ci\"") != std::string::npos);
    CHECK(js.find("\"level\"") != std::string::npos);
    CHECK(js.find("\"n\": 60") != std::string::npos);
}

TEST_CASE("split and spec test json schemas") {
    const Matrix xa = Matrix::from_rows({{1.0}, {2.0}});
    const std::vector<double> ya{2.0, 4.0};
    const Matrix xb = Matrix::from_rows({{3.0}, {1.0}});
    const std::vector<double> yb{6.0, 2.0};
    SplitEstimate split_est = assemble_split_estimate(xa, xa, ya, xb, xb, yb);
    split_est.c_n = 12.5;
    split_est.split_seed = 3;
    BetaEstimate as_beta;
    as_beta.beta = split_est.beta_ab;
    as_beta.vcov = split_est.vcov_ab;
    as_beta.se = split_est.se;
    as_beta.n = split_est.n;
    const ConfidenceInterval ci = confidence_interval(as_beta, 0.05);
    const std::string js = split_to_json(split_est, ci);
    CHECK(js.find("\"beta_a\"") != std::string::npos);
    CHECK(js.find("\"beta_b\"") != std::string::npos);
    CHECK(js.find("\"c_n\": 12.5") != std::string::npos);
    CHECK(js.find("\"split_seed\": 3") != std::string::npos);

    Matrix mf(1, 1), mb(1, 1);
    mf(0, 0) = 4.0;
    mb(0, 0) = 2.0;
    const SpecTestResult res = spec_test_from_components({3.2}, {3.0}, mf, mb, 5.0, 100, 0.05);
    const std::string tjs = spec_test_to_json(res);
    for (const char* key : {"\"J\"", "\"dof\"", "\"alpha\"", "\"critical\"", "\"p_value\"",
                            "\"reject\"", "\"beta_full\"", "\"beta_baseline\""})
        CHECK(tjs.find(key) != std::string::npos);
    CHECK(tjs.find("sigma2_tilde") == std::string::npos);  // internal, not reported
}

TEST_CASE("compositional spec json round trip including infinity") {
    CompositionalSpec spec;
    spec.l_star = 1;
    spec.dims = {4, 2, 1};
    spec.active = {2, 1};
    spec.smoothness = {1.5, std::numeric_limits<double>::infinity()};
    const std::string js = comp_spec_to_json(spec);
    CHECK(js.find("\"inf\"") != std::string::npos);  // encoded as a string
    const CompositionalSpec back = comp_spec_from_json(js);
    CHECK(back.l_star == 1);
    CHECK(back.dims == spec.dims);
    CHECK(back.active == spec.active);
    CHECK(back.smoothness[0] == 1.5);
    CHECK(std::isinf(back.smoothness[1]));

    const IntrinsicSummary summary = intrinsic_summary(back, 1);
    const std::string sjs = summary_to_json(summary);
    CHECK(sjs.find("\"min_depth\"") != std::string::npos);
    CHECK(sjs.find("\"rate_exponent\"") != std::string::npos);
    CHECK(sjs.find("\"infinite_smoothness\": true") != std::string::npos);

    CHECK_THROWS_AS(comp_spec_from_json("{\"l_star\": 1}"), DomainError);
}

TEST_CASE("manifest round trip") {
    RunManifest m;
    m.command = "fit";
    m.config_json = "{\"depth\": 3}";
    m.seed = 17;
    m.version = "0.1.0";
    m.started_at = "2026-01-02T03:04:05Z";
    m.finished_at = "2026-01-02T03:04:09Z";
    m.outputs = {"estimate.json"};
    const RunManifest back = manifest_from_json(manifest_to_json(m));
    CHECK(back.command == m.command);
    // the embedded config is re-dumped, so compare it parsed
    CHECK(nlohmann::ordered_json::parse(back.config_json) ==
          nlohmann::ordered_json::parse(m.config_json));
    CHECK(back.seed == 17);
    CHECK(back.version == m.version);
    CHECK(back.started_at == m.started_at);
    CHECK(back.finished_at == m.finished_at);
    CHECK(back.outputs == m.outputs);
    CHECK_THROWS_AS(manifest_from_json("[]"), DomainError);
}
