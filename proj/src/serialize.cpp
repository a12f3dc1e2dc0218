#include "deepiv/serialize.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

#include "deepiv/errors.hpp"
#include "deepiv/simlab.hpp"

namespace deepiv {

namespace {

using ojson = nlohmann::ordered_json;

ojson real_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double real_from_json(const ojson& j, const char* what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw DomainError(std::string("json: expected a number for ") + what);
}

ojson vec_to_json(std::span<const double> v) {
    ojson arr = ojson::array();
    for (double x : v) arr.push_back(real_to_json(x));
    return arr;
}

std::vector<double> vec_from_json(const ojson& j, const char* what) {
    if (!j.is_array()) throw DomainError(std::string("json: expected an array for ") + what);
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(real_from_json(e, what));
    return out;
}

ojson matrix_to_json(const Matrix& m) {
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i)));
    return rows;
}

Matrix matrix_from_json(const ojson& j, const char* what) {
    if (!j.is_array()) throw DomainError(std::string("json: expected a matrix for ") + what);
    const std::size_t rows = j.size();
    if (rows == 0) return Matrix();
    std::vector<std::vector<double>> data;
    data.reserve(rows);
    for (const auto& r : j) data.push_back(vec_from_json(r, what));
    for (const auto& r : data)
        if (r.size() != data[0].size())
            throw DomainError(std::string("json: ragged matrix for ") + what);
    return Matrix::from_rows(data);
}

ojson parse_or_throw(const std::string& text) {
    try {
        return ojson::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("json: parse failed: ") + e.what());
    }
}

const ojson& field(const ojson& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw DomainError(std::string("json: missing field '") + key + "'");
    return *it;
}

std::size_t count_from_json(const ojson& j, const char* what) {
    if (!j.is_number_unsigned())
        throw DomainError(std::string("json: expected a non-negative integer for ") + what);
    return j.get<std::size_t>();
}

ojson network_to_ojson(const MlpNetwork& net) {
    net.check();
    ojson j;
    j["d"] = net.d;
    j["q"] = net.q;
    j["L"] = net.L;
    j["W"] = net.W;
    ojson weights = ojson::array();
    for (const Matrix& a : net.weights) weights.push_back(matrix_to_json(a));
    j["weights"] = std::move(weights);
    ojson shifts = ojson::array();
    for (const auto& v : net.shifts) shifts.push_back(vec_to_json(v));
    j["shifts"] = std::move(shifts);
    return j;
}

MlpNetwork network_from_ojson(const ojson& j) {
    MlpNetwork net;
    net.d = count_from_json(field(j, "d"), "d");
    net.q = count_from_json(field(j, "q"), "q");
    net.L = count_from_json(field(j, "L"), "L");
    net.W = count_from_json(field(j, "W"), "W");
    const ojson& weights = field(j, "weights");
    if (!weights.is_array()) throw DomainError("json: weights must be an array");
    for (const auto& a : weights) net.weights.push_back(matrix_from_json(a, "weights"));
    const ojson& shifts = field(j, "shifts");
    if (!shifts.is_array()) throw DomainError("json: shifts must be an array");
    for (const auto& v : shifts) net.shifts.push_back(vec_from_json(v, "shifts"));
    net.check();
    return net;
}

}  // namespace

std::string network_to_json(const MlpNetwork& net) { return network_to_ojson(net).dump(2); }

MlpNetwork network_from_json(const std::string& text) {
    return network_from_ojson(parse_or_throw(text));
}

std::string model_to_json(const FirstStageModel& model) {
    ojson j;
    j["family"] = family_name(model.family);
    j["d"] = model.d;
    j["q"] = model.q;
    j["truncated"] = model.truncated;
    j["c_n"] = real_to_json(model.c_n);
    ojson payload;
    switch (model.family) {
        case FsFamily::dnn:
            payload = network_to_ojson(model.net);
            break;
        case FsFamily::tensor_spline:
        case FsFamily::additive_spline: {
            payload["degree"] = SplineSpec::degree;
            payload["knots"] = vec_to_json(model.spline.knots);
            payload["lo"] = real_to_json(model.spline.lo);
            payload["hi"] = real_to_json(model.spline.hi);
            payload["interaction"] =
                model.spline.interaction == SplineSpec::Interaction::tensor ? "tensor"
                                                                            : "additive";
            payload["coef"] = matrix_to_json(model.coef);
            payload["intercepts"] = vec_to_json(model.intercepts);
            break;
        }
        case FsFamily::linear:
            payload["coef"] = matrix_to_json(model.coef);
            break;
        case FsFamily::oracle:
            if (model.oracle_name != "dgp1" && model.oracle_name != "dgp2")
                throw DomainError(
                    "oracle model with a custom conditional mean is not serializable");
            payload["name"] = model.oracle_name;
            break;
    }
    j["payload"] = std::move(payload);
    return j.dump(2);
}

FirstStageModel model_from_json(const std::string& text) {
    const ojson j = parse_or_throw(text);
    FirstStageModel model;
    model.family = family_from_name(field(j, "family").get<std::string>());
    model.d = count_from_json(field(j, "d"), "d");
    model.q = count_from_json(field(j, "q"), "q");
    if (!field(j, "truncated").is_boolean()) throw DomainError("json: truncated must be a bool");
    model.truncated = field(j, "truncated").get<bool>();
    model.c_n = real_from_json(field(j, "c_n"), "c_n");
    const ojson& payload = field(j, "payload");
    switch (model.family) {
        case FsFamily::dnn:
            model.net = network_from_ojson(payload);
            if (model.net.d != model.d || model.net.q != model.q)
                throw DomainError("json: network dims disagree with model dims");
            break;
        case FsFamily::tensor_spline:
        case FsFamily::additive_spline: {
            if (count_from_json(field(payload, "degree"), "degree") !=
                static_cast<std::size_t>(SplineSpec::degree))
                throw DomainError("json: unsupported spline degree");
            model.spline.knots = vec_from_json(field(payload, "knots"), "knots");
            model.spline.lo = real_from_json(field(payload, "lo"), "lo");
            model.spline.hi = real_from_json(field(payload, "hi"), "hi");
            const std::string inter = field(payload, "interaction").get<std::string>();
            if (inter == "tensor") model.spline.interaction = SplineSpec::Interaction::tensor;
            else if (inter == "additive") model.spline.interaction = SplineSpec::Interaction::additive;
            else throw DomainError("json: unknown interaction '" + inter + "'");
            model.spline.check();
            model.coef = matrix_from_json(field(payload, "coef"), "coef");
            model.intercepts = vec_from_json(field(payload, "intercepts"), "intercepts");
            if (model.intercepts.size() != model.q || model.coef.cols() != model.q)
                throw DomainError("json: spline coefficient shape disagrees with q");
            break;
        }
        case FsFamily::linear:
            model.coef = matrix_from_json(field(payload, "coef"), "coef");
            if (model.coef.rows() != 1 + model.d || model.coef.cols() != model.q)
                throw DomainError("json: linear coefficient shape disagrees with (d, q)");
            break;
        case FsFamily::oracle: {
            const std::string name = field(payload, "name").get<std::string>();
            DgpSpec spec;
            spec.kind = dgp_from_name(name);
            spec.d = model.d;
            if (model.q != 1) throw DomainError("json: built-in oracles have q == 1");
            ScalarF0 f0 = dgp_f0(spec);
            FirstStageModel rebuilt =
                oracle_model([f0](std::span<const double> z) { return std::vector<double>{f0(z)}; },
                             model.d, 1, name);
            rebuilt.truncated = model.truncated;
            rebuilt.c_n = model.c_n;
            return rebuilt;
        }
    }
    return model;
}

namespace {

ojson ci_to_json(const ConfidenceInterval& ci) {
    ojson j;
    j["level"] = real_to_json(ci.level);
    j["lower"] = vec_to_json(ci.lower);
    j["upper"] = vec_to_json(ci.upper);
    return j;
}

}  // namespace

std::string estimate_to_json(const BetaEstimate& est, const ConfidenceInterval& ci) {
    ojson j;
    j["beta"] = vec_to_json(est.beta);
    j["se"] = vec_to_json(est.se);
    j["vcov"] = matrix_to_json(est.vcov);
    j["n"] = est.n;
    j["sigma2"] = real_to_json(est.residual_variance);
    j["ci"] = ci_to_json(ci);
    return j.dump(2);
}

std::string split_to_json(const SplitEstimate& est, const ConfidenceInterval& ci) {
    ojson j;
    j["beta"] = vec_to_json(est.beta_ab);
    j["beta_a"] = vec_to_json(est.beta_a);
    j["beta_b"] = vec_to_json(est.beta_b);
    j["se"] = vec_to_json(est.se);
    j["vcov"] = matrix_to_json(est.vcov_ab);
    j["n"] = est.n;
    j["sigma2"] = real_to_json(est.sigma2);
    j["c_n"] = real_to_json(est.c_n);
    j["split_seed"] = est.split_seed;
    j["ci"] = ci_to_json(ci);
    return j.dump(2);
}

std::string spec_test_to_json(const SpecTestResult& result) {
    ojson j;
    j["J"] = real_to_json(result.j_stat);
    j["dof"] = result.dof;
    j["alpha"] = real_to_json(result.alpha);
    j["critical"] = real_to_json(result.critical_value);
    j["p_value"] = real_to_json(result.p_value);
    j["reject"] = result.reject;
    j["beta_full"] = vec_to_json(result.beta_full);
    j["beta_baseline"] = vec_to_json(result.beta_baseline);
    return j.dump(2);
}

std::string comp_spec_to_json(const CompositionalSpec& spec) {
    ojson j;
    j["l_star"] = spec.l_star;
    j["dims"] = spec.dims;
    j["active"] = spec.active;
    j["smoothness"] = vec_to_json(spec.smoothness);
    return j.dump(2);
}

CompositionalSpec comp_spec_from_json(const std::string& text) {
    const ojson j = parse_or_throw(text);
    CompositionalSpec spec;
    spec.l_star = count_from_json(field(j, "l_star"), "l_star");
    for (const auto& e : field(j, "dims")) spec.dims.push_back(count_from_json(e, "dims"));
    for (const auto& e : field(j, "active")) spec.active.push_back(count_from_json(e, "active"));
    spec.smoothness = vec_from_json(field(j, "smoothness"), "smoothness");
    spec.check();
    return spec;
}

std::string summary_to_json(const IntrinsicSummary& summary) {
    ojson j;
    j["p_star_per_layer"] = vec_to_json(summary.p_star_per_layer);
    j["i_star"] = summary.i_star;
    j["p_star"] = real_to_json(summary.p_star);
    j["t_star"] = summary.t_star;
    j["rate_exponent"] = real_to_json(summary.rate_exponent);
    j["lw_exponent"] = real_to_json(summary.lw_exponent);
    j["min_depth"] = real_to_json(summary.min_depth);
    j["min_width"] = real_to_json(summary.min_width);
    j["infinite_smoothness"] = summary.infinite_smoothness;
    return j.dump(2);
}

std::string manifest_to_json(const RunManifest& manifest) {
    ojson j;
    j["command"] = manifest.command;
    j["config"] = parse_or_throw(manifest.config_json);
    j["seed"] = manifest.seed;
    j["version"] = manifest.version;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["outputs"] = manifest.outputs;
    return j.dump(2);
}

RunManifest manifest_from_json(const std::string& text) {
    const ojson j = parse_or_throw(text);
    RunManifest m;
    m.command = field(j, "command").get<std::string>();
    m.config_json = field(j, "config").dump(2);
    m.seed = field(j, "seed").get<std::uint64_t>();
    m.version = field(j, "version").get<std::string>();
    m.started_at = field(j, "started_at").get<std::string>();
    m.finished_at = field(j, "finished_at").get<std::string>();
    for (const auto& e : field(j, "outputs")) m.outputs.push_back(e.get<std::string>());
    return m;
}

}  // namespace deepiv
