#include "deepiv/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "deepiv/csv.hpp"
#include "deepiv/errors.hpp"
#include "deepiv/parallel.hpp"

namespace deepiv {

std::string dgp_name(DgpKind kind) {
    switch (kind) {
        case DgpKind::dgp1: return "dgp1";
        case DgpKind::dgp2: return "dgp2";
        case DgpKind::custom: return "custom";
    }
    throw DomainError("unknown dgp kind");
}

DgpKind dgp_from_name(const std::string& name) {
    if (name == "dgp1") return DgpKind::dgp1;
    if (name == "dgp2") return DgpKind::dgp2;
    if (name == "custom") return DgpKind::custom;
    throw DomainError("unknown dgp '" + name + "' (expected dgp1, dgp2, custom)");
}

void DgpSpec::check() const {
    if (n == 0) throw DomainError("dgp: n must be positive");
    if (!(z_low < z_high)) throw DomainError("dgp: need z_low < z_high");
    if (!std::isfinite(beta0) || !std::isfinite(noise_scale))
        throw DomainError("dgp: beta0 and noise_scale must be finite");
    if (kind == DgpKind::custom) {
        if (!custom_f0) throw DomainError("dgp: custom kind needs custom_f0");
        if (d == 0) throw DomainError("dgp: d must be positive");
    } else if (d < 4) {
        throw DomainError("dgp: built-in kinds need d >= 4");
    }
}

ScalarF0 dgp_f0(const DgpSpec& spec) {
    switch (spec.kind) {
        case DgpKind::dgp1:
            return [](std::span<const double> z) {
                return z[0] * std::sin(z[1]) + z[2] * z[3];
            };
        case DgpKind::dgp2:
            return [](std::span<const double> z) {
                return 3.0 * z[0] + 4.0 * z[1] - 2.0 * z[2] + z[3];
            };
        case DgpKind::custom:
            if (!spec.custom_f0) throw DomainError("dgp: custom kind needs custom_f0");
            return spec.custom_f0;
    }
    throw DomainError("unknown dgp kind");
}

DgpDraw gen_dgp(const DgpSpec& spec, RngStream& rng) {
    spec.check();
    const std::size_t n = spec.n;
    const std::size_t d = spec.d;
    DgpDraw draw;
    draw.beta0 = spec.beta0;
    draw.f0 = dgp_f0(spec);
    draw.epsilon.resize(n);
    draw.data.y.resize(n);
    draw.data.x = Matrix(n, 1);
    draw.data.z = Matrix(n, d);
    const bool indep = spec.kind == DgpKind::custom && spec.custom_independent_noise;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j)
            draw.data.z(i, j) = rng.uniform(spec.z_low, spec.z_high);
        const double eps = rng.normal();
        draw.epsilon[i] = eps;
        const double x = draw.f0(draw.data.z.row(i)) + eps;
        draw.data.x(i, 0) = x;
        const double shock = indep ? rng.normal() : eps;
        draw.data.y[i] = spec.beta0 * x + spec.noise_scale * shock;
    }
    draw.data.validate();
    return draw;
}

BetaEstimate ols_estimator(const Dataset& data) {
    data.validate();
    return make_estimate(data.x, data.x, data.y);
}

BetaEstimate oracle_estimator(const Dataset& data, const ScalarF0& f0) {
    data.validate();
    if (!f0) throw DomainError("oracle_estimator: empty f0");
    if (data.q() != 1) throw ShapeMismatch("oracle_estimator: scalar f0 needs q == 1");
    Matrix x_hat(data.n(), 1);
    for (std::size_t i = 0; i < data.n(); ++i) x_hat(i, 0) = f0(data.z.row(i));
    return make_estimate(x_hat, data.x, data.y);
}

double first_stage_rmse(const Matrix& pred, const Matrix& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw ShapeMismatch("first_stage_rmse: prediction and truth shapes differ");
    const std::size_t total = pred.rows() * pred.cols();
    if (total == 0) throw DomainError("first_stage_rmse: empty input");
    double acc = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
        const double diff = pred.data()[k] - truth.data()[k];
        acc += diff * diff;
    }
    return std::sqrt(acc / static_cast<double>(total));
}

double first_stage_rmse(const FirstStageModel& model, const ScalarF0& f0,
                        const Matrix& eval_z) {
    if (!f0) throw DomainError("first_stage_rmse: empty f0");
    if (model.q != 1) throw ShapeMismatch("first_stage_rmse: scalar f0 needs q == 1");
    Matrix truth(eval_z.rows(), 1);
    for (std::size_t i = 0; i < eval_z.rows(); ++i) truth(i, 0) = f0(eval_z.row(i));
    return first_stage_rmse(predict(model, eval_z), truth);
}

std::string estimator_name(McEstimator est) {
    switch (est) {
        case McEstimator::dnn: return "dnn";
        case McEstimator::pspline: return "pspline";
        case McEstimator::aspline: return "aspline";
        case McEstimator::lr: return "lr";
        case McEstimator::ols: return "ols";
        case McEstimator::oracle: return "oracle";
    }
    throw DomainError("unknown estimator");
}

McEstimator estimator_from_name(const std::string& name) {
    if (name == "dnn") return McEstimator::dnn;
    if (name == "pspline" || name == "tensor_spline") return McEstimator::pspline;
    if (name == "aspline" || name == "additive_spline") return McEstimator::aspline;
    if (name == "lr" || name == "linear") return McEstimator::lr;
    if (name == "ols") return McEstimator::ols;
    if (name == "oracle") return McEstimator::oracle;
    throw DomainError("unknown estimator '" + name +
                      "' (expected dnn, pspline, aspline, lr, ols, oracle)");
}

void McConfig::check() const {
    dgp.check();
    if (sample_sizes.empty()) throw DomainError("mc: sample_sizes empty");
    for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
        if (sample_sizes[i] == 0) throw DomainError("mc: sample sizes must be positive");
        if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1])
            throw DomainError("mc: sample_sizes must be strictly increasing");
    }
    if (replications == 0) throw DomainError("mc: replications must be >= 1");
    if (estimators.empty()) throw DomainError("mc: estimator list empty");
    for (std::size_t i = 0; i < estimators.size(); ++i)
        for (std::size_t j = i + 1; j < estimators.size(); ++j)
            if (estimators[i] == estimators[j])
                throw DomainError("mc: duplicate estimator " + estimator_name(estimators[i]));
    if (!(ci_level > 0.0 && ci_level < 1.0)) throw DomainError("mc: ci_level must be in (0,1)");
    if (eval_points == 0) throw DomainError("mc: eval_points must be positive");
    const bool wants_dnn =
        std::find(estimators.begin(), estimators.end(), McEstimator::dnn) != estimators.end();
    if (wants_dnn) {
        if (grid.empty()) throw DomainError("mc: dnn requested but network grid empty");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i].depth == 0 || grid[i].width == 0)
                throw DomainError("mc: network grid entries need depth >= 1 and width >= 1");
            for (std::size_t j = i + 1; j < grid.size(); ++j)
                if (grid[i].depth == grid[j].depth && grid[i].width == grid[j].width)
                    throw DomainError("mc: duplicate network grid entry");
        }
    }
    for (McEstimator est : estimators) {
        if (est == McEstimator::pspline && pspline_knots == 0)
            throw DomainError("mc: pspline_knots must be positive");
        if (est == McEstimator::aspline && aspline_knots == 0)
            throw DomainError("mc: aspline_knots must be positive");
    }
}

namespace {

struct EstCell {
    McEstimator est;
    std::size_t depth = 0;
    std::size_t width = 0;
};

struct RepRecord {
    bool ok = false;
    double beta = 0.0;
    bool covered = false;
    double fs = std::numeric_limits<double>::quiet_NaN();
};

FirstStageModel fit_cell_model(const EstCell& cell, const McConfig& cfg,
                               const DgpDraw& draw, std::uint64_t seed) {
    switch (cell.est) {
        case McEstimator::dnn: {
            TrainConfig tc = cfg.train;
            tc.seed = seed;
            return fit_dnn(draw.data, cell.depth, cell.width, tc);
        }
        case McEstimator::pspline:
        case McEstimator::aspline: {
            const bool tensor = cell.est == McEstimator::pspline;
            SplineSpec sp = SplineSpec::equally_spaced(
                tensor ? cfg.pspline_knots : cfg.aspline_knots, cfg.dgp.z_low, cfg.dgp.z_high,
                tensor ? SplineSpec::Interaction::tensor : SplineSpec::Interaction::additive);
            LassoCvSpec cv = cfg.cv;
            cv.seed = seed;
            return fit_spline_lasso(draw.data, sp, cv);
        }
        case McEstimator::lr:
            return fit_linear(draw.data);
        case McEstimator::oracle: {
            auto f0 = draw.f0;
            return oracle_model(
                [f0](std::span<const double> z) { return std::vector<double>{f0(z)}; },
                cfg.dgp.d, 1, dgp_name(cfg.dgp.kind));
        }
        case McEstimator::ols:
            break;
    }
    throw DomainError("ols has no first-stage model");
}

RepRecord run_cell(const EstCell& cell, const McConfig& cfg, const DgpDraw& draw,
                   std::uint64_t seed, double alpha, const Matrix& eval_z,
                   const Matrix& eval_truth) {
    RepRecord rec;
    BetaEstimate est;
    if (cell.est == McEstimator::ols) {
        est = ols_estimator(draw.data);
    } else {
        FirstStageModel model = fit_cell_model(cell, cfg, draw, seed);
        Matrix x_hat = predict(model, draw.data.z);
        est = make_estimate(x_hat, draw.data.x, draw.data.y);
        rec.fs = first_stage_rmse(predict(model, eval_z), eval_truth);
    }
    ConfidenceInterval ci = confidence_interval(est, alpha);
    rec.ok = true;
    rec.beta = est.beta[0];
    rec.covered = ci.lower[0] <= draw.beta0 && draw.beta0 <= ci.upper[0];
    return rec;
}

}  // namespace

McResult run_monte_carlo(const McConfig& cfg) {
    cfg.check();

    std::vector<EstCell> layout;
    for (McEstimator est : cfg.estimators) {
        if (est == McEstimator::dnn) {
            for (const NetSize& g : cfg.grid) layout.push_back({est, g.depth, g.width});
        } else {
            layout.push_back({est, 0, 0});
        }
    }
    const std::size_t n_cells = layout.size();
    if (n_cells > 256) throw DomainError("mc: too many estimator cells (max 256)");
    const std::size_t n_sizes = cfg.sample_sizes.size();
    const std::size_t reps = cfg.replications;

    // a shared fresh sample for first-stage RMSE; its stream id cannot
    // collide with replication ids
    constexpr std::uint64_t kEvalStream = (1ULL << 63) + 1;
    RngStream eval_rng(cfg.master_seed, kEvalStream);
    Matrix eval_z(cfg.eval_points, cfg.dgp.d);
    for (std::size_t i = 0; i < cfg.eval_points; ++i)
        for (std::size_t j = 0; j < cfg.dgp.d; ++j)
            eval_z(i, j) = eval_rng.uniform(cfg.dgp.z_low, cfg.dgp.z_high);
    const ScalarF0 f0 = dgp_f0(cfg.dgp);
    Matrix eval_truth(cfg.eval_points, 1);
    for (std::size_t i = 0; i < cfg.eval_points; ++i) eval_truth(i, 0) = f0(eval_z.row(i));

    const double alpha = 1.0 - cfg.ci_level;
    std::vector<RepRecord> records(n_sizes * reps * n_cells);

    run_parallel(n_sizes * reps, [&](std::size_t task) {
        const std::size_t n_idx = task / reps;
        const std::size_t rep = task % reps;
        DgpSpec spec_n = cfg.dgp;
        spec_n.n = cfg.sample_sizes[n_idx];
        RngStream data_rng = RngStream(cfg.master_seed, rep).substream(1 + n_idx);
        const DgpDraw draw = gen_dgp(spec_n, data_rng);
        const std::uint64_t rep_base = derive_seed(cfg.master_seed, rep);
        RepRecord* out = &records[task * n_cells];
        for (std::size_t c = 0; c < n_cells; ++c) {
            const std::uint64_t cell_seed =
                derive_seed(rep_base, (static_cast<std::uint64_t>(n_idx) << 8) + c);
            try {
                out[c] = run_cell(layout[c], cfg, draw, cell_seed, alpha, eval_z, eval_truth);
            } catch (const Error&) {
                out[c] = RepRecord{};  // failure is data, recorded per cell
            }
        }
    });

    McResult result;
    result.dgp = dgp_name(cfg.dgp.kind);
    result.ci_level = cfg.ci_level;
    result.cells.reserve(n_cells * n_sizes);
    for (std::size_t c = 0; c < n_cells; ++c) {
        for (std::size_t n_idx = 0; n_idx < n_sizes; ++n_idx) {
            McCell cell;
            cell.estimator = layout[c].est;
            cell.depth = layout[c].depth;
            cell.width = layout[c].width;
            cell.n = cfg.sample_sizes[n_idx];
            double beta_sum = 0.0, sq_sum = 0.0, fs_sum = 0.0, fs_sq = 0.0;
            std::size_t ok = 0, covered = 0, fs_n = 0;
            for (std::size_t rep = 0; rep < reps; ++rep) {
                const RepRecord& r = records[(n_idx * reps + rep) * n_cells + c];
                if (!r.ok) continue;
                ++ok;
                beta_sum += r.beta;
                const double diff = r.beta - cfg.dgp.beta0;
                sq_sum += diff * diff;
                if (r.covered) ++covered;
                if (std::isfinite(r.fs)) {
                    ++fs_n;
                    fs_sum += r.fs;
                    fs_sq += r.fs * r.fs;
                }
            }
            cell.rep_count = ok;
            cell.failures = reps - ok;
            if (ok > 0) {
                cell.beta_mean = beta_sum / static_cast<double>(ok);
                cell.beta_rmse = std::sqrt(sq_sum / static_cast<double>(ok));
                cell.coverage = static_cast<double>(covered) / static_cast<double>(ok);
                cell.coverage_se =
                    std::sqrt(cell.coverage * (1.0 - cell.coverage) / static_cast<double>(ok));
            }
            if (fs_n > 0) {
                cell.fs_rmse = fs_sum / static_cast<double>(fs_n);
                if (fs_n > 1) {
                    const double var = (fs_sq - static_cast<double>(fs_n) * cell.fs_rmse * cell.fs_rmse) /
                                       static_cast<double>(fs_n - 1);
                    cell.fs_rmse_sd = std::sqrt(std::max(0.0, var));
                }
            }
            result.cells.push_back(cell);
        }
    }

    std::sort(result.cells.begin(), result.cells.end(), [](const McCell& a, const McCell& b) {
        const std::string an = estimator_name(a.estimator);
        const std::string bn = estimator_name(b.estimator);
        if (an != bn) return an < bn;
        if (a.depth != b.depth) return a.depth < b.depth;
        if (a.width != b.width) return a.width < b.width;
        return a.n < b.n;
    });
    return result;
}

std::string mc_result_to_csv(const McResult& result) {
    std::string out =
        "dgp,estimator,n,L,W,rep_count,beta_mean,beta_rmse,fs_rmse,coverage,coverage_se,failures\n";
    for (const McCell& c : result.cells) {
        out += result.dgp;
        out += ',';
        out += estimator_name(c.estimator);
        out += ',';
        out += std::to_string(c.n);
        out += ',';
        out += std::to_string(c.depth);
        out += ',';
        out += std::to_string(c.width);
        out += ',';
        out += std::to_string(c.rep_count);
        out += ',';
        out += format_double(c.beta_mean);
        out += ',';
        out += format_double(c.beta_rmse);
        out += ',';
        out += format_double(c.fs_rmse);
        out += ',';
        out += format_double(c.coverage);
        out += ',';
        out += format_double(c.coverage_se);
        out += ',';
        out += std::to_string(c.failures);
        out += '\n';
    }
    return out;
}

namespace {

double figure_value(const McCell& c, int family) {
    switch (family) {
        case 0: return c.fs_rmse;
        case 1: return c.beta_rmse;
        default: return c.coverage;
    }
}

}  // namespace

std::vector<FigureTable> figure_tables(const McResult& result) {
    const int slot = result.dgp == "dgp2" ? 1 : 0;
    std::size_t dnn_depth = 0, dnn_width = 0;
    bool have_dnn = false;
    for (const McCell& c : result.cells) {
        if (c.estimator == McEstimator::dnn) {
            dnn_depth = c.depth;
            dnn_width = c.width;
            have_dnn = true;
            break;
        }
    }

    std::vector<FigureTable> tables;
    for (int family = 0; family < 3; ++family) {
        const int base = 1 + family * 4;
        std::string by_est = "x,series,value\n";
        // the by-estimator view keeps a single dnn series (the first grid size)
        for (const McCell& c : result.cells) {
            if (c.estimator == McEstimator::dnn &&
                (c.depth != dnn_depth || c.width != dnn_width))
                continue;
            const double v = figure_value(c, family);
            if (!std::isfinite(v)) continue;
            by_est += std::to_string(c.n) + "," + estimator_name(c.estimator) + "," +
                      format_double(v) + "\n";
        }
        tables.push_back({"fig" + std::to_string(base + slot), by_est});

        if (have_dnn) {
            std::string by_grid = "x,series,value\n";
            for (const McCell& c : result.cells) {
                if (c.estimator != McEstimator::dnn) continue;
                const double v = figure_value(c, family);
                if (!std::isfinite(v)) continue;
                by_grid += std::to_string(c.n) + ",W" + std::to_string(c.width) + "_L" +
                           std::to_string(c.depth) + "," + format_double(v) + "\n";
            }
            tables.push_back({"fig" + std::to_string(base + 2 + slot), by_grid});
        }
    }
    return tables;
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

std::string fixed2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string svg_line_chart(const std::string& figure_csv, const std::string& title) {
    // parse the {x,series,value} table
    std::vector<std::string> series_order;
    struct Point {
        double x, v;
    };
    std::vector<std::vector<Point>> series_points;
    std::istringstream in(figure_csv);
    std::string line;
    if (!std::getline(in, line) || (line != "x,series,value" && line != "x,series,value\r"))
        throw DomainError("svg: expected header 'x,series,value'");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) throw DomainError("svg: malformed row in figure csv");
        const double x = parse_double_field(std::string_view(line).substr(0, c1), line_no, 1);
        const std::string name = line.substr(c1 + 1, c2 - c1 - 1);
        const double v =
            parse_double_field(std::string_view(line).substr(c2 + 1), line_no, 3);
        std::size_t idx = series_order.size();
        for (std::size_t s = 0; s < series_order.size(); ++s)
            if (series_order[s] == name) {
                idx = s;
                break;
            }
        if (idx == series_order.size()) {
            series_order.push_back(name);
            series_points.emplace_back();
        }
        series_points[idx].push_back({x, v});
    }
    if (series_order.empty()) throw DomainError("svg: figure csv has no rows");

    double xmin = series_points[0][0].x, xmax = xmin;
    double vmin = series_points[0][0].v, vmax = vmin;
    for (auto& pts : series_points) {
        std::stable_sort(pts.begin(), pts.end(),
                         [](const Point& a, const Point& b) { return a.x < b.x; });
        for (const Point& p : pts) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            vmin = std::min(vmin, p.v);
            vmax = std::max(vmax, p.v);
        }
    }
    if (xmax == xmin) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    const double pad = (vmax - vmin) == 0.0 ? 1.0 : 0.05 * (vmax - vmin);
    vmin -= pad;
    vmax += pad;

    const double width = 640.0, height = 420.0;
    const double left = 70.0, right = 150.0, top = 40.0, bottom = 50.0;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double v) { return top + (vmax - v) / (vmax - vmin) * plot_h; };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    constexpr std::size_t n_colors = sizeof(palette) / sizeof(palette[0]);

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
           "viewBox=\"0 0 640 420\">\n";
    svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fixed2(left + plot_w / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
           xml_escape(title) + "</text>\n";
    svg += "<rect x=\"" + fixed2(left) + "\" y=\"" + fixed2(top) + "\" width=\"" +
           fixed2(plot_w) + "\" height=\"" + fixed2(plot_h) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 4.0;
        const double fv = vmin + (vmax - vmin) * t / 4.0;
        svg += "<line x1=\"" + fixed2(px(fx)) + "\" y1=\"" + fixed2(top + plot_h) + "\" x2=\"" +
               fixed2(px(fx)) + "\" y2=\"" + fixed2(top + plot_h + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fixed2(px(fx)) + "\" y=\"" + fixed2(top + plot_h + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               tick_label(fx) + "</text>\n";
        svg += "<line x1=\"" + fixed2(left - 5) + "\" y1=\"" + fixed2(py(fv)) + "\" x2=\"" +
               fixed2(left) + "\" y2=\"" + fixed2(py(fv)) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fixed2(left - 8) + "\" y=\"" + fixed2(py(fv) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               tick_label(fv) + "</text>\n";
    }
    for (std::size_t s = 0; s < series_order.size(); ++s) {
        const char* color = palette[s % n_colors];
        std::string points;
        for (const Point& p : series_points[s]) {
            if (!points.empty()) points += ' ';
            points += fixed2(px(p.x)) + "," + fixed2(py(p.v));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        const double ly = top + 14.0 + 16.0 * static_cast<double>(s);
        svg += "<rect x=\"" + fixed2(left + plot_w + 12) + "\" y=\"" + fixed2(ly - 8) +
               "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
        svg += "<text x=\"" + fixed2(left + plot_w + 26) + "\" y=\"" + fixed2(ly + 1) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + xml_escape(series_order[s]) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace deepiv
