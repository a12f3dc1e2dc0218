#include "deepiv/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepiv/errors.hpp"

namespace deepiv {

namespace {

// a * b^T with a k-ascending dot product per entry, the same accumulation
// order as matvec: row i of the result equals matvec(b, a.row(i)) bitwise.
Matrix mul_abt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ShapeMismatch("mul_abt: inner dimensions differ");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto ai = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const auto bj = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += ai[k] * bj[k];
            c(i, j) = acc;
        }
    }
    return c;
}

MlpGradient zero_like(const MlpNetwork& net) {
    MlpGradient g;
    g.weights.reserve(net.weights.size());
    g.shifts.reserve(net.shifts.size());
    for (const Matrix& a : net.weights) g.weights.emplace_back(a.rows(), a.cols());
    for (const auto& v : net.shifts) g.shifts.emplace_back(v.size(), 0.0);
    return g;
}

}  // namespace

void MlpNetwork::check() const {
    if (d < 1 || q < 1 || L < 1 || W < 1)
        throw DomainError("mlp: all of d, q, L, W must be >= 1");
    if (weights.size() != L + 1 || shifts.size() != L + 1)
        throw ShapeMismatch("mlp: expected L+1 weight matrices and shift vectors");
    for (std::size_t l = 0; l <= L; ++l) {
        const std::size_t out_dim = (l == L) ? q : W;
        const std::size_t in_dim = (l == 0) ? d : W;
        if (weights[l].rows() != out_dim || weights[l].cols() != in_dim)
            throw ShapeMismatch("mlp: weight matrix " + std::to_string(l + 1) +
                                " has wrong shape");
        if (shifts[l].size() != out_dim)
            throw ShapeMismatch("mlp: shift vector " + std::to_string(l + 1) +
                                " has wrong length");
        if (!all_finite(weights[l]) || !all_finite(std::span<const double>(shifts[l])))
            throw DomainError("mlp: non-finite parameter");
    }
}

MlpNetwork init_network(std::size_t d, std::size_t q, std::size_t L, std::size_t W,
                        RngStream& rng) {
    if (d < 1 || q < 1 || L < 1 || W < 1)
        throw DomainError("init_network: all of d, q, L, W must be >= 1");
    MlpNetwork net;
    net.d = d;
    net.q = q;
    net.L = L;
    net.W = W;
    net.weights.reserve(L + 1);
    net.shifts.reserve(L + 1);
    for (std::size_t l = 0; l <= L; ++l) {
        const std::size_t out_dim = (l == L) ? q : W;
        const std::size_t in_dim = (l == 0) ? d : W;
        Matrix a(out_dim, in_dim);
        const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
        for (std::size_t i = 0; i < out_dim; ++i)
            for (std::size_t j = 0; j < in_dim; ++j) a(i, j) = rng.uniform(-limit, limit);
        net.weights.push_back(std::move(a));
        net.shifts.emplace_back(out_dim, 0.0);
    }
    return net;
}

std::vector<double> forward(const MlpNetwork& net, std::span<const double> z) {
    if (z.size() != net.d) throw ShapeMismatch("forward: input length != d");
    std::vector<double> h(z.begin(), z.end());
    for (std::size_t l = 0; l < net.L; ++l) {
        std::vector<double> u = matvec(net.weights[l], h);
        for (std::size_t j = 0; j < u.size(); ++j)
            u[j] = std::max(u[j] - net.shifts[l][j], 0.0);
        h = std::move(u);
    }
    std::vector<double> out = matvec(net.weights[net.L], h);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += net.shifts[net.L][j];
    return out;
}

Matrix forward_batch(const MlpNetwork& net, const Matrix& z) {
    if (z.cols() != net.d) throw ShapeMismatch("forward_batch: input width != d");
    Matrix h = z;
    for (std::size_t l = 0; l < net.L; ++l) {
        Matrix u = mul_abt(h, net.weights[l]);
        for (std::size_t i = 0; i < u.rows(); ++i)
            for (std::size_t j = 0; j < u.cols(); ++j)
                u(i, j) = std::max(u(i, j) - net.shifts[l][j], 0.0);
        h = std::move(u);
    }
    Matrix out = mul_abt(h, net.weights[net.L]);
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += net.shifts[net.L][j];
    return out;
}

double loss(const MlpNetwork& net, const Matrix& x, const Matrix& z) {
    if (x.rows() != z.rows()) throw ShapeMismatch("loss: x and z row counts differ");
    if (x.cols() != net.q) throw ShapeMismatch("loss: x width != q");
    if (x.rows() == 0) throw DomainError("loss: empty sample");
    const Matrix out = forward_batch(net, z);
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double row_sum = 0.0;
        for (std::size_t s = 0; s < x.cols(); ++s) {
            const double r = x(i, s) - out(i, s);
            row_sum += r * r;
        }
        total += row_sum;
    }
    return total / static_cast<double>(x.rows());
}

MlpGradient gradient(const MlpNetwork& net, const Matrix& x_batch, const Matrix& z_batch) {
    if (x_batch.rows() != z_batch.rows())
        throw ShapeMismatch("gradient: x and z row counts differ");
    if (x_batch.rows() == 0) throw DomainError("gradient: empty batch");
    if (x_batch.cols() != net.q || z_batch.cols() != net.d)
        throw ShapeMismatch("gradient: batch width mismatch");

    const std::size_t nb = x_batch.rows();

    // forward, keeping each hidden activation for the backward pass
    std::vector<Matrix> hidden(net.L + 1);
    hidden[0] = z_batch;
    for (std::size_t l = 0; l < net.L; ++l) {
        Matrix u = mul_abt(hidden[l], net.weights[l]);
        for (std::size_t i = 0; i < u.rows(); ++i)
            for (std::size_t j = 0; j < u.cols(); ++j)
                u(i, j) = std::max(u(i, j) - net.shifts[l][j], 0.0);
        hidden[l + 1] = std::move(u);
    }
    Matrix out = mul_abt(hidden[net.L], net.weights[net.L]);
    for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = 0; j < net.q; ++j) out(i, j) += net.shifts[net.L][j];

    MlpGradient g = zero_like(net);

    // d loss / d output = (2/nb) (out - x)
    Matrix delta(nb, net.q);
    const double scale = 2.0 / static_cast<double>(nb);
    for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = 0; j < net.q; ++j)
            delta(i, j) = scale * (out(i, j) - x_batch(i, j));

    // output layer: out = h_L A_{L+1}^T + v_{L+1}
    for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = 0; j < net.q; ++j) {
            g.shifts[net.L][j] += delta(i, j);
            for (std::size_t k = 0; k < net.W; ++k)
                g.weights[net.L](j, k) += delta(i, j) * hidden[net.L](i, k);
        }

    // hidden layers, walking backwards; shifts enter as relu(u - v), so
    // their gradient carries a minus sign
    Matrix d_h = matmul(delta, net.weights[net.L]);  // nb × W
    for (std::size_t l = net.L; l-- > 0;) {
        const Matrix& h_out = hidden[l + 1];  // relu output of layer l
        const Matrix& h_in = hidden[l];
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = 0; j < net.W; ++j)
                if (h_out(i, j) <= 0.0) d_h(i, j) = 0.0;
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = 0; j < net.W; ++j) {
                const double dij = d_h(i, j);
                if (dij == 0.0) continue;
                g.shifts[l][j] -= dij;
                for (std::size_t k = 0; k < h_in.cols(); ++k)
                    g.weights[l](j, k) += dij * h_in(i, k);
            }
        if (l > 0) d_h = matmul(d_h, net.weights[l]);
    }
    return g;
}

namespace {

struct AdamState {
    MlpGradient m;
    MlpGradient v;
    std::size_t t = 0;
};

void apply_update(MlpNetwork& net, const MlpGradient& g, const TrainConfig& cfg,
                  AdamState& adam) {
    if (cfg.optimizer == TrainConfig::Optimizer::sgd) {
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            double* w = net.weights[l].data();
            const double* gw = g.weights[l].data();
            const std::size_t count = net.weights[l].rows() * net.weights[l].cols();
            for (std::size_t i = 0; i < count; ++i) w[i] -= cfg.learning_rate * gw[i];
            for (std::size_t i = 0; i < net.shifts[l].size(); ++i)
                net.shifts[l][i] -= cfg.learning_rate * g.shifts[l][i];
        }
        return;
    }
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    adam.t += 1;
    const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(adam.t));
    const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(adam.t));
    auto step = [&](double& theta, double grad, double& m, double& v) {
        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v + (1.0 - beta2) * grad * grad;
        theta -= cfg.learning_rate * (m / corr1) / (std::sqrt(v / corr2) + eps);
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        double* w = net.weights[l].data();
        const double* gw = g.weights[l].data();
        double* m = adam.m.weights[l].data();
        double* v = adam.v.weights[l].data();
        const std::size_t count = net.weights[l].rows() * net.weights[l].cols();
        for (std::size_t i = 0; i < count; ++i) step(w[i], gw[i], m[i], v[i]);
        for (std::size_t i = 0; i < net.shifts[l].size(); ++i)
            step(net.shifts[l][i], g.shifts[l][i], adam.m.shifts[l][i],
                 adam.v.shifts[l][i]);
    }
}

}  // namespace

std::pair<MlpNetwork, TrainReport> train(const MlpNetwork& net, const Matrix& x,
                                         const Matrix& z, const TrainConfig& cfg) {
    net.check();
    if (x.rows() != z.rows()) throw ShapeMismatch("train: x and z row counts differ");
    if (x.cols() != net.q || z.cols() != net.d) throw ShapeMismatch("train: width mismatch");
    const std::size_t n = x.rows();
    if (n == 0) throw DomainError("train: empty data");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction <= 1.0))
        throw DomainError("train: train_fraction must lie in (0, 1]");
    if (cfg.batch_size < 1) throw DomainError("train: batch_size must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw DomainError("train: learning_rate must be > 0");
    if (cfg.train_fraction < 1.0 && n < 2)
        throw DomainError("train: need n >= 2 to hold out a test split");

    // split drawn from its own substream so batching cannot disturb it
    RngStream root(cfg.seed, 0);
    RngStream split_rng = root.substream(1);
    RngStream batch_rng = root.substream(2);

    std::size_t n_train = static_cast<std::size_t>(
        std::floor(cfg.train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, cfg.train_fraction < 1.0 ? n - 1 : n);
    const bool has_test = n_train < n;

    const std::vector<std::size_t> perm = split_rng.permutation(n);
    const std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + n_train);
    const std::vector<std::size_t> test_idx(perm.begin() + n_train, perm.end());

    const Matrix x_train = take_rows(x, train_idx);
    const Matrix z_train = take_rows(z, train_idx);
    const Matrix x_test = has_test ? take_rows(x, test_idx) : Matrix();
    const Matrix z_test = has_test ? take_rows(z, test_idx) : Matrix();

    auto eval_test = [&](const MlpNetwork& m, double train_loss) {
        return has_test ? loss(m, x_test, z_test) : train_loss;
    };

    MlpNetwork current = net;
    double train_loss = loss(current, x_train, z_train);
    double test_loss = eval_test(current, train_loss);

    MlpNetwork best = current;
    double best_test = test_loss;

    AdamState adam{zero_like(net), zero_like(net), 0};
    TrainReport report;
    std::size_t since_improve = 0;

    std::vector<std::size_t> batch_rows;
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const std::vector<std::size_t> order = batch_rng.permutation(n_train);
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, n_train);
            batch_rows.assign(order.begin() + start, order.begin() + stop);
            const Matrix xb = take_rows(x_train, batch_rows);
            const Matrix zb = take_rows(z_train, batch_rows);
            const MlpGradient g = gradient(current, xb, zb);
            apply_update(current, g, cfg, adam);
        }
        train_loss = loss(current, x_train, z_train);
        test_loss = eval_test(current, train_loss);
        report.loss_history.emplace_back(train_loss, test_loss);
        if (test_loss < best_test) {
            best_test = test_loss;
            best = current;
            since_improve = 0;
        } else {
            ++since_improve;
        }
        if (since_improve >= cfg.patience) break;
    }

    report.epochs_run = report.loss_history.size();
    report.final_train_loss = train_loss;
    report.final_test_loss = test_loss;
    report.best_test_loss = best_test;
    return {cfg.return_best ? std::move(best) : std::move(current), std::move(report)};
}

}  // namespace deepiv
