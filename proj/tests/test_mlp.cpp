#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "deepiv/errors.hpp"
#include "deepiv/mlp.hpp"

using namespace deepiv;

namespace {

// independent forward pass written against the layer recursion, used to
// cross-check the library forward and as the base for finite differences
std::vector<double> naive_forward(const MlpNetwork& net, std::span<const double> z) {
    std::vector<double> h(z.begin(), z.end());
    for (std::size_t l = 0; l < net.L; ++l) {
        const Matrix& a = net.weights[l];
        std::vector<double> next(a.rows());
        for (std::size_t i = 0; i < a.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * h[j];
            s -= net.shifts[l][i];  // hidden shift is subtracted inside the relu
            next[i] = s > 0.0 ? s : 0.0;
        }
        h = std::move(next);
    }
    const Matrix& out = net.weights[net.L];
    std::vector<double> y(out.rows());
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double s = net.shifts[net.L][i];  // output shift is added
        for (std::size_t j = 0; j < out.cols(); ++j) s += out(i, j) * h[j];
        y[i] = s;
    }
    return y;
}

double naive_loss(const MlpNetwork& net, const Matrix& x, const Matrix& z) {
    double total = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const std::vector<double> f = naive_forward(net, z.row(i));
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double e = x(i, j) - f[j];
            total += e * e;
        }
    }
    return total / static_cast<double>(z.rows());
}

MlpNetwork random_net(std::size_t d, std::size_t q, std::size_t L, std::size_t W,
                      RngStream& rng) {
    MlpNetwork net = init_network(d, q, L, W, rng);
    // init_network zeroes the shifts; perturb everything so relu kinks and
    // shift gradients are exercised
    for (auto& a : net.weights)
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) += 0.3 * rng.normal();
    for (auto& v : net.shifts)
        for (auto& s : v) s = 0.3 * rng.normal();
    return net;
}

}  // namespace

TEST_CASE("parameter_count matches the closed-form tally") {
    MlpNetwork net;
    net.d = 4;
    net.q = 1;
    net.L = 3;
    net.W = 10;
    CHECK(net.parameter_count() == 280);  // W(L+d+q) + (L-1)W^2

    net.d = 2;
    net.q = 2;
    net.L = 1;
    net.W = 5;
    CHECK(net.parameter_count() == 25);
}

TEST_CASE("init_network shapes, bounds, determinism") {
    RngStream rng(11, 0);
    const MlpNetwork net = init_network(3, 2, 4, 6, rng);
    net.check();
    CHECK(net.weights.size() == 5);
    CHECK(net.shifts.size() == 5);
    CHECK(net.weights[0].rows() == 6);
    CHECK(net.weights[0].cols() == 3);
    CHECK(net.weights[2].rows() == 6);
    CHECK(net.weights[2].cols() == 6);
    CHECK(net.weights[4].rows() == 2);
    CHECK(net.weights[4].cols() == 6);
    CHECK(net.shifts[0].size() == 6);
    CHECK(net.shifts[4].size() == 2);
    for (const auto& v : net.shifts)
        for (double s : v) CHECK(s == 0.0);
    // glorot bound for the first layer
    const double bound = std::sqrt(6.0 / (3 + 6));
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(net.weights[0](i, j)) <= bound);

    RngStream rng2(11, 0);
    CHECK(init_network(3, 2, 4, 6, rng2).weights[1] == net.weights[1]);
}

TEST_CASE("check rejects malformed networks") {
    RngStream rng(1, 0);
    MlpNetwork net = init_network(2, 1, 2, 3, rng);
    net.check();
    MlpNetwork bad = net;
    bad.weights[1] = Matrix(3, 4);
    CHECK_THROWS_AS(bad.check(), ShapeMismatch);
    bad = net;
    bad.shifts[0].pop_back();
    CHECK_THROWS_AS(bad.check(), ShapeMismatch);
    bad = net;
    bad.weights[0](0, 0) = std::nan("");
    CHECK_THROWS_AS(bad.check(), DomainError);
}

TEST_CASE("forward agrees with an independent implementation") {
    RngStream rng(2024, 1);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t d = 1 + rng.below(4);
        const std::size_t q = 1 + rng.below(2);
        const std::size_t L = 1 + rng.below(3);
        const std::size_t W = 1 + rng.below(6);
        const MlpNetwork net = random_net(d, q, L, W, rng);
        std::vector<double> z(d);
        for (auto& v : z) v = rng.uniform(-3.0, 3.0);
        const std::vector<double> got = forward(net, z);
        const std::vector<double> want = naive_forward(net, z);
        REQUIRE(got.size() == want.size());
        for (std::size_t j = 0; j < q; ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-12));
    }
}

TEST_CASE("forward_batch equals per-row forward bitwise") {
    RngStream rng(5, 5);
    const MlpNetwork net = random_net(3, 2, 2, 5, rng);
    Matrix z(17, 3);
    for (std::size_t i = 0; i < 17; ++i)
        for (std::size_t j = 0; j < 3; ++j) z(i, j) = rng.uniform(-3.0, 3.0);
    const Matrix batch = forward_batch(net, z);
    REQUIRE(batch.rows() == 17);
    REQUIRE(batch.cols() == 2);
    for (std::size_t i = 0; i < 17; ++i) {
        const std::vector<double> one = forward(net, z.row(i));
        for (std::size_t j = 0; j < 2; ++j) CHECK(batch(i, j) == one[j]);
    }
}

TEST_CASE("loss is the mean squared residual") {
    RngStream rng(6, 6);
    const MlpNetwork net = random_net(2, 1, 1, 4, rng);
    Matrix z(9, 2), x(9, 1);
    for (std::size_t i = 0; i < 9; ++i) {
        z(i, 0) = rng.uniform(-2.0, 2.0);
        z(i, 1) = rng.uniform(-2.0, 2.0);
        x(i, 0) = rng.normal();
    }
    CHECK(loss(net, x, z) == doctest::Approx(naive_loss(net, x, z)).epsilon(1e-12));
}

TEST_CASE("backprop gradient matches central finite differences") {
    RngStream rng(31337, 0);
    const double h = 1e-5;
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t d = 1 + rng.below(3);
        const std::size_t q = 1 + rng.below(2);
        const std::size_t L = 1 + rng.below(3);
        const std::size_t W = 2 + rng.below(4);
        MlpNetwork net = random_net(d, q, L, W, rng);
        Matrix z(7, d), x(7, q);
        for (std::size_t i = 0; i < 7; ++i) {
            for (std::size_t j = 0; j < d; ++j) z(i, j) = rng.uniform(-2.0, 2.0);
            for (std::size_t j = 0; j < q; ++j) x(i, j) = rng.normal();
        }
        const MlpGradient g = gradient(net, x, z);
        REQUIRE(g.weights.size() == net.weights.size());
        REQUIRE(g.shifts.size() == net.shifts.size());

        auto fd_check = [&](double& param, double got) {
            const double keep = param;
            param = keep + h;
            const double up = naive_loss(net, x, z);
            param = keep - h;
            const double down = naive_loss(net, x, z);
            param = keep;
            const double fd = (up - down) / (2.0 * h);
            CHECK(got == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
        };

        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            for (std::size_t i = 0; i < net.weights[l].rows(); ++i)
                for (std::size_t j = 0; j < net.weights[l].cols(); ++j)
                    fd_check(net.weights[l](i, j), g.weights[l](i, j));
            for (std::size_t i = 0; i < net.shifts[l].size(); ++i)
                fd_check(net.shifts[l][i], g.shifts[l][i]);
        }
    }
}

TEST_CASE("train reduces loss and honors the seed") {
    // learnable target: x = 2 relu(z) - 1 with small noise
    RngStream data_rng(88, 0);
    const std::size_t n = 256;
    Matrix z(n, 1), x(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double zi = data_rng.uniform(-2.0, 2.0);
        z(i, 0) = zi;
        x(i, 0) = 2.0 * std::max(zi, 0.0) - 1.0 + 0.05 * data_rng.normal();
    }
    RngStream init_rng(88, 1);
    const MlpNetwork net0 = init_network(1, 1, 2, 8, init_rng);

    TrainConfig cfg;
    cfg.max_epochs = 120;
    cfg.seed = 321;
    const auto [net, report] = train(net0, x, z, cfg);
    CHECK(report.epochs_run >= 1);
    CHECK(report.loss_history.size() == report.epochs_run);
    CHECK(report.best_test_loss <= report.loss_history.front().second);
    CHECK(loss(net, x, z) < loss(net0, x, z));
    CHECK(loss(net, x, z) < 0.05);  // near the noise floor

    // same seed, same everything
    RngStream init_rng2(88, 1);
    const MlpNetwork net0b = init_network(1, 1, 2, 8, init_rng2);
    const auto [netb, reportb] = train(net0b, x, z, cfg);
    CHECK(netb.weights[0] == net.weights[0]);
    CHECK(netb.shifts[2] == net.shifts[2]);
    CHECK(reportb.final_train_loss == report.final_train_loss);
}

TEST_CASE("return_best picks the lowest test loss snapshot") {
    RngStream data_rng(99, 0);
    const std::size_t n = 128;
    Matrix z(n, 1), x(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double zi = data_rng.uniform(-2.0, 2.0);
        z(i, 0) = zi;
        x(i, 0) = std::sin(zi) + 0.1 * data_rng.normal();
    }
    RngStream init_rng(99, 1);
    const MlpNetwork net0 = init_network(1, 1, 1, 6, init_rng);

    TrainConfig cfg;
    cfg.max_epochs = 60;
    cfg.seed = 7;
    cfg.learning_rate = 5e-3;
    const auto [best_net, report] = train(net0, x, z, cfg);

    cfg.return_best = false;
    RngStream init_rng2(99, 1);
    const auto [last_net, report2] = train(init_network(1, 1, 1, 6, init_rng2), x, z, cfg);

    // identical trajectories, different returned snapshot policy
    CHECK(report2.loss_history == report.loss_history);
    double best_seen = report.loss_history.front().second;
    for (const auto& [tr, te] : report.loss_history) best_seen = std::min(best_seen, te);
    CHECK(report.best_test_loss == doctest::Approx(best_seen));

    // the best snapshot cannot be worse on test loss than the final epoch
    CHECK(report.best_test_loss <= report.final_test_loss + 1e-12);
    (void)best_net;
    (void)last_net;
}

TEST_CASE("train input validation") {
    RngStream rng(3, 3);
    const MlpNetwork net = init_network(2, 1, 1, 3, rng);
    Matrix z(4, 2), x(5, 1);
    TrainConfig cfg;
    CHECK_THROWS_AS(train(net, x, z, cfg), ShapeMismatch);
    Matrix z2(0, 2), x2(0, 1);
    CHECK_THROWS_AS(train(net, x2, z2, cfg), DomainError);
}
