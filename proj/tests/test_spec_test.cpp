#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "deepiv/distributions.hpp"
#include "deepiv/errors.hpp"
#include "deepiv/simlab.hpp"
#include "deepiv/spec_test.hpp"

using namespace deepiv;

TEST_CASE("statistic assembly on a scalar hand case") {
    // q = 1: J = (n/sigma2) (bhat - btilde)^2 / (1/Mtilde - 1/Mhat)
    const std::vector<double> beta_full{3.2};
    const std::vector<double> beta_base{3.0};
    Matrix m_full(1, 1), m_base(1, 1);
    m_full(0, 0) = 4.0;   // stronger instruments, bigger moment
    m_base(0, 0) = 2.0;
    const double sigma2 = 5.0;
    const std::size_t n = 100;
    const SpecTestResult res =
        spec_test_from_components(beta_full, beta_base, m_full, m_base, sigma2, n, 0.05);

    const double inner = 1.0 / 2.0 - 1.0 / 4.0;  // Mtilde^{-1} - Mhat^{-1}
    const double want = (n / sigma2) * 0.2 * (1.0 / inner) * 0.2;
    CHECK(res.j_stat == doctest::Approx(want));
    CHECK(res.dof == 1);
    CHECK(res.alpha == 0.05);
    CHECK(res.critical_value == doctest::Approx(3.841458820694124).epsilon(1e-8));
    CHECK(res.reject == (res.j_stat > res.critical_value));
    CHECK(res.p_value == doctest::Approx(chi2_upper_tail(1, res.j_stat)).epsilon(1e-12));
    CHECK(res.beta_full == beta_full);
    CHECK(res.beta_baseline == beta_base);
    CHECK(res.sigma2_tilde == sigma2);
}

TEST_CASE("two-dimensional case against explicit matrix algebra") {
    const std::vector<double> bf{1.1, -0.4};
    const std::vector<double> bb{1.0, -0.5};
    Matrix mf = Matrix::from_rows({{5.0, 1.0}, {1.0, 4.0}});
    Matrix mb = Matrix::from_rows({{2.0, 0.5}, {0.5, 1.5}});
    const double sigma2 = 2.0;
    const std::size_t n = 500;
    const SpecTestResult res = spec_test_from_components(bf, bb, mf, mb, sigma2, n, 0.05);
    CHECK(res.dof == 2);
    CHECK(res.critical_value == doctest::Approx(5.991464547107979).epsilon(1e-8));

    // independent evaluation of delta' [mb^{-1} - mf^{-1}]^{-1} delta
    const Matrix diff_inv = inverse(mb);
    const Matrix full_inv = inverse(mf);
    Matrix inner(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) inner(i, j) = diff_inv(i, j) - full_inv(i, j);
    const Matrix bracket = inverse(inner);
    const std::vector<double> delta{0.1, 0.1};
    double quad = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) quad += delta[i] * bracket(i, j) * delta[j];
    CHECK(res.j_stat == doctest::Approx((n / sigma2) * quad).epsilon(1e-10));
}

TEST_CASE("identical moments are rejected as non positive definite") {
    const std::vector<double> b{1.0};
    Matrix m(1, 1);
    m(0, 0) = 3.0;
    CHECK_THROWS_AS(spec_test_from_components(b, b, m, m, 1.0, 50, 0.05), NonPositiveInner);

    // baseline more efficient than full (wrong ordering) is not PD either
    Matrix weaker(1, 1), stronger(1, 1);
    weaker(0, 0) = 2.0;
    stronger(0, 0) = 4.0;
    CHECK_THROWS_AS(
        spec_test_from_components(b, b, weaker, stronger, 1.0, 50, 0.05), NonPositiveInner);
}

TEST_CASE("argument validation") {
    const std::vector<double> b1{1.0};
    const std::vector<double> b2{1.0, 2.0};
    Matrix m1(1, 1), m2(2, 2);
    m1(0, 0) = 1.0;
    CHECK_THROWS_AS(spec_test_from_components(b1, b2, m1, m1, 1.0, 10, 0.05), ShapeMismatch);
    CHECK_THROWS_AS(spec_test_from_components(b1, b1, m1, m2, 1.0, 10, 0.05), ShapeMismatch);
    CHECK_THROWS_AS(spec_test_from_components(b1, b1, m1, m1, -1.0, 10, 0.05), DomainError);
    CHECK_THROWS_AS(spec_test_from_components(b1, b1, m1, m1, 1.0, 10, 1.5), DomainError);
}

TEST_CASE("hausman_test on valid instruments rarely rejects") {
    // all five instruments valid: dgp2 plus one redundant uniform column
    DgpSpec spec;
    spec.kind = DgpKind::dgp2;
    spec.n = 500;
    spec.d = 5;
    RngStream rng(424, 0);
    const Dataset data = gen_dgp(spec, rng).data;

    TrainConfig cfg;
    cfg.seed = 3;
    cfg.max_epochs = 150;
    const SpecTestResult res = hausman_test(data, 1, 3, 10, cfg, 0.05);
    CHECK(res.dof == 1);
    CHECK(res.j_stat >= 0.0);
    CHECK(std::abs(res.beta_full[0] - 3.0) < 0.5);
    CHECK(std::abs(res.beta_baseline[0] - 3.0) < 0.5);
    CHECK(res.p_value >= 0.0);
    CHECK(res.p_value <= 1.0);

    // deterministic in the seed
    const SpecTestResult again = hausman_test(data, 1, 3, 10, cfg, 0.05);
    CHECK(again.j_stat == res.j_stat);

    CHECK_THROWS_AS(hausman_test(data, 0, 3, 10, cfg, 0.05), DomainError);
    CHECK_THROWS_AS(hausman_test(data, 5, 3, 10, cfg, 0.05), DomainError);
}
