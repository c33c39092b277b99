#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccgen/alt_priors.hpp"

using namespace ccgen;

namespace {

PriorConfig small_config(PriorKind kind) {
    PriorConfig c;
    c.kind = kind;
    c.n_samples = 256;
    return c;
}

double logistic_ref(double v) { return 1.0 / (1.0 + std::exp(-v)); }

} // namespace

TEST_CASE("sigmoid-normal draws stay strictly inside (0,1)") {
    SigmoidNormalTreatment m;
    m.cond_mean = Eigen::VectorXd::Constant(4, 0.5);
    m.cond_std = Eigen::VectorXd::Constant(4, 50.0); // exaggerated spread
    m.overlap = 1.0;
    Rng rng = Rng::stream(1, "sig");
    for (int i = 0; i < 20000; ++i) {
        const double t = sample_sigmoid_normal_treatment(m, i % 4, rng);
        CHECK(t > 0.0);
        CHECK(t < 1.0);
    }
}

TEST_CASE("zero-variance limit collapses to logistic of the mean") {
    SigmoidNormalTreatment m;
    m.cond_mean = Eigen::VectorXd::Constant(1, -0.7);
    m.cond_std = Eigen::VectorXd::Constant(1, 1e-14);
    m.overlap = 1.0;
    Rng rng = Rng::stream(2, "sig0");
    for (int i = 0; i < 100; ++i) {
        CHECK(sample_sigmoid_normal_treatment(m, 0, rng) ==
              doctest::Approx(logistic_ref(-0.7)).epsilon(1e-9));
    }
}

TEST_CASE("smaller overlap shrinks the pre-logistic variance") {
    SigmoidNormalTreatment wide, narrow;
    wide.cond_mean = narrow.cond_mean = Eigen::VectorXd::Constant(1, 0.2);
    wide.cond_std = narrow.cond_std = Eigen::VectorXd::Constant(1, 1.5);
    wide.overlap = 1.0;
    narrow.overlap = 0.1;

    auto prelogit_var = [](const SigmoidNormalTreatment& m, std::uint64_t seed) {
        Rng rng = Rng::stream(seed, "ov");
        double sum = 0.0, sum2 = 0.0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const double t = sample_sigmoid_normal_treatment(m, 0, rng);
            const double z = std::log(t / (1.0 - t));
            sum += z;
            sum2 += z * z;
        }
        const double mean = sum / n;
        return sum2 / n - mean * mean;
    };
    // Same seed path: each draw consumes one normal either way.
    CHECK(prelogit_var(narrow, 7) < prelogit_var(wide, 7));
}

TEST_CASE("bernstein basis forms a partition of unity") {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(9); // degree 8
    for (int i = 0; i <= 100; ++i) {
        const double t = i / 100.0;
        CHECK(bernstein_polynomial(ones, t) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("bernstein endpoint bases pick the boundary coefficients") {
    Eigen::VectorXd coeffs(4);
    coeffs << -1.5, 0.3, 2.0, 0.9;
    CHECK(bernstein_polynomial(coeffs, 0.0) == doctest::Approx(-1.5));
    CHECK(bernstein_polynomial(coeffs, 1.0) == doctest::Approx(0.9));
}

TEST_CASE("zero heterogeneity gives every row the same curve") {
    auto [dgp, ds] = sample_bernstein_dataset(small_config(PriorKind::bernstein), 5);
    // Re-mix the stored coefficients at the lambda = 0 endpoint.
    const Eigen::MatrixXd mixed0 =
        Eigen::VectorXd::Ones(ds.rows()) * dgp.global_coeffs.transpose();
    for (double t : {0.0, 0.3, 0.9}) {
        double first = bernstein_polynomial(mixed0.row(0).transpose(), t);
        for (int row = 1; row < ds.rows(); ++row) {
            CHECK(bernstein_polynomial(mixed0.row(row).transpose(), t) == doctest::Approx(first));
        }
    }
}

TEST_CASE("heterogeneity endpoints order the row variance of the curve") {
    auto [dgp, ds] = sample_bernstein_dataset(small_config(PriorKind::bernstein), 6);
    auto row_variance_at = [&](const Eigen::MatrixXd& mixed, double t) {
        Eigen::VectorXd v(ds.rows());
        for (int row = 0; row < ds.rows(); ++row) {
            v[row] = bernstein_polynomial(mixed.row(row).transpose(), t);
        }
        const double mean = v.mean();
        return (v.array() - mean).square().sum() / static_cast<double>(v.size());
    };
    const Eigen::MatrixXd mixed0 =
        Eigen::VectorXd::Ones(ds.rows()) * dgp.global_coeffs.transpose();
    const Eigen::MatrixXd& mixed1 = dgp.row_coeffs; // lambda = 1
    for (double t : {0.1, 0.5, 0.8}) {
        CHECK(row_variance_at(mixed0, t) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(row_variance_at(mixed1, t) >= 0.0);
    }
}

TEST_CASE("bernstein dataset passes the shared dataset invariants") {
    for (std::uint64_t seed : {11ull, 12ull}) {
        auto [dgp, ds] = sample_bernstein_dataset(small_config(PriorKind::bernstein), seed);
        CHECK_NOTHROW(ds.validate());
        CHECK(ds.t.minCoeff() > 0.0);
        CHECK(ds.t.maxCoeff() < 1.0);
        // Counterfactual columns agree with the oracle.
        for (int row = 0; row < ds.rows(); ++row) {
            CHECK(dgp.cepo(row, ds.t_cf(row, 0)) == ds.cepo_cf(row, 0));
        }
        CHECK(dgp.degree >= 2);
        CHECK(dgp.degree <= 8);
    }
}

TEST_CASE("value-based curve is exact at knots and linear midway") {
    auto [dgp, ds] = sample_value_based_dataset(small_config(PriorKind::value_based), 21);
    const int knots = static_cast<int>(dgp.support_points.size());
    CHECK(knots >= 3);
    CHECK(knots <= 12);
    for (int j = 0; j + 1 < knots; ++j) {
        CHECK(dgp.support_points[j] < dgp.support_points[j + 1]);
    }
    for (int row = 0; row < 16; ++row) {
        for (int j = 0; j < knots; ++j) {
            const auto [mu, eta] = dgp.cepo_and_noise(row, dgp.support_points[j]);
            CHECK(mu == dgp.cepo_columns(row, j));
            CHECK(eta == dgp.noise_columns(row, j));
        }
        for (int j = 0; j + 1 < knots; ++j) {
            const double mid = 0.5 * (dgp.support_points[j] + dgp.support_points[j + 1]);
            const auto [mu, eta] = dgp.cepo_and_noise(row, mid);
            CHECK(mu == doctest::Approx(0.5 * (dgp.cepo_columns(row, j) +
                                               dgp.cepo_columns(row, j + 1)))
                            .epsilon(1e-12));
            CHECK(eta == doctest::Approx(0.5 * (dgp.noise_columns(row, j) +
                                                dgp.noise_columns(row, j + 1)))
                             .epsilon(1e-12));
        }
    }
}

TEST_CASE("value-based noise variance tracks the configured fraction per knot") {
    auto config = small_config(PriorKind::value_based);
    config.n_samples = 2048;
    auto [dgp, ds] = sample_value_based_dataset(config, 22);
    auto popvar = [](const Eigen::VectorXd& v) {
        const double mean = v.mean();
        return (v.array() - mean).square().sum() / static_cast<double>(v.size());
    };
    for (int j = 0; j < dgp.support_points.size(); ++j) {
        const double var_mu = popvar(dgp.cepo_columns.col(j));
        const double var_eta = popvar(dgp.noise_columns.col(j));
        if (var_mu > 1e-12) {
            CHECK(var_eta / var_mu == doctest::Approx(dgp.noise_fraction).epsilon(0.1));
        }
    }
}

TEST_CASE("value-based queries clamp outside the support and stay continuous") {
    auto [dgp, ds] = sample_value_based_dataset(small_config(PriorKind::value_based), 23);
    const int row = 3;
    CHECK(dgp.cepo(row, 0.0) == dgp.cepo_columns(row, 0));
    CHECK(dgp.cepo(row, 1.0) == dgp.cepo_columns(row, dgp.support_points.size() - 1));
    // Piecewise-linear continuity: small steps give small changes.
    double prev = dgp.cepo(row, 0.0);
    double max_jump = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double cur = dgp.cepo(row, i / 1000.0);
        max_jump = std::max(max_jump, std::abs(cur - prev));
        prev = cur;
    }
    const double total_span = dgp.cepo_columns.row(row).maxCoeff() -
                              dgp.cepo_columns.row(row).minCoeff();
    CHECK(max_jump <= 0.2 * std::max(total_span, 1e-9) + 1e-9);
}

TEST_CASE("value-based dataset passes the shared dataset invariants") {
    auto [dgp, ds] = sample_value_based_dataset(small_config(PriorKind::value_based), 24);
    CHECK_NOTHROW(ds.validate());
    for (int row = 0; row < ds.rows(); ++row) {
        CHECK(dgp.cepo(row, ds.t_cf(row, 0)) == ds.cepo_cf(row, 0));
    }
}

TEST_CASE("alt priors are deterministic in the seed") {
    auto [da, a] = sample_bernstein_dataset(small_config(PriorKind::bernstein), 31);
    auto [db, b] = sample_bernstein_dataset(small_config(PriorKind::bernstein), 31);
    CHECK(a.covariates == b.covariates);
    CHECK(a.t == b.t);
    CHECK(a.y == b.y);

    auto [dc, c] = sample_value_based_dataset(small_config(PriorKind::value_based), 31);
    auto [dd, d] = sample_value_based_dataset(small_config(PriorKind::value_based), 31);
    CHECK(c.covariates == d.covariates);
    CHECK(c.t == d.t);
    CHECK(c.y == d.y);
}
