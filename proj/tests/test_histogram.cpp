#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ccgen/histogram.hpp"
#include "ccgen/rng.hpp"

using namespace ccgen;

namespace {

// Independent straight-summation cross-entropy in extended precision.
long double ce_oracle(const HistogramDistribution& q, const HistogramDistribution& target) {
    long double loss = 0.0L;
    for (int l = 0; l < q.bins(); ++l) {
        const long double ql = std::max<long double>(q.probs[l], 1e-12L);
        loss -= static_cast<long double>(target.probs[l]) * std::log(ql);
    }
    return loss;
}

// Per-bin Gaussian mass through erf directly (different route than the
// erfc-based cdf in the implementation).
double erf_bin_mass(double mu, double sigma, double lo, double hi) {
    const double a = (lo - mu) / (sigma * std::numbers::sqrt2);
    const double b = (hi - mu) / (sigma * std::numbers::sqrt2);
    return 0.5 * (std::erf(b) - std::erf(a));
}

HistogramDistribution random_distribution(int bins, Rng& rng) {
    HistogramDistribution h;
    h.probs.resize(bins);
    double sum = 0.0;
    for (int l = 0; l < bins; ++l) {
        h.probs[l] = -std::log(rng.uniform01_open());
        sum += h.probs[l];
    }
    h.probs /= sum;
    return h;
}

} // namespace

TEST_CASE("BinGrid edges are uniform and validation catches corruption") {
    BinGrid g(1024, -10.0, 10.0);
    CHECK(g.bins() == 1024);
    CHECK(g.edge(0) == doctest::Approx(-10.0));
    CHECK(g.edge(1024) == doctest::Approx(10.0));
    CHECK(g.width() == doctest::Approx(20.0 / 1024));
    CHECK_NOTHROW(g.validate());

    BinGrid bad(8, 0.0, 1.0);
    std::reverse(bad.edges.begin(), bad.edges.end());
    CHECK_THROWS_WITH_AS(bad.validate(), "BinGrid monotonicity", std::invalid_argument);
}

TEST_CASE("standardizer two-point case uses the population convention") {
    Eigen::VectorXd y(2);
    y << 0.0, 2.0;
    const Standardizer s = fit_standardizer(y);
    CHECK(s.mean == doctest::Approx(1.0));
    CHECK(s.std == doctest::Approx(1.0));
    CHECK_FALSE(s.degenerate);
}

TEST_CASE("standardizer invert composes with apply") {
    Rng rng = Rng::stream(3, "std");
    Eigen::VectorXd y(257);
    for (int i = 0; i < y.size(); ++i) y[i] = 5.0 + 3.0 * rng.normal();
    const Standardizer s = fit_standardizer(y);
    const Eigen::VectorXd round = s.invert(s.apply(y));
    CHECK((round - y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constant outcomes flag the standardizer degenerate") {
    Eigen::VectorXd y = Eigen::VectorXd::Constant(16, 4.2);
    const Standardizer s = fit_standardizer(y);
    CHECK(s.degenerate);
    CHECK(s.apply(7.0) == 0.0);
    CHECK(s.invert(1.0) == doctest::Approx(4.2));
}

TEST_CASE("standardizer requires two context outcomes") {
    Eigen::VectorXd y(1);
    y << 1.0;
    CHECK_THROWS_AS(fit_standardizer(y), std::invalid_argument);
}

TEST_CASE("gaussian_bin_mass delta limit is one-hot") {
    BinGrid g(64, -10.0, 10.0);
    const int j = 20;
    const HistogramDistribution h = gaussian_bin_mass(g.center(j), 1e-6 * g.width(), g);
    CHECK(h.probs[j] == doctest::Approx(1.0));
    CHECK(h.probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gaussian_bin_mass total mass is exactly one after tail assignment") {
    BinGrid g(1024, -10.0, 10.0);
    Rng rng = Rng::stream(17, "gbm");
    for (int i = 0; i < 100; ++i) {
        const double mu = rng.uniform(-15.0, 15.0);
        const double sigma = rng.log_uniform(1e-4, 5.0);
        const HistogramDistribution h = gaussian_bin_mass(mu, sigma, g);
        CHECK(std::abs(h.probs.sum() - 1.0) <= 1e-12);
        CHECK((h.probs.array() >= 0.0).all());
    }
}

TEST_CASE("gaussian_bin_mass matches the erf oracle per interior bin") {
    BinGrid g(1024, -10.0, 10.0);
    Rng rng = Rng::stream(19, "gbm2");
    for (int trial = 0; trial < 20; ++trial) {
        const double mu = rng.uniform(-5.0, 5.0);
        const double sigma = rng.log_uniform(0.005, 2.0);
        const HistogramDistribution h = gaussian_bin_mass(mu, sigma, g);
        for (int l = 1; l + 1 < g.bins(); ++l) {
            const double want = erf_bin_mass(mu, sigma, g.edge(l), g.edge(l + 1));
            CHECK(std::abs(h.probs[l] - want) <= 1e-9);
        }
    }
}

TEST_CASE("narrow gaussian concentrates in the central bins") {
    BinGrid g(1024, -10.0, 10.0);
    const HistogramDistribution h = gaussian_bin_mass(0.0, 0.01, g);
    // mu = 0 sits on the shared edge of bins 511 and 512; together they
    // span +-1.953 sigma, which holds 2*Phi(w/sigma) - 1 = 0.94919 of the
    // mass (erf oracle).
    const double central = h.probs[511] + h.probs[512];
    const double want = erf_bin_mass(0.0, 0.01, -g.width(), g.width());
    CHECK(central == doctest::Approx(want).epsilon(1e-9));
    CHECK(central >= 0.94);
}

TEST_CASE("histogram_loss of a one-hot against itself is zero") {
    HistogramDistribution onehot;
    onehot.probs = Eigen::VectorXd::Zero(8);
    onehot.probs[3] = 1.0;
    CHECK(histogram_loss(onehot, onehot) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("cross entropy at equality is the Shannon entropy") {
    Rng rng = Rng::stream(23, "ce");
    const HistogramDistribution q = random_distribution(16, rng);
    double entropy = 0.0;
    for (int l = 0; l < q.bins(); ++l) entropy -= q.probs[l] * std::log(q.probs[l]);
    CHECK(histogram_loss(q, q) == doctest::Approx(entropy).epsilon(1e-12));
}

TEST_CASE("histogram_loss matches a straight-summation oracle") {
    Rng rng = Rng::stream(29, "ce2");
    for (int bins : {8, 1024}) {
        for (int trial = 0; trial < 100; ++trial) {
            const HistogramDistribution q = random_distribution(bins, rng);
            const HistogramDistribution t = random_distribution(bins, rng);
            const double got = histogram_loss(q, t);
            const double want = static_cast<double>(ce_oracle(q, t));
            CHECK(std::abs(got - want) <= 1e-10);
        }
    }
}

TEST_CASE("gibbs inequality: cross entropy is minimized at the target") {
    Rng rng = Rng::stream(31, "gibbs");
    const HistogramDistribution target = random_distribution(32, rng);
    const double self_loss = histogram_loss(target, target);
    for (int trial = 0; trial < 200; ++trial) {
        const HistogramDistribution q = random_distribution(32, rng);
        CHECK(histogram_loss(q, target) >= self_loss - 1e-12);
    }
}

TEST_CASE("histogram_mean of one-hot and uniform distributions") {
    BinGrid g(64, -10.0, 10.0);
    HistogramDistribution onehot;
    onehot.probs = Eigen::VectorXd::Zero(64);
    onehot.probs[10] = 1.0;
    CHECK(histogram_mean(onehot, g) == doctest::Approx(g.center(10)));

    HistogramDistribution uniform;
    uniform.probs = Eigen::VectorXd::Constant(64, 1.0 / 64);
    CHECK(histogram_mean(uniform, g) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("histogram_mean recovers the gaussian location within one bin") {
    BinGrid g(1024, -10.0, 10.0);
    const HistogramDistribution h = gaussian_bin_mass(1.3, 0.5, g);
    CHECK(std::abs(histogram_mean(h, g) - 1.3) < g.width());
}

TEST_CASE("translation consistency of interior bin mass") {
    BinGrid g(256, -10.0, 10.0);
    const double mu = 0.37;
    const int shift = 5;
    const HistogramDistribution a = gaussian_bin_mass(mu, 0.8, g);
    const HistogramDistribution b = gaussian_bin_mass(mu + shift * g.width(), 0.8, g);
    for (int l = 40; l < 200; ++l) {
        CHECK(b.probs[l + shift] == doctest::Approx(a.probs[l]).epsilon(1e-9));
    }
}

TEST_CASE("crps near-delta prediction at the true bin stays below binwidth") {
    BinGrid g(64, -10.0, 10.0);
    const double y = g.center(30);
    HistogramDistribution q;
    q.probs = Eigen::VectorXd::Zero(64);
    q.probs[30] = 1.0;
    CHECK(crps_loss(q, g, y) <= g.width());
}

TEST_CASE("crps uniform prediction matches the closed form at the lower edge") {
    const int L = 64;
    BinGrid g(L, -10.0, 10.0);
    HistogramDistribution q;
    q.probs = Eigen::VectorXd::Constant(L, 1.0 / L);
    const double got = crps_loss(q, g, g.lo());
    double want = 0.0;
    for (int kidx = 0; kidx < L; ++kidx) {
        const double d = static_cast<double>(kidx + 1) / L - 1.0;
        want += d * d * g.width();
    }
    CHECK(std::abs(got - want) <= 1e-10);
}

TEST_CASE("crps grows as mass moves away from the observation") {
    BinGrid g(64, -10.0, 10.0);
    const double y = g.center(10);
    double prev = -1.0;
    for (int j : {10, 20, 35, 50}) {
        HistogramDistribution q;
        q.probs = Eigen::VectorXd::Zero(64);
        q.probs[j] = 1.0;
        const double c = crps_loss(q, g, y);
        CHECK(c > prev);
        CHECK(c >= 0.0);
        prev = c;
    }
}
