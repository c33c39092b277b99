#include "ccgen/histogram.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ccgen {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * (1.0 / std::numbers::sqrt2)); }

double population_std(const Eigen::VectorXd& v, double mean) {
    const double var = (v.array() - mean).square().sum() / static_cast<double>(v.size());
    return std::sqrt(var);
}

} // namespace

BinGrid::BinGrid(int bin_count, double lo, double hi) {
    if (bin_count < 1) throw std::invalid_argument("BinGrid: bin_count must be >= 1");
    if (!(hi > lo)) throw std::invalid_argument("BinGrid: hi must exceed lo");
    edges.resize(static_cast<std::size_t>(bin_count) + 1);
    const double w = (hi - lo) / bin_count;
    for (int l = 0; l <= bin_count; ++l) {
        edges[static_cast<std::size_t>(l)] = lo + w * l;
    }
    edges.back() = hi;
}

void BinGrid::validate() const {
    if (edges.size() < 2) throw std::invalid_argument("BinGrid: needs at least one bin");
    for (std::size_t l = 0; l + 1 < edges.size(); ++l) {
        if (!(edges[l] < edges[l + 1])) {
            throw std::invalid_argument("BinGrid monotonicity");
        }
    }
    const double w = (edges.back() - edges.front()) / static_cast<double>(edges.size() - 1);
    for (std::size_t l = 0; l + 1 < edges.size(); ++l) {
        if (std::abs((edges[l + 1] - edges[l]) - w) > 1e-9 * std::max(1.0, std::abs(w))) {
            throw std::invalid_argument("BinGrid uniform width");
        }
    }
}

void HistogramDistribution::validate(double tol) const {
    if (probs.size() == 0) throw std::invalid_argument("HistogramDistribution: empty");
    if ((probs.array() < 0.0).any()) {
        throw std::invalid_argument("HistogramDistribution: negative mass");
    }
    if (std::abs(probs.sum() - 1.0) > tol) {
        throw std::invalid_argument("HistogramDistribution: mass does not sum to one");
    }
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& y) const {
    if (degenerate) return Eigen::VectorXd::Zero(y.size());
    return (y.array() - mean) / std;
}

Eigen::VectorXd Standardizer::invert(const Eigen::VectorXd& z) const {
    if (degenerate) return Eigen::VectorXd::Constant(z.size(), mean);
    return (z.array() * std + mean);
}

Standardizer fit_standardizer(const Eigen::VectorXd& context_y) {
    if (context_y.size() < 2) {
        throw std::invalid_argument("fit_standardizer: needs at least two context outcomes");
    }
    Standardizer s;
    s.mean = context_y.mean();
    s.std = population_std(context_y, s.mean);
    if (s.std < 1e-12) {
        s.std = 1.0;
        s.degenerate = true;
    }
    return s;
}

HistogramDistribution gaussian_bin_mass(double mu, double sigma, const BinGrid& grid) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_bin_mass: sigma must be positive");
    const int L = grid.bins();
    HistogramDistribution h;
    h.probs.resize(L);
    // Cumulative values at every edge; per-bin mass by difference keeps the
    // total telescoping to one.
    double prev = normal_cdf((grid.edge(0) - mu) / sigma);
    const double below = prev;
    for (int l = 0; l < L; ++l) {
        const double cur = normal_cdf((grid.edge(l + 1) - mu) / sigma);
        h.probs[l] = std::max(cur - prev, 0.0);
        prev = cur;
    }
    h.probs[0] += below;
    h.probs[L - 1] += 1.0 - prev;
    return h;
}

double histogram_loss(const HistogramDistribution& q, const HistogramDistribution& target) {
    if (q.bins() != target.bins()) {
        throw std::invalid_argument("histogram_loss: bin count mismatch");
    }
    double loss = 0.0;
    for (int l = 0; l < q.bins(); ++l) {
        const double t = target.probs[l];
        if (t != 0.0) {
            loss -= t * std::log(std::max(q.probs[l], kLogFloor));
        }
    }
    return loss;
}

double histogram_mean(const HistogramDistribution& q, const BinGrid& grid) {
    if (q.bins() != grid.bins()) {
        throw std::invalid_argument("histogram_mean: bin count mismatch");
    }
    double m = 0.0;
    for (int l = 0; l < q.bins(); ++l) m += q.probs[l] * grid.center(l);
    return m;
}

double crps_loss(const HistogramDistribution& q, const BinGrid& grid, double y_true) {
    if (q.bins() != grid.bins()) {
        throw std::invalid_argument("crps_loss: bin count mismatch");
    }
    const double w = grid.width();
    double cdf = 0.0;
    double crps = 0.0;
    for (int l = 0; l < q.bins(); ++l) {
        cdf += q.probs[l];
        const double step = (y_true <= grid.edge(l + 1)) ? 1.0 : 0.0;
        const double d = cdf - step;
        crps += d * d * w;
    }
    return crps;
}

} // namespace ccgen
