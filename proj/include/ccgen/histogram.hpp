#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ccgen {

// Uniform quantization of the standardized outcome axis. Default is 1024
// bins on [-10, 10]; the toy model runs a 64-bin grid on the same range.
struct BinGrid {
    BinGrid(int bin_count, double lo, double hi);

    int bins() const { return static_cast<int>(edges.size()) - 1; }
    double lo() const { return edges.front(); }
    double hi() const { return edges.back(); }
    double width() const { return (hi() - lo()) / bins(); }
    double edge(int l) const { return edges[static_cast<std::size_t>(l)]; }
    double center(int l) const { return 0.5 * (edge(l) + edge(l + 1)); }

    // Throws std::invalid_argument naming the violated property
    // ("BinGrid monotonicity" / "BinGrid uniform width").
    void validate() const;

    std::vector<double> edges;
};

// Probability mass over the bins of a BinGrid.
struct HistogramDistribution {
    Eigen::VectorXd probs;

    int bins() const { return static_cast<int>(probs.size()); }
    void validate(double tol = 1e-12) const;
};

// z-standardization fitted on context outcomes only. Population (divide
// by N) convention. A near-constant context flags the transform as
// degenerate: apply() maps to zero, invert() maps back to the mean.
struct Standardizer {
    double mean = 0.0;
    double std = 1.0;
    bool degenerate = false;

    double apply(double y) const { return degenerate ? 0.0 : (y - mean) / std; }
    double invert(double z) const { return degenerate ? mean : mean + z * std; }

    Eigen::VectorXd apply(const Eigen::VectorXd& y) const;
    Eigen::VectorXd invert(const Eigen::VectorXd& z) const;
};

Standardizer fit_standardizer(const Eigen::VectorXd& context_y);

// Mass a Normal(mu, sigma^2) assigns to each bin; tail mass outside the
// grid goes to the first/last bin so the total stays exactly one.
HistogramDistribution gaussian_bin_mass(double mu, double sigma, const BinGrid& grid);

// Cross-entropy -sum target[l] * log(max(q[l], 1e-12)).
double histogram_loss(const HistogramDistribution& q, const HistogramDistribution& target);

double histogram_mean(const HistogramDistribution& q, const BinGrid& grid);

// Discrete CRPS over the grid: sum over bins of
// (F_q(edge_{l+1}) - 1{y_true <= edge_{l+1}})^2 * binwidth.
double crps_loss(const HistogramDistribution& q, const BinGrid& grid, double y_true);

constexpr double kLogFloor = 1e-12;

} // namespace ccgen
