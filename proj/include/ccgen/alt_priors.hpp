#pragma once

#include <Eigen/Dense>
#include <utility>

#include "ccgen/prior.hpp"
#include "ccgen/rng.hpp"

namespace ccgen {

// Conditional treatment model: t = logistic(Normal(mean, (overlap*std)^2)).
// Smaller overlap concentrates treatments and weakens coverage of [0, 1].
struct SigmoidNormalTreatment {
    Eigen::VectorXd cond_mean; // per row
    Eigen::VectorXd cond_std;  // per row, strictly positive
    double overlap = 1.0;      // alpha in (0, 1]
};

// Strictly inside (0, 1).
double sample_sigmoid_normal_treatment(const SigmoidNormalTreatment& model, int row, Rng& rng);

// Bernstein basis evaluation: sum_k coeffs[k] * C(K,k) t^k (1-t)^(K-k).
double bernstein_polynomial(const Eigen::VectorXd& coeffs, double t);

// Response curves are degree-Kb Bernstein polynomials whose coefficients
// mix a per-row conditional map with a shared global draw.
struct BernsteinDgp {
    int degree = 2;                // Kb
    double heterogeneity = 0.0;    // lambda
    double noise_fraction = 0.1;   // outcome noise variance as a share of curve variance
    Eigen::VectorXd global_coeffs; // Kb+1
    Eigen::MatrixXd row_coeffs;    // N x (Kb+1), conditional map output c(x)
    Eigen::MatrixXd mixed_coeffs;  // N x (Kb+1), lambda*c(x) + (1-lambda)*c0
    Eigen::MatrixXd covariates;    // N x K, standardized
    SigmoidNormalTreatment treatment;
    Eigen::VectorXd outcome_noise; // centered, scaled, per row

    double cepo(int row, double t) const;
};

// Response curves stored as values at sorted support points, linearly
// interpolated in between; per-knot noise columns share the interpolation.
struct ValueBasedDgp {
    Eigen::VectorXd support_points; // strictly increasing, inside [0, 1]
    Eigen::MatrixXd cepo_columns;   // N x knots
    Eigen::MatrixXd noise_columns;  // N x knots, variance-scaled per knot
    double noise_fraction = 0.1;
    Eigen::MatrixXd covariates; // N x K, standardized
    SigmoidNormalTreatment treatment;

    // Interpolated (expected outcome, noise) at t, clamped to the support
    // range outside it.
    std::pair<double, double> cepo_and_noise(int row, double t) const;
    double cepo(int row, double t) const { return cepo_and_noise(row, t).first; }
};

std::pair<BernsteinDgp, Dataset> sample_bernstein_dataset(const PriorConfig& config,
                                                          std::uint64_t seed);
std::pair<ValueBasedDgp, Dataset> sample_value_based_dataset(const PriorConfig& config,
                                                             std::uint64_t seed);

} // namespace ccgen
