#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccgen/mlp.hpp"
#include "ccgen/rng.hpp"

namespace ccgen {

enum class PriorKind { three_mlp, one_mlp, bernstein, value_based };
enum class CorruptionMode { in_pass, post_hoc_only };

std::string to_string(PriorKind k);
PriorKind prior_kind_from_string(const std::string& s);

// Randomized hyperparameters of one sampled generating process.
// Layer counts and widths come from truncated normals with mean = variance
// = alpha, alpha log-uniform; densities are uniform on [0.1, 1].
struct PriorHyperparams {
    int n_samples = 2048;
    int n_covariates = 2; // K, at most 98
    int layers_x = 3, layers_t = 3, layers_y = 3;
    int width_x = 4, width_t = 4, width_y = 4;
    double density_x = 1.0, density_t = 1.0, density_y = 1.0;
    double confounding = 0.0; // rho
    double noise_scale = 0.1; // s

    void validate() const;
};

PriorHyperparams sample_prior_hyperparams(Rng& rng, int n_samples = 2048);

// Partition of covariate columns into confounders, treatment-only causes
// and outcome-only causes.
struct CovariateSplit {
    std::vector<int> conf, t_only, y_only;

    std::vector<int> treatment_inputs() const; // sorted conf + t_only
    std::vector<int> outcome_inputs() const;   // sorted conf + y_only
};

CovariateSplit assign_covariate_roles(int k, double rho, Rng& rng);

enum class CorruptionKind : std::uint8_t { binarize, quantize, zero_inflate };
enum class CorruptionPhase : std::uint8_t { none, in_pass, post_hoc };

struct CorruptionOp {
    CorruptionPhase phase = CorruptionPhase::none;
    CorruptionKind kind = CorruptionKind::binarize;
    double quantile_p = 0.5; // binarize: threshold quantile level
    int levels = 2;          // quantize: number of quantile levels
    double rate = 0.1;       // zero_inflate: per-entry zeroing probability
};

// Applies one corruption kind to a column. Binarize thresholds at the
// column's empirical quantile; quantize snaps to equally spaced quantile
// levels; zero_inflate zeroes entries independently at `rate`.
Eigen::VectorXd apply_tabular_corruption(const Eigen::VectorXd& column,
                                         const CorruptionOp& op, Rng& rng);

// One op per covariate node. Nodes are corrupted with probability 1/2;
// corrupted nodes go in-pass with probability 0.35, otherwise post-hoc
// (all post-hoc under post_hoc_only).
std::vector<CorruptionOp> sample_corruption_plan(int k, CorruptionMode mode, Rng& rng);

// Address of a node inside a RandomMlp: hidden layers counted from 1.
struct NodeAddr {
    int layer = 1;
    int index = 0;
};

// Factual rows plus one or more uniform counterfactual treatments per row
// with their noise-free expected outcomes.
struct Dataset {
    Eigen::MatrixXd covariates; // N x K
    Eigen::VectorXd t;          // factual treatment in [0, 1]
    Eigen::VectorXd y;          // factual outcome
    Eigen::MatrixXd t_cf;       // N x C counterfactual treatments in [0, 1]
    Eigen::MatrixXd cepo_cf;    // N x C matching expected outcomes

    std::optional<std::pair<double, double>> y_standardization;
    std::optional<std::pair<double, double>> t_standardization;

    int rows() const { return static_cast<int>(covariates.rows()); }
    int cols() const { return static_cast<int>(covariates.cols()); }

    void validate() const; // finite everywhere, treatments within [0, 1]
};

struct PriorConfig {
    PriorKind kind = PriorKind::three_mlp;
    CorruptionMode corruption = CorruptionMode::in_pass;
    bool positivity = true;
    int n_samples = 2048;
    int counterfactuals_per_row = 1;
    int max_retries = 16;
    // Lower bound on the per-row noise multiplier scale(eta) = |eta| + floor.
    double positivity_floor = 0.05;
    // Diagnostic multiplier on the additive outcome noise; 0 yields
    // noiseless factual outcomes.
    double outcome_noise_multiplier = 1.0;
};

// A sampled structural model with enough retained state to answer
// noise-free expected-outcome queries at any treatment value. Immutable
// after construction; concurrent queries are safe.
struct Dgp {
    PriorConfig config;
    PriorHyperparams hp;
    std::uint64_t seed = 0;
    int retries_used = 0;

    RandomMlp mlp_x, mlp_t, mlp_y; // one_mlp uses mlp_x as the single net
    CovariateSplit split;
    std::vector<NodeAddr> covariate_nodes;
    std::vector<CorruptionOp> corruption_plan;
    NodeAddr eta_t_node, eta_y_node;
    NodeAddr treat_node;   // one_mlp only
    NodeAddr outcome_node; // one_mlp only, sits in the last layer

    double t_raw_min = 0.0, t_raw_max = 1.0;
    double sigma_t_tilde = 0.0; // std of the expected-treatment column
    double sigma_mu = 0.0;      // std of the factual expected outcomes
    double eta_t_std = 1.0, eta_y_std = 1.0;

    // Retained for replaying outcome passes row by row. Per-row state is
    // stored one column per sample so a row's values are contiguous.
    Eigen::MatrixXd covariates;                 // final corrupted N x K
    Eigen::MatrixXd outcome_input_cols;         // three_mlp: |conf + y_only| x N
    Eigen::MatrixXd resume_values;              // one_mlp: H x N treatment-layer values
    std::vector<Eigen::MatrixXd> outcome_noise; // per replayed hidden layer, H x N
    Eigen::VectorXd eta_y_values;               // value of the outcome noise node, per row
    Eigen::VectorXd cepo_factual;

    // Noise-free expected outcome for a retained row at treatment t,
    // replaying the row's stored exogenous draws. Exactly matches the
    // factual pass at the factual treatment.
    double query_cepo(int row, double t) const;
    Eigen::VectorXd query_cepo_grid(int row, const Eigen::VectorXd& ts) const;

    // One noisy outcome draw at (row, t): query_cepo plus the additive
    // heteroscedastic outcome noise. Redraws average to query_cepo.
    double sample_outcome(int row, double t, Rng& rng) const;

    // Per-row conditional treatment noise std in raw units:
    // sigma_t_tilde * (|eta| / eta_std + floor). Zero when positivity off.
    double treatment_noise_std(int row) const;

    Eigen::VectorXd eta_t_values; // treatment noise node, per row
};

// Noisy forward generation of the covariate table: z0 is pure noise, each
// layer adds exogenous noise, covariate nodes are read across layers,
// in-pass nodes are corrupted mid-propagation and post-hoc nodes after.
Eigen::MatrixXd generate_covariates(const RandomMlp& mlp_x, int n, double noise_scale,
                                    const std::vector<NodeAddr>& covariate_nodes,
                                    const std::vector<CorruptionOp>& plan,
                                    Rng& noise_rng, Rng& corruption_rng);

// Heteroscedastic treatment draw around the expected treatment column.
struct TreatmentDraw {
    Eigen::VectorXd t_raw;
    Eigen::VectorXd t; // min-max scaled to [0, 1]
    double sigma_t_tilde = 0.0;
    double eta_std = 1.0;
    double raw_min = 0.0, raw_max = 1.0;
};

TreatmentDraw make_treatment(const Eigen::VectorXd& t_tilde, const Eigen::VectorXd& eta,
                             bool positivity, double floor, Rng& rng);

// Draws one generating process and its dataset; wholesale resample on any
// degeneracy, up to config.max_retries, then PriorExhausted.
std::pair<Dgp, Dataset> sample_dgp_dataset(const PriorConfig& config, std::uint64_t seed);

} // namespace ccgen
