#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ccgen/rng.hpp"

namespace ccgen {

// Per-node activation pool. Mixes smooth, periodic and kinked responses so
// sampled response curves cover a wide range of shapes.
enum class Activation : std::uint8_t {
    identity,
    tanh_fn,
    leaky_relu, // slope 0.01 on the negative side
    sine,
    abs_fn,
    softplus,
};

double apply_activation(Activation a, double v);

constexpr int kActivationPoolSize = 6;

struct MlpLayer {
    // Effective weights (already masked); kept_mask records which edges
    // survived sparsification, 1 = kept.
    Eigen::MatrixXd weight; // out x in
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> kept_mask;
    std::vector<Activation> activation; // one per output node
};

// A randomized sparse MLP. Weight entries are N(0, sigma_w^2) with
// sigma_w = sqrt(2 / max(width * density, 1)); each non-protected edge is
// kept with probability `density`.
struct RandomMlp {
    int input_dim = 0;
    int width = 0;
    std::vector<MlpLayer> hidden; // hidden[l] maps layer l values to layer l+1
    Eigen::RowVectorXd readout;   // empty when the net has no scalar output
    Eigen::Matrix<std::uint8_t, 1, Eigen::Dynamic> readout_mask;

    int layer_count() const { return static_cast<int>(hidden.size()); }

    static double weight_std(int width, double density);
};

struct MlpBuildSpec {
    int layers = 3;     // number of hidden layers
    int width = 8;
    int input_dim = 8;
    double density = 1.0;
    bool with_readout = false;
    // First-layer input columns whose outgoing edges are never dropped.
    std::vector<int> protected_input_cols;
};

RandomMlp build_random_mlp(const MlpBuildSpec& spec, Rng& rng);

// One exogenous noise field for a forward pass: per layer, a distribution
// draw with random shift/scale, all multiplied by the global noise scale.
struct LayerNoiseSpec {
    enum class Dist : std::uint8_t { normal, laplace, student_t3 };
    Dist dist = Dist::normal;
    double shift = 0.0;
    double scale = 1.0;
};

LayerNoiseSpec sample_layer_noise_spec(Rng& rng);
double draw_layer_noise(const LayerNoiseSpec& spec, double noise_scale, Rng& rng);

// Applies hidden layer `layer` to one row: out = act(W * in) + noise.
// Both batched generation and single-row replay funnel through this one
// routine, so re-evaluating a row is bit-identical to the original pass.
void mlp_apply_layer_row(const RandomMlp& mlp, int layer, const double* in,
                         const double* noise, double* out);

// Runs hidden layers [first, layer_count) for one row. `input` feeds
// layer `first`; `noise`, when non-null, holds one nullable pointer per
// absolute layer index; `values` receives (layer_count - first) * width
// doubles, layer-major.
void mlp_forward_row(const RandomMlp& mlp, int first, const double* input,
                     const double* const* noise, double* values);

// Scalar readout of the last hidden layer. Requires with_readout.
double mlp_readout(const RandomMlp& mlp, const double* last_layer);

} // namespace ccgen
