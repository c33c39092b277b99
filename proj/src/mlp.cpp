#include "ccgen/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace ccgen {

double apply_activation(Activation a, double v) {
    switch (a) {
        case Activation::identity: return v;
        case Activation::tanh_fn: return std::tanh(v);
        case Activation::leaky_relu: return v >= 0.0 ? v : 0.01 * v;
        case Activation::sine: return std::sin(v);
        case Activation::abs_fn: return std::abs(v);
        case Activation::softplus:
            // log(1 + e^v), overflow-safe.
            return v > 30.0 ? v : std::log1p(std::exp(v));
    }
    return v;
}

double RandomMlp::weight_std(int width, double density) {
    return std::sqrt(2.0 / std::max(width * density, 1.0));
}

RandomMlp build_random_mlp(const MlpBuildSpec& spec, Rng& rng) {
    if (spec.layers < 1 || spec.width < 1 || spec.input_dim < 1) {
        throw std::invalid_argument("build_random_mlp: layers, width, input_dim must be >= 1");
    }
    if (!(spec.density > 0.0 && spec.density <= 1.0)) {
        throw std::invalid_argument("build_random_mlp: density must be in (0, 1]");
    }

    const double sigma_w = RandomMlp::weight_std(spec.width, spec.density);

    RandomMlp mlp;
    mlp.input_dim = spec.input_dim;
    mlp.width = spec.width;
    mlp.hidden.resize(static_cast<std::size_t>(spec.layers));

    std::vector<char> is_protected(static_cast<std::size_t>(spec.input_dim), 0);
    for (int c : spec.protected_input_cols) {
        if (c < 0 || c >= spec.input_dim) {
            throw std::invalid_argument("build_random_mlp: protected column out of range");
        }
        is_protected[static_cast<std::size_t>(c)] = 1;
    }

    for (int l = 0; l < spec.layers; ++l) {
        const int in = (l == 0) ? spec.input_dim : spec.width;
        MlpLayer& layer = mlp.hidden[static_cast<std::size_t>(l)];
        layer.weight.resize(spec.width, in);
        layer.kept_mask.resize(spec.width, in);
        layer.activation.resize(static_cast<std::size_t>(spec.width));
        for (int r = 0; r < spec.width; ++r) {
            for (int c = 0; c < in; ++c) {
                const double w = sigma_w * rng.normal();
                const bool prot = (l == 0) && is_protected[static_cast<std::size_t>(c)];
                const bool kept = prot || rng.bernoulli(spec.density);
                layer.kept_mask(r, c) = kept ? 1 : 0;
                layer.weight(r, c) = kept ? w : 0.0;
            }
        }
        for (int r = 0; r < spec.width; ++r) {
            layer.activation[static_cast<std::size_t>(r)] =
                static_cast<Activation>(rng.uniform_int(0, kActivationPoolSize - 1));
        }
    }

    if (spec.with_readout) {
        mlp.readout.resize(spec.width);
        mlp.readout_mask.resize(spec.width);
        for (int c = 0; c < spec.width; ++c) {
            const double w = sigma_w * rng.normal();
            const bool kept = rng.bernoulli(spec.density);
            mlp.readout_mask(c) = kept ? 1 : 0;
            mlp.readout(c) = kept ? w : 0.0;
        }
    }
    return mlp;
}

LayerNoiseSpec sample_layer_noise_spec(Rng& rng) {
    LayerNoiseSpec spec;
    spec.dist = static_cast<LayerNoiseSpec::Dist>(rng.uniform_int(0, 2));
    spec.shift = rng.uniform(-1.0, 1.0);
    spec.scale = rng.uniform(0.5, 2.0);
    return spec;
}

double draw_layer_noise(const LayerNoiseSpec& spec, double noise_scale, Rng& rng) {
    double base = 0.0;
    switch (spec.dist) {
        case LayerNoiseSpec::Dist::normal: base = rng.normal(); break;
        case LayerNoiseSpec::Dist::laplace: base = rng.laplace(); break;
        case LayerNoiseSpec::Dist::student_t3: base = rng.student_t3(); break;
    }
    return noise_scale * (spec.scale * base + spec.shift);
}

void mlp_apply_layer_row(const RandomMlp& mlp, int layer, const double* in,
                         const double* noise, double* out) {
    const MlpLayer& lay = mlp.hidden[static_cast<std::size_t>(layer)];
    const int in_dim = static_cast<int>(lay.weight.cols());
    const int width = mlp.width;
    const std::ptrdiff_t stride = lay.weight.rows(); // column-major
    for (int r = 0; r < width; ++r) {
        double acc = 0.0;
        const double* wrow = lay.weight.data() + r;
        for (int c = 0; c < in_dim; ++c) {
            acc += wrow[static_cast<std::ptrdiff_t>(c) * stride] * in[c];
        }
        acc = apply_activation(lay.activation[static_cast<std::size_t>(r)], acc);
        if (noise != nullptr) acc += noise[r];
        out[r] = acc;
    }
}

void mlp_forward_row(const RandomMlp& mlp, int first, const double* input,
                     const double* const* noise, double* values) {
    const int width = mlp.width;
    const double* prev = input;
    for (int l = first; l < mlp.layer_count(); ++l) {
        double* out = values + static_cast<std::size_t>(l - first) * static_cast<std::size_t>(width);
        mlp_apply_layer_row(mlp, l, prev, noise != nullptr ? noise[l] : nullptr, out);
        prev = out;
    }
}

double mlp_readout(const RandomMlp& mlp, const double* last_layer) {
    if (mlp.readout.size() == 0) {
        throw std::logic_error("mlp_readout: network has no readout");
    }
    double acc = 0.0;
    for (int c = 0; c < mlp.width; ++c) acc += mlp.readout(c) * last_layer[c];
    return acc;
}

} // namespace ccgen
