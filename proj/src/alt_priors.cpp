#include "ccgen/alt_priors.hpp"

#include <algorithm>
#include <cmath>

#include "ccgen/errors.hpp"

namespace ccgen {

namespace {

using detail::DegenerateDgp;

double logistic(double v) {
    const double t = 1.0 / (1.0 + std::exp(-v));
    // Keep draws strictly inside (0, 1) even when the pre-logistic value
    // saturates the exponential.
    return std::clamp(t, 1e-12, 1.0 - 1e-12);
}

double population_std(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
}

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    if (!m.allFinite()) throw DegenerateDgp{DegenerateDgp::Reason::non_finite};
}

Eigen::MatrixXd standardize_columns(Eigen::MatrixXd x) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double mean = x.col(c).mean();
        const double sd = population_std(x.col(c));
        if (sd > 1e-12) {
            x.col(c) = (x.col(c).array() - mean) / sd;
        } else {
            x.col(c).setZero();
        }
    }
    return x;
}

// Deterministic conditional map: a noise-free random net plus a masked
// random readout matrix, evaluated row-wise.
struct ConditionalMap {
    RandomMlp net;
    Eigen::MatrixXd readouts; // n_outputs x width

    Eigen::VectorXd eval(const Eigen::VectorXd& x) const {
        const int layers = net.layer_count();
        std::vector<double> values(static_cast<std::size_t>(layers) *
                                   static_cast<std::size_t>(net.width));
        mlp_forward_row(net, 0, x.data(), nullptr, values.data());
        const Eigen::Map<const Eigen::VectorXd> last(
            values.data() + static_cast<std::size_t>(layers - 1) * net.width, net.width);
        return readouts * last;
    }
};

ConditionalMap build_conditional_map(int input_dim, int layers, int width, double density,
                                     int n_outputs, Rng& rng) {
    MlpBuildSpec spec;
    spec.layers = layers;
    spec.width = width;
    spec.input_dim = input_dim;
    spec.density = density;
    ConditionalMap map;
    map.net = build_random_mlp(spec, rng);
    const double sigma_w = RandomMlp::weight_std(width, density);
    map.readouts.resize(n_outputs, width);
    for (int r = 0; r < n_outputs; ++r) {
        for (int c = 0; c < width; ++c) {
            const double w = sigma_w * rng.normal();
            map.readouts(r, c) = rng.bernoulli(density) ? w : 0.0;
        }
    }
    return map;
}

// Raw node table via the shared noise-driven net, no corruption.
Eigen::MatrixXd sample_node_table(const PriorHyperparams& hp, int n_columns_needed, Rng& net_rng,
                                  Rng& noise_rng, std::vector<int>* node_picks,
                                  RandomMlp* net_out) {
    if (hp.layers_x * hp.width_x < n_columns_needed) {
        throw DegenerateDgp{DegenerateDgp::Reason::too_few_nodes};
    }
    MlpBuildSpec spec;
    spec.layers = hp.layers_x;
    spec.width = hp.width_x;
    spec.input_dim = hp.width_x;
    spec.density = hp.density_x;
    RandomMlp net = build_random_mlp(spec, net_rng);
    *node_picks = net_rng.sample_without_replacement(hp.layers_x * hp.width_x, n_columns_needed);

    std::vector<NodeAddr> nodes;
    std::vector<CorruptionOp> plan(static_cast<std::size_t>(n_columns_needed)); // all phase none
    for (int flat : *node_picks) nodes.push_back(NodeAddr{flat / hp.width_x + 1, flat % hp.width_x});
    Rng unused_corrupt = Rng::stream(0, "unused");
    Eigen::MatrixXd cols =
        generate_covariates(net, hp.n_samples, hp.noise_scale, nodes, plan, noise_rng, unused_corrupt);
    require_finite(cols);
    if (net_out != nullptr) *net_out = std::move(net);
    return cols; // n_samples x n_columns_needed
}

SigmoidNormalTreatment make_treatment_model(const Eigen::MatrixXd& x, const PriorHyperparams& hp,
                                            Rng& rng) {
    // Conditional mean from the readout, conditional std from a softplus
    // of a second readout with a small floor.
    const ConditionalMap map = build_conditional_map(static_cast<int>(x.cols()), hp.layers_t,
                                                     hp.width_t, hp.density_t, 2, rng);
    const int n = static_cast<int>(x.rows());
    SigmoidNormalTreatment model;
    model.cond_mean.resize(n);
    model.cond_std.resize(n);
    for (int row = 0; row < n; ++row) {
        const Eigen::VectorXd out = map.eval(x.row(row).transpose());
        model.cond_mean[row] = out[0];
        const double v = out[1];
        model.cond_std[row] = 1e-6 + (v > 30.0 ? v : std::log1p(std::exp(v)));
    }
    require_finite(model.cond_mean);
    require_finite(model.cond_std);
    model.overlap = rng.uniform(0.1, 1.0);
    return model;
}

} // namespace

double sample_sigmoid_normal_treatment(const SigmoidNormalTreatment& model, int row, Rng& rng) {
    const double pre =
        model.cond_mean[row] + model.overlap * model.cond_std[row] * rng.normal();
    return logistic(pre);
}

double bernstein_polynomial(const Eigen::VectorXd& coeffs, double t) {
    const int degree = static_cast<int>(coeffs.size()) - 1;
    // Pascal-triangle binomials; degree stays single digit here.
    double value = 0.0;
    double binom = 1.0;
    for (int k = 0; k <= degree; ++k) {
        value += coeffs[k] * binom * std::pow(t, k) * std::pow(1.0 - t, degree - k);
        binom = binom * static_cast<double>(degree - k) / static_cast<double>(k + 1);
    }
    return value;
}

double BernsteinDgp::cepo(int row, double t) const {
    return bernstein_polynomial(mixed_coeffs.row(row).transpose(), t);
}

std::pair<double, double> ValueBasedDgp::cepo_and_noise(int row, double t) const {
    const int n_knots = static_cast<int>(support_points.size());
    if (t <= support_points[0]) {
        return {cepo_columns(row, 0), noise_columns(row, 0)};
    }
    if (t >= support_points[n_knots - 1]) {
        return {cepo_columns(row, n_knots - 1), noise_columns(row, n_knots - 1)};
    }
    int hi = 1;
    while (support_points[hi] < t) ++hi;
    const int lo = hi - 1;
    if (t == support_points[hi]) {
        return {cepo_columns(row, hi), noise_columns(row, hi)};
    }
    const double w = (t - support_points[lo]) / (support_points[hi] - support_points[lo]);
    const double mu = (1.0 - w) * cepo_columns(row, lo) + w * cepo_columns(row, hi);
    const double eta = (1.0 - w) * noise_columns(row, lo) + w * noise_columns(row, hi);
    return {mu, eta};
}

namespace {

std::pair<BernsteinDgp, Dataset> build_bernstein(const PriorConfig& config, std::uint64_t seed,
                                                 int attempt) {
    Rng rng_hp = Rng::stream(seed, "alt_hp", static_cast<std::uint64_t>(attempt));
    Rng rng_net = Rng::stream(seed, "alt_net", static_cast<std::uint64_t>(attempt));
    Rng rng_xgen = Rng::stream(seed, "alt_xgen", static_cast<std::uint64_t>(attempt));
    Rng rng_draw = Rng::stream(seed, "alt_draw", static_cast<std::uint64_t>(attempt));
    Rng rng_cf = Rng::stream(seed, "alt_cf", static_cast<std::uint64_t>(attempt));

    const PriorHyperparams hp = sample_prior_hyperparams(rng_hp, config.n_samples);
    const int n = hp.n_samples;
    const int k = hp.n_covariates;

    BernsteinDgp dgp;
    dgp.degree = static_cast<int>(rng_hp.uniform_int(2, 8));
    dgp.heterogeneity = rng_hp.uniform01();
    dgp.noise_fraction = rng_hp.uniform(0.05, 0.3);

    // Table columns: K covariates plus one reserved noise column.
    std::vector<int> picks;
    const Eigen::MatrixXd table = sample_node_table(hp, k + 1, rng_net, rng_xgen, &picks, nullptr);
    dgp.covariates = standardize_columns(table.leftCols(k));
    Eigen::VectorXd noise_raw = table.col(k);

    dgp.treatment = make_treatment_model(dgp.covariates, hp, rng_net);

    const int n_coeffs = dgp.degree + 1;
    const ConditionalMap coeff_map =
        build_conditional_map(k, hp.layers_y, hp.width_y, hp.density_y, n_coeffs, rng_net);
    dgp.global_coeffs.resize(n_coeffs);
    for (int i = 0; i < n_coeffs; ++i) dgp.global_coeffs[i] = rng_net.normal();

    dgp.row_coeffs.resize(n, n_coeffs);
    for (int row = 0; row < n; ++row) {
        dgp.row_coeffs.row(row) = coeff_map.eval(dgp.covariates.row(row).transpose()).transpose();
    }
    require_finite(dgp.row_coeffs);
    dgp.mixed_coeffs = dgp.heterogeneity * dgp.row_coeffs +
                       (1.0 - dgp.heterogeneity) *
                           Eigen::VectorXd::Ones(n) * dgp.global_coeffs.transpose();

    Dataset ds;
    ds.covariates = dgp.covariates;
    ds.t.resize(n);
    for (int row = 0; row < n; ++row) {
        ds.t[row] = sample_sigmoid_normal_treatment(dgp.treatment, row, rng_draw);
    }

    Eigen::VectorXd mu_fact(n);
    for (int row = 0; row < n; ++row) mu_fact[row] = dgp.cepo(row, ds.t[row]);
    require_finite(mu_fact);

    // Centered noise column scaled to the configured share of the factual
    // curve variance.
    const double noise_sd = population_std(noise_raw);
    const double target_sd = std::sqrt(dgp.noise_fraction) * population_std(mu_fact);
    if (noise_sd > 1e-12 && target_sd > 0.0) {
        dgp.outcome_noise = (noise_raw.array() - noise_raw.mean()) / noise_sd * target_sd;
    } else {
        dgp.outcome_noise = Eigen::VectorXd::Zero(n);
    }
    ds.y = mu_fact + config.outcome_noise_multiplier * dgp.outcome_noise;

    const int cf = std::max(config.counterfactuals_per_row, 1);
    ds.t_cf.resize(n, cf);
    ds.cepo_cf.resize(n, cf);
    for (int row = 0; row < n; ++row) {
        for (int c = 0; c < cf; ++c) {
            const double tq = rng_cf.uniform01();
            ds.t_cf(row, c) = tq;
            ds.cepo_cf(row, c) = dgp.cepo(row, tq);
        }
    }
    return {std::move(dgp), std::move(ds)};
}

std::pair<ValueBasedDgp, Dataset> build_value_based(const PriorConfig& config, std::uint64_t seed,
                                                    int attempt) {
    Rng rng_hp = Rng::stream(seed, "vb_hp", static_cast<std::uint64_t>(attempt));
    Rng rng_net = Rng::stream(seed, "vb_net", static_cast<std::uint64_t>(attempt));
    Rng rng_xgen = Rng::stream(seed, "vb_xgen", static_cast<std::uint64_t>(attempt));
    Rng rng_draw = Rng::stream(seed, "vb_draw", static_cast<std::uint64_t>(attempt));
    Rng rng_cf = Rng::stream(seed, "vb_cf", static_cast<std::uint64_t>(attempt));

    const PriorHyperparams hp = sample_prior_hyperparams(rng_hp, config.n_samples);
    const int n = hp.n_samples;
    const int k = hp.n_covariates;

    ValueBasedDgp dgp;
    const int knots = static_cast<int>(rng_hp.uniform_int(3, 12));
    dgp.noise_fraction = rng_hp.uniform(0.05, 0.3);

    dgp.support_points.resize(knots);
    for (;;) {
        for (int i = 0; i < knots; ++i) dgp.support_points[i] = rng_hp.uniform01();
        std::sort(dgp.support_points.data(), dgp.support_points.data() + knots);
        bool strict = true;
        for (int i = 0; i + 1 < knots; ++i) {
            if (!(dgp.support_points[i] < dgp.support_points[i + 1])) strict = false;
        }
        if (strict) break;
    }

    std::vector<int> picks;
    const Eigen::MatrixXd table =
        sample_node_table(hp, k + 2 * knots, rng_net, rng_xgen, &picks, nullptr);
    dgp.covariates = standardize_columns(table.leftCols(k));
    dgp.cepo_columns = table.middleCols(k, knots);
    require_finite(dgp.cepo_columns);

    // Per-knot noise columns, centered and scaled so their variance is the
    // configured fraction of the matching signal variance.
    dgp.noise_columns.resize(n, knots);
    for (int j = 0; j < knots; ++j) {
        const Eigen::VectorXd raw = table.col(k + knots + j);
        const double raw_sd = population_std(raw);
        const double target_sd =
            std::sqrt(dgp.noise_fraction) * population_std(dgp.cepo_columns.col(j));
        if (raw_sd > 1e-12 && target_sd > 0.0) {
            dgp.noise_columns.col(j) = (raw.array() - raw.mean()) / raw_sd * target_sd;
        } else {
            dgp.noise_columns.col(j).setZero();
        }
    }

    dgp.treatment = make_treatment_model(dgp.covariates, hp, rng_net);

    Dataset ds;
    ds.covariates = dgp.covariates;
    ds.t.resize(n);
    ds.y.resize(n);
    for (int row = 0; row < n; ++row) {
        ds.t[row] = sample_sigmoid_normal_treatment(dgp.treatment, row, rng_draw);
        const auto [mu, eta] = dgp.cepo_and_noise(row, ds.t[row]);
        ds.y[row] = mu + config.outcome_noise_multiplier * eta;
    }

    const int cf = std::max(config.counterfactuals_per_row, 1);
    ds.t_cf.resize(n, cf);
    ds.cepo_cf.resize(n, cf);
    for (int row = 0; row < n; ++row) {
        for (int c = 0; c < cf; ++c) {
            const double tq = rng_cf.uniform01();
            ds.t_cf(row, c) = tq;
            ds.cepo_cf(row, c) = dgp.cepo(row, tq);
        }
    }
    return {std::move(dgp), std::move(ds)};
}

} // namespace

std::pair<BernsteinDgp, Dataset> sample_bernstein_dataset(const PriorConfig& config,
                                                          std::uint64_t seed) {
    for (int attempt = 0; attempt < config.max_retries; ++attempt) {
        try {
            auto out = build_bernstein(config, seed, attempt);
            out.second.validate();
            return out;
        } catch (const DegenerateDgp&) {
            continue;
        }
    }
    throw PriorExhausted("bernstein prior exhausted retries (seed " + std::to_string(seed) + ")");
}

std::pair<ValueBasedDgp, Dataset> sample_value_based_dataset(const PriorConfig& config,
                                                             std::uint64_t seed) {
    for (int attempt = 0; attempt < config.max_retries; ++attempt) {
        try {
            auto out = build_value_based(config, seed, attempt);
            out.second.validate();
            return out;
        } catch (const DegenerateDgp&) {
            continue;
        }
    }
    throw PriorExhausted("value-based prior exhausted retries (seed " + std::to_string(seed) + ")");
}

} // namespace ccgen
