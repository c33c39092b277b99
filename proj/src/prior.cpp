#include "ccgen/prior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ccgen/errors.hpp"

namespace ccgen {

namespace {

using detail::DegenerateDgp;

double population_std(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
}

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    if (!m.allFinite()) throw DegenerateDgp{DegenerateDgp::Reason::non_finite};
}

// Linear-interpolated empirical quantile of a column.
double empirical_quantile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

int node_flat_index(const NodeAddr& a, int width) { return (a.layer - 1) * width + a.index; }

NodeAddr node_from_flat(int flat, int width) { return NodeAddr{flat / width + 1, flat % width}; }

} // namespace

std::string to_string(PriorKind k) {
    switch (k) {
        case PriorKind::three_mlp: return "three_mlp";
        case PriorKind::one_mlp: return "one_mlp";
        case PriorKind::bernstein: return "bernstein";
        case PriorKind::value_based: return "value_based";
    }
    return "three_mlp";
}

PriorKind prior_kind_from_string(const std::string& s) {
    if (s == "three_mlp") return PriorKind::three_mlp;
    if (s == "one_mlp") return PriorKind::one_mlp;
    if (s == "bernstein") return PriorKind::bernstein;
    if (s == "value_based") return PriorKind::value_based;
    throw std::invalid_argument("unknown prior kind: " + s);
}

void PriorHyperparams::validate() const {
    auto check = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("PriorHyperparams: ") + what);
    };
    check(n_samples >= 2, "n_samples >= 2");
    check(n_covariates >= 1 && n_covariates <= 98, "K in [1, 98]");
    check(layers_x >= 3 && layers_t >= 3 && layers_y >= 3, "layer counts >= 3");
    check(width_x >= 4 && width_t >= 4 && width_y >= 4, "widths >= 4");
    for (double d : {density_x, density_t, density_y}) {
        check(d >= 0.1 && d <= 1.0, "densities in [0.1, 1]");
    }
    check(confounding >= 0.0 && confounding <= 1.0, "confounding in [0, 1]");
    check(noise_scale > 0.0, "noise_scale > 0");
}

PriorHyperparams sample_prior_hyperparams(Rng& rng, int n_samples) {
    auto trunc_count = [&rng](double a, double b, double lower) {
        const double alpha = rng.log_uniform(a, b);
        const double x = rng.truncated_normal(alpha, std::sqrt(alpha), lower);
        return static_cast<int>(std::lround(x));
    };
    PriorHyperparams hp;
    hp.n_samples = n_samples;
    hp.layers_x = trunc_count(1.0, 10.0, 3.0);
    hp.layers_t = trunc_count(1.0, 10.0, 3.0);
    hp.layers_y = trunc_count(1.0, 10.0, 3.0);
    hp.width_x = trunc_count(10.0, 100.0, 4.0);
    hp.width_t = trunc_count(10.0, 100.0, 4.0);
    hp.width_y = trunc_count(10.0, 100.0, 4.0);
    hp.noise_scale = rng.log_uniform(1e-4, 0.5);
    hp.density_x = rng.uniform(0.1, 1.0);
    hp.density_t = rng.uniform(0.1, 1.0);
    hp.density_y = rng.uniform(0.1, 1.0);
    hp.confounding = rng.uniform01();
    // Covariate count bounded by the node budget of the covariate net.
    do {
        hp.n_covariates = static_cast<int>(rng.uniform_int(2, 98));
    } while (hp.n_covariates > hp.layers_x * hp.width_x);
    return hp;
}

std::vector<int> CovariateSplit::treatment_inputs() const {
    std::vector<int> v(conf);
    v.insert(v.end(), t_only.begin(), t_only.end());
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<int> CovariateSplit::outcome_inputs() const {
    std::vector<int> v(conf);
    v.insert(v.end(), y_only.begin(), y_only.end());
    std::sort(v.begin(), v.end());
    return v;
}

CovariateSplit assign_covariate_roles(int k, double rho, Rng& rng) {
    if (k < 2) throw std::invalid_argument("assign_covariate_roles: k must be >= 2");
    const int n_conf = static_cast<int>(std::lround(rho * k));
    std::vector<int> order = rng.sample_without_replacement(k, k);

    CovariateSplit split;
    for (int i = 0; i < n_conf; ++i) split.conf.push_back(order[static_cast<std::size_t>(i)]);
    for (int i = n_conf; i < k; ++i) {
        (rng.bernoulli(0.5) ? split.t_only : split.y_only).push_back(order[static_cast<std::size_t>(i)]);
    }
    // Both mechanisms must read at least one covariate; promote one index
    // to confounder if a side came up empty.
    if (split.conf.empty()) {
        if (split.t_only.empty()) {
            split.conf.push_back(split.y_only.back());
            split.y_only.pop_back();
        } else if (split.y_only.empty()) {
            split.conf.push_back(split.t_only.back());
            split.t_only.pop_back();
        }
    }
    std::sort(split.conf.begin(), split.conf.end());
    std::sort(split.t_only.begin(), split.t_only.end());
    std::sort(split.y_only.begin(), split.y_only.end());
    return split;
}

Eigen::VectorXd apply_tabular_corruption(const Eigen::VectorXd& column,
                                         const CorruptionOp& op, Rng& rng) {
    const auto n = column.size();
    Eigen::VectorXd out(n);
    switch (op.kind) {
        case CorruptionKind::binarize: {
            std::vector<double> vals(column.data(), column.data() + n);
            const double thresh = empirical_quantile(std::move(vals), op.quantile_p);
            for (Eigen::Index i = 0; i < n; ++i) out[i] = column[i] > thresh ? 1.0 : 0.0;
            break;
        }
        case CorruptionKind::quantize: {
            const int q = std::max(op.levels, 2);
            std::vector<double> vals(column.data(), column.data() + n);
            std::sort(vals.begin(), vals.end());
            std::vector<double> levels(static_cast<std::size_t>(q));
            for (int j = 0; j < q; ++j) {
                const double p = static_cast<double>(j) / static_cast<double>(q - 1);
                const double pos = p * static_cast<double>(n - 1);
                const std::size_t lo = static_cast<std::size_t>(pos);
                const double frac = pos - static_cast<double>(lo);
                levels[static_cast<std::size_t>(j)] =
                    (lo + 1 < vals.size()) ? vals[lo] * (1.0 - frac) + vals[lo + 1] * frac
                                           : vals.back();
            }
            for (Eigen::Index i = 0; i < n; ++i) {
                const double v = column[i];
                auto it = std::lower_bound(levels.begin(), levels.end(), v);
                double best;
                if (it == levels.begin()) {
                    best = *it;
                } else if (it == levels.end()) {
                    best = levels.back();
                } else {
                    const double hi = *it, lo2 = *(it - 1);
                    best = (v - lo2 <= hi - v) ? lo2 : hi;
                }
                out[i] = best;
            }
            break;
        }
        case CorruptionKind::zero_inflate: {
            for (Eigen::Index i = 0; i < n; ++i) out[i] = rng.bernoulli(op.rate) ? 0.0 : column[i];
            break;
        }
    }
    return out;
}

std::vector<CorruptionOp> sample_corruption_plan(int k, CorruptionMode mode, Rng& rng) {
    std::vector<CorruptionOp> plan(static_cast<std::size_t>(k));
    for (auto& op : plan) {
        if (!rng.bernoulli(0.5)) {
            op.phase = CorruptionPhase::none;
            continue;
        }
        const bool in_pass = (mode == CorruptionMode::in_pass) && rng.bernoulli(0.35);
        op.phase = in_pass ? CorruptionPhase::in_pass : CorruptionPhase::post_hoc;
        op.kind = static_cast<CorruptionKind>(rng.uniform_int(0, 2));
        op.quantile_p = rng.uniform(0.2, 0.8);
        op.levels = static_cast<int>(rng.uniform_int(2, 10));
        op.rate = rng.uniform(0.1, 0.5);
    }
    return plan;
}

void Dataset::validate() const {
    auto bad = [](const char* what) {
        throw NumericError(std::string("Dataset invariant violated: ") + what);
    };
    if (!covariates.allFinite() || !t.allFinite() || !y.allFinite() || !t_cf.allFinite() ||
        !cepo_cf.allFinite()) {
        bad("non-finite value");
    }
    if ((t.array() < 0.0).any() || (t.array() > 1.0).any()) bad("factual treatment outside [0, 1]");
    if ((t_cf.array() < 0.0).any() || (t_cf.array() > 1.0).any()) {
        bad("counterfactual treatment outside [0, 1]");
    }
}

namespace {

// Shared batched pass through a noise-driven net. Returns the node table
// (layers * width) x n with in-pass corruption already applied; `upto`
// limits how many hidden layers are run.
Eigen::MatrixXd run_noise_driven_net(const RandomMlp& mlp, int upto, int n, double noise_scale,
                                     const std::vector<NodeAddr>& covariate_nodes,
                                     const std::vector<CorruptionOp>& plan, Rng& noise_rng,
                                     Rng& corruption_rng) {
    const int width = mlp.width;
    Eigen::MatrixXd table(static_cast<Eigen::Index>(upto) * width, n);

    auto draw_layer = [&](Eigen::MatrixXd& dst) {
        const LayerNoiseSpec spec = sample_layer_noise_spec(noise_rng);
        dst.resize(width, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (int r = 0; r < width; ++r) dst(r, j) = draw_layer_noise(spec, noise_scale, noise_rng);
        }
    };

    Eigen::MatrixXd z_prev;
    draw_layer(z_prev); // z0 is pure noise
    Eigen::MatrixXd eps, z_cur(width, n);
    for (int l = 1; l <= upto; ++l) {
        draw_layer(eps);
        for (Eigen::Index j = 0; j < n; ++j) {
            mlp_apply_layer_row(mlp, l - 1, z_prev.col(j).data(), eps.col(j).data(),
                                z_cur.col(j).data());
        }
        require_finite(z_cur);
        // In-pass corruption: replace designated covariate node values so
        // deeper layers propagate the corrupted column.
        for (std::size_t k = 0; k < covariate_nodes.size(); ++k) {
            if (covariate_nodes[k].layer != l) continue;
            if (plan[k].phase != CorruptionPhase::in_pass) continue;
            const Eigen::VectorXd col = z_cur.row(covariate_nodes[k].index).transpose();
            z_cur.row(covariate_nodes[k].index) =
                apply_tabular_corruption(col, plan[k], corruption_rng).transpose();
        }
        table.middleRows(static_cast<Eigen::Index>(l - 1) * width, width) = z_cur;
        z_prev = z_cur;
    }
    return table;
}

// Extracts covariate columns from the node table and applies post-hoc
// corruption. Output is K x n.
Eigen::MatrixXd extract_covariates(const Eigen::MatrixXd& table, int width,
                                   const std::vector<NodeAddr>& covariate_nodes,
                                   const std::vector<CorruptionOp>& plan, Rng& corruption_rng) {
    const Eigen::Index n = table.cols();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(covariate_nodes.size()), n);
    for (std::size_t k = 0; k < covariate_nodes.size(); ++k) {
        Eigen::VectorXd col = table.row(node_flat_index(covariate_nodes[k], width)).transpose();
        if (plan[k].phase == CorruptionPhase::post_hoc) {
            col = apply_tabular_corruption(col, plan[k], corruption_rng);
        }
        x.row(static_cast<Eigen::Index>(k)) = col.transpose();
    }
    return x;
}

// Batched forward through an input-driven net with fresh layer noise.
// Returns the readout column and the value of one designated node.
struct InputNetPass {
    Eigen::VectorXd readout;
    Eigen::VectorXd node_value;
};

InputNetPass run_input_net(const RandomMlp& mlp, const Eigen::MatrixXd& inputs /* in_dim x n */,
                           const NodeAddr& probe, double noise_scale, Rng& rng) {
    const int width = mlp.width;
    const int layers = mlp.layer_count();
    const Eigen::Index n = inputs.cols();

    std::vector<Eigen::MatrixXd> eps(static_cast<std::size_t>(layers));
    for (int l = 0; l < layers; ++l) {
        const LayerNoiseSpec spec = sample_layer_noise_spec(rng);
        eps[static_cast<std::size_t>(l)].resize(width, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (int r = 0; r < width; ++r) {
                eps[static_cast<std::size_t>(l)](r, j) = draw_layer_noise(spec, noise_scale, rng);
            }
        }
    }

    InputNetPass pass;
    pass.readout.resize(n);
    pass.node_value.resize(n);
    std::vector<double> values(static_cast<std::size_t>(layers) * static_cast<std::size_t>(width));
    std::vector<const double*> noise_ptrs(static_cast<std::size_t>(layers));
    const int probe_flat = node_flat_index(probe, width);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (int l = 0; l < layers; ++l) {
            noise_ptrs[static_cast<std::size_t>(l)] = eps[static_cast<std::size_t>(l)].col(j).data();
        }
        mlp_forward_row(mlp, 0, inputs.col(j).data(), noise_ptrs.data(), values.data());
        pass.node_value[j] = values[static_cast<std::size_t>(probe_flat)];
        pass.readout[j] = mlp_readout(mlp, values.data() + static_cast<std::size_t>(layers - 1) * width);
    }
    require_finite(pass.readout);
    require_finite(pass.node_value);
    return pass;
}

} // namespace

Eigen::MatrixXd generate_covariates(const RandomMlp& mlp_x, int n, double noise_scale,
                                    const std::vector<NodeAddr>& covariate_nodes,
                                    const std::vector<CorruptionOp>& plan, Rng& noise_rng,
                                    Rng& corruption_rng) {
    if (covariate_nodes.size() != plan.size()) {
        throw std::invalid_argument("generate_covariates: plan size mismatch");
    }
    const Eigen::MatrixXd table = run_noise_driven_net(
        mlp_x, mlp_x.layer_count(), n, noise_scale, covariate_nodes, plan, noise_rng, corruption_rng);
    return extract_covariates(table, mlp_x.width, covariate_nodes, plan, corruption_rng)
        .transpose();
}

TreatmentDraw make_treatment(const Eigen::VectorXd& t_tilde, const Eigen::VectorXd& eta,
                             bool positivity, double floor, Rng& rng) {
    TreatmentDraw draw;
    draw.sigma_t_tilde = population_std(t_tilde);
    if (positivity) {
        if (!(draw.sigma_t_tilde > 0.0)) {
            throw DegenerateDgp{DegenerateDgp::Reason::degenerate_treatment};
        }
        draw.eta_std = population_std(eta);
        if (!(draw.eta_std > 0.0)) throw DegenerateDgp{DegenerateDgp::Reason::degenerate_eta};
        draw.t_raw.resize(t_tilde.size());
        for (Eigen::Index j = 0; j < t_tilde.size(); ++j) {
            const double scale = std::abs(eta[j] / draw.eta_std) + floor;
            draw.t_raw[j] = t_tilde[j] + draw.sigma_t_tilde * scale * rng.normal();
        }
    } else {
        draw.t_raw = t_tilde;
    }
    require_finite(draw.t_raw);
    draw.raw_min = draw.t_raw.minCoeff();
    draw.raw_max = draw.t_raw.maxCoeff();
    if (!(draw.raw_max > draw.raw_min)) {
        throw DegenerateDgp{DegenerateDgp::Reason::degenerate_treatment};
    }
    draw.t = (draw.t_raw.array() - draw.raw_min) / (draw.raw_max - draw.raw_min);
    return draw;
}

double Dgp::treatment_noise_std(int row) const {
    if (!config.positivity) return 0.0;
    const double scale = std::abs(eta_t_values[row] / eta_t_std) + config.positivity_floor;
    return sigma_t_tilde * scale;
}

namespace {

// Shared outcome forward; the factual pass and every counterfactual query
// run through this single routine.
double outcome_forward(const Dgp& dgp, int row, double t, double* eta_out) {
    if (dgp.config.kind == PriorKind::three_mlp) {
        const RandomMlp& net = dgp.mlp_y;
        const int width = net.width;
        const int layers = net.layer_count();
        const Eigen::Index in_dim = dgp.outcome_input_cols.rows();
        std::vector<double> input(static_cast<std::size_t>(in_dim) + 1);
        for (Eigen::Index i = 0; i < in_dim; ++i) input[static_cast<std::size_t>(i)] = dgp.outcome_input_cols(i, row);
        input[static_cast<std::size_t>(in_dim)] = t;
        std::vector<const double*> noise(static_cast<std::size_t>(layers));
        for (int l = 0; l < layers; ++l) {
            noise[static_cast<std::size_t>(l)] = dgp.outcome_noise[static_cast<std::size_t>(l)].col(row).data();
        }
        std::vector<double> values(static_cast<std::size_t>(layers) * static_cast<std::size_t>(width));
        mlp_forward_row(net, 0, input.data(), noise.data(), values.data());
        if (eta_out != nullptr) {
            *eta_out = values[static_cast<std::size_t>(node_flat_index(dgp.eta_y_node, width))];
        }
        return mlp_readout(net, values.data() + static_cast<std::size_t>(layers - 1) * width);
    }

    // one_mlp: overwrite the treatment node inside the stored treatment
    // layer and resume the pass downstream with the row's stored noise.
    const RandomMlp& net = dgp.mlp_x;
    const int width = net.width;
    const int layers = net.layer_count();
    const int lt = dgp.treat_node.layer;
    std::vector<double> buf(static_cast<std::size_t>(width));
    for (int i = 0; i < width; ++i) buf[static_cast<std::size_t>(i)] = dgp.resume_values(i, row);
    buf[static_cast<std::size_t>(dgp.treat_node.index)] =
        dgp.t_raw_min + t * (dgp.t_raw_max - dgp.t_raw_min);
    std::vector<const double*> noise(static_cast<std::size_t>(layers), nullptr);
    for (int l = lt; l < layers; ++l) {
        noise[static_cast<std::size_t>(l)] =
            dgp.outcome_noise[static_cast<std::size_t>(l - lt)].col(row).data();
    }
    std::vector<double> values(static_cast<std::size_t>(layers - lt) * static_cast<std::size_t>(width));
    mlp_forward_row(net, lt, buf.data(), noise.data(), values.data());
    if (eta_out != nullptr) {
        const int off = (dgp.eta_y_node.layer - lt - 1) * width + dgp.eta_y_node.index;
        *eta_out = values[static_cast<std::size_t>(off)];
    }
    const int out_off = (dgp.outcome_node.layer - lt - 1) * width + dgp.outcome_node.index;
    return values[static_cast<std::size_t>(out_off)];
}

} // namespace

double Dgp::query_cepo(int row, double t) const {
    if (row < 0 || row >= covariates.rows()) {
        throw std::out_of_range("query_cepo: row out of range");
    }
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("query_cepo: treatment outside [0, 1]");
    }
    return outcome_forward(*this, row, t, nullptr);
}

Eigen::VectorXd Dgp::query_cepo_grid(int row, const Eigen::VectorXd& ts) const {
    Eigen::VectorXd out(ts.size());
    for (Eigen::Index i = 0; i < ts.size(); ++i) out[i] = query_cepo(row, ts[i]);
    return out;
}

double Dgp::sample_outcome(int row, double t, Rng& rng) const {
    if (row < 0 || row >= covariates.rows()) {
        throw std::out_of_range("sample_outcome: row out of range");
    }
    double eta = 0.0;
    const double mu = outcome_forward(*this, row, t, &eta);
    const double scale = std::abs(eta / eta_y_std) + config.positivity_floor;
    return mu + config.outcome_noise_multiplier * sigma_mu * scale * rng.normal();
}

namespace {

std::pair<Dgp, Dataset> build_mlp_dgp(const PriorConfig& config, std::uint64_t seed, int attempt) {
    Rng rng_hp = Rng::stream(seed, "hp", static_cast<std::uint64_t>(attempt));
    Rng rng_net = Rng::stream(seed, "net", static_cast<std::uint64_t>(attempt));
    Rng rng_xgen = Rng::stream(seed, "xgen", static_cast<std::uint64_t>(attempt));
    Rng rng_corrupt = Rng::stream(seed, "corrupt", static_cast<std::uint64_t>(attempt));
    Rng rng_tgen = Rng::stream(seed, "tgen", static_cast<std::uint64_t>(attempt));
    Rng rng_ygen = Rng::stream(seed, "ygen", static_cast<std::uint64_t>(attempt));
    Rng rng_cf = Rng::stream(seed, "cf", static_cast<std::uint64_t>(attempt));

    Dgp dgp;
    dgp.config = config;
    dgp.seed = seed;
    dgp.hp = sample_prior_hyperparams(rng_hp, config.n_samples);
    const PriorHyperparams& hp = dgp.hp;
    const int n = hp.n_samples;
    const int k = hp.n_covariates;

    const bool single_net = config.kind == PriorKind::one_mlp;

    MlpBuildSpec spec_x;
    spec_x.layers = hp.layers_x;
    spec_x.width = hp.width_x;
    spec_x.input_dim = hp.width_x;
    spec_x.density = hp.density_x;
    spec_x.with_readout = false;
    dgp.mlp_x = build_random_mlp(spec_x, rng_net);

    if (single_net) {
        // The treatment node splits the net: covariates live at or before
        // its layer, the outcome node sits in the last layer.
        std::vector<int> feasible;
        for (int l = 1; l < hp.layers_x; ++l) {
            if (l * hp.width_x >= k + 2) feasible.push_back(l);
        }
        if (feasible.empty()) throw DegenerateDgp{DegenerateDgp::Reason::too_few_nodes};
        const int lt = feasible[static_cast<std::size_t>(
            rng_net.uniform_int(0, static_cast<long>(feasible.size()) - 1))];

        // Interventions overwrite the treatment node and resume from its
        // layer, so the node sits exactly in layer lt.
        dgp.treat_node = NodeAddr{lt, static_cast<int>(rng_net.uniform_int(0, hp.width_x - 1))};
        const int treat_flat = node_flat_index(dgp.treat_node, hp.width_x);

        // K covariates + treatment-noise node, distinct, at or before layer
        // lt, none colliding with the treatment node.
        std::vector<int> picks = rng_net.sample_without_replacement(lt * hp.width_x - 1, k + 1);
        for (int& flat : picks) {
            if (flat >= treat_flat) ++flat;
        }
        dgp.covariate_nodes.clear();
        for (int i = 0; i < k; ++i) {
            dgp.covariate_nodes.push_back(node_from_flat(picks[static_cast<std::size_t>(i)], hp.width_x));
        }
        dgp.eta_t_node = node_from_flat(picks[static_cast<std::size_t>(k)], hp.width_x);

        dgp.outcome_node = NodeAddr{hp.layers_x, static_cast<int>(rng_net.uniform_int(0, hp.width_x - 1))};
        // Outcome-noise node strictly after the treatment layer, distinct
        // from the outcome node.
        const int post_nodes = (hp.layers_x - lt) * hp.width_x;
        for (;;) {
            const int flat = static_cast<int>(rng_net.uniform_int(0, post_nodes - 1));
            NodeAddr a{lt + 1 + flat / hp.width_x, flat % hp.width_x};
            if (a.layer == dgp.outcome_node.layer && a.index == dgp.outcome_node.index) continue;
            dgp.eta_y_node = a;
            break;
        }
    } else {
        dgp.split = assign_covariate_roles(k, hp.confounding, rng_net);
        const auto t_inputs = dgp.split.treatment_inputs();
        const auto y_inputs = dgp.split.outcome_inputs();

        MlpBuildSpec spec_t;
        spec_t.layers = hp.layers_t;
        spec_t.width = hp.width_t;
        spec_t.input_dim = static_cast<int>(t_inputs.size());
        spec_t.density = hp.density_t;
        spec_t.with_readout = true;
        dgp.mlp_t = build_random_mlp(spec_t, rng_net);

        MlpBuildSpec spec_y;
        spec_y.layers = hp.layers_y;
        spec_y.width = hp.width_y;
        spec_y.input_dim = static_cast<int>(y_inputs.size()) + 1;
        spec_y.density = hp.density_y;
        spec_y.with_readout = true;
        spec_y.protected_input_cols = {static_cast<int>(y_inputs.size())}; // treatment column
        dgp.mlp_y = build_random_mlp(spec_y, rng_net);

        std::vector<int> picks = rng_net.sample_without_replacement(hp.layers_x * hp.width_x, k);
        dgp.covariate_nodes.clear();
        for (int flat : picks) dgp.covariate_nodes.push_back(node_from_flat(flat, hp.width_x));

        dgp.eta_t_node = node_from_flat(
            static_cast<int>(rng_net.uniform_int(0, hp.layers_t * hp.width_t - 1)), hp.width_t);
        dgp.eta_y_node = node_from_flat(
            static_cast<int>(rng_net.uniform_int(0, hp.layers_y * hp.width_y - 1)), hp.width_y);
    }

    dgp.corruption_plan = sample_corruption_plan(k, config.corruption, rng_net);

    // Covariate table.
    const Eigen::MatrixXd table =
        run_noise_driven_net(dgp.mlp_x, single_net ? dgp.treat_node.layer : hp.layers_x, n,
                             hp.noise_scale, dgp.covariate_nodes, dgp.corruption_plan, rng_xgen,
                             rng_corrupt);
    Eigen::MatrixXd x_cols =
        extract_covariates(table, hp.width_x, dgp.covariate_nodes, dgp.corruption_plan, rng_corrupt);
    require_finite(x_cols);
    dgp.covariates = x_cols.transpose();

    // Treatment.
    Eigen::VectorXd t_tilde, eta_t;
    if (single_net) {
        dgp.resume_values =
            table.middleRows(static_cast<Eigen::Index>(dgp.treat_node.layer - 1) * hp.width_x,
                             hp.width_x);
        t_tilde = dgp.resume_values.row(dgp.treat_node.index).transpose();
        eta_t = table.row(node_flat_index(dgp.eta_t_node, hp.width_x)).transpose();
    } else {
        const auto t_inputs = dgp.split.treatment_inputs();
        Eigen::MatrixXd t_in(static_cast<Eigen::Index>(t_inputs.size()), n);
        for (std::size_t i = 0; i < t_inputs.size(); ++i) {
            t_in.row(static_cast<Eigen::Index>(i)) = x_cols.row(t_inputs[i]);
        }
        const InputNetPass pass = run_input_net(dgp.mlp_t, t_in, dgp.eta_t_node, hp.noise_scale, rng_tgen);
        t_tilde = pass.readout;
        eta_t = pass.node_value;
    }
    const TreatmentDraw draw =
        make_treatment(t_tilde, eta_t, config.positivity, config.positivity_floor, rng_tgen);
    dgp.sigma_t_tilde = draw.sigma_t_tilde;
    dgp.eta_t_std = draw.eta_std;
    dgp.eta_t_values = eta_t;
    dgp.t_raw_min = draw.raw_min;
    dgp.t_raw_max = draw.raw_max;

    // Outcome: draw and retain the replayable exogenous noise, then run the
    // factual pass through the same path counterfactual queries use.
    const int y_layers = single_net ? hp.layers_x - dgp.treat_node.layer : hp.layers_y;
    const int y_width = single_net ? hp.width_x : hp.width_y;
    dgp.outcome_noise.resize(static_cast<std::size_t>(y_layers));
    for (int l = 0; l < y_layers; ++l) {
        const LayerNoiseSpec spec = sample_layer_noise_spec(rng_ygen);
        Eigen::MatrixXd& e = dgp.outcome_noise[static_cast<std::size_t>(l)];
        e.resize(y_width, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (int r = 0; r < y_width; ++r) e(r, j) = draw_layer_noise(spec, hp.noise_scale, rng_ygen);
        }
    }
    if (!single_net) {
        const auto y_inputs = dgp.split.outcome_inputs();
        dgp.outcome_input_cols.resize(static_cast<Eigen::Index>(y_inputs.size()), n);
        for (std::size_t i = 0; i < y_inputs.size(); ++i) {
            dgp.outcome_input_cols.row(static_cast<Eigen::Index>(i)) = x_cols.row(y_inputs[i]);
        }
    }

    dgp.cepo_factual.resize(n);
    Eigen::VectorXd eta_y(n);
    for (int j = 0; j < n; ++j) {
        double eta = 0.0;
        dgp.cepo_factual[j] = outcome_forward(dgp, j, draw.t[j], &eta);
        eta_y[j] = eta;
    }
    require_finite(dgp.cepo_factual);
    require_finite(eta_y);
    dgp.eta_y_values = eta_y;

    dgp.sigma_mu = population_std(dgp.cepo_factual);
    if (!(dgp.sigma_mu > 0.0)) throw DegenerateDgp{DegenerateDgp::Reason::degenerate_outcome};
    dgp.eta_y_std = population_std(eta_y);
    if (!(dgp.eta_y_std > 0.0)) throw DegenerateDgp{DegenerateDgp::Reason::degenerate_eta};

    Dataset ds;
    ds.covariates = dgp.covariates;
    ds.t = draw.t;
    ds.y.resize(n);
    for (int j = 0; j < n; ++j) {
        const double scale = std::abs(eta_y[j] / dgp.eta_y_std) + config.positivity_floor;
        ds.y[j] = dgp.cepo_factual[j] +
                  config.outcome_noise_multiplier * dgp.sigma_mu * scale * rng_ygen.normal();
    }
    require_finite(ds.y);

    const int cf = std::max(config.counterfactuals_per_row, 1);
    ds.t_cf.resize(n, cf);
    ds.cepo_cf.resize(n, cf);
    for (int j = 0; j < n; ++j) {
        for (int c = 0; c < cf; ++c) {
            const double tq = rng_cf.uniform01();
            ds.t_cf(j, c) = tq;
            ds.cepo_cf(j, c) = dgp.query_cepo(j, tq);
        }
    }
    require_finite(ds.cepo_cf);

    return {std::move(dgp), std::move(ds)};
}

} // namespace

std::pair<Dgp, Dataset> sample_dgp_dataset(const PriorConfig& config, std::uint64_t seed) {
    if (config.kind != PriorKind::three_mlp && config.kind != PriorKind::one_mlp) {
        throw std::invalid_argument("sample_dgp_dataset handles mlp priors only");
    }
    for (int attempt = 0; attempt < config.max_retries; ++attempt) {
        try {
            auto out = build_mlp_dgp(config, seed, attempt);
            out.first.retries_used = attempt;
            out.second.validate();
            return out;
        } catch (const DegenerateDgp&) {
            continue;
        }
    }
    throw PriorExhausted("prior sampling exhausted " + std::to_string(config.max_retries) +
                         " retries (seed " + std::to_string(seed) + ")");
}

} // namespace ccgen
