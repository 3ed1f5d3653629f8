#include "ifpca/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ifpca/metrics.hpp"
#include "ifpca/parallel.hpp"
#include "ifpca/rng.hpp"
#include "ifpca/spectral.hpp"

namespace ifpca {

namespace {

std::vector<int> all_columns(Eigen::Index p) {
    std::vector<int> cols(static_cast<size_t>(p));
    std::iota(cols.begin(), cols.end(), 0);
    return cols;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& mat, const std::vector<int>& cols) {
    Eigen::MatrixXd sub(mat.rows(), static_cast<Eigen::Index>(cols.size()));
    for (size_t i = 0; i < cols.size(); ++i)
        sub.col(static_cast<Eigen::Index>(i)) = mat.col(cols[i]);
    return sub;
}

struct ClusterRuns {
    std::vector<std::vector<int>> labels;
    std::vector<double> objectives;
    int representative = 0;
    double sigma_1 = 0.0;
};

void pick_representative(ClusterRuns& runs) {
    runs.representative = 0;
    for (size_t r = 1; r < runs.objectives.size(); ++r)
        if (runs.objectives[r] < runs.objectives[static_cast<size_t>(runs.representative)])
            runs.representative = static_cast<int>(r);
}

// Shared clustering step of every spectral pipeline: top n_vectors left
// singular vectors of the column submatrix, then one k-means per repeat with
// the repeat-derived seed. Centralized so that a feature sweep evaluated at a
// pipeline's retained count reproduces that pipeline exactly.
ClusterRuns cluster_submatrix_svd(const Eigen::MatrixXd& mat, const std::vector<int>& cols,
                                  int k, int n_vectors, std::uint64_t seed, int repeats,
                                  int jobs) {
    const SpectralEmbedding emb = truncated_svd(select_columns(mat, cols), n_vectors);
    ClusterRuns runs;
    runs.sigma_1 = emb.singular_values[0];
    runs.labels.resize(static_cast<size_t>(repeats));
    runs.objectives.resize(static_cast<size_t>(repeats));
    parallel_for(jobs, repeats, [&](int r) {
        const std::uint64_t rep_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
        KmeansResult km = kmeans(emb.vectors, k, derive_seed(rep_seed, 3));
        runs.labels[static_cast<size_t>(r)] = std::move(km.labels);
        runs.objectives[static_cast<size_t>(r)] = km.objective;
    });
    pick_representative(runs);
    return runs;
}

ClusterRuns cluster_submatrix_vae(const Eigen::MatrixXd& mat, const std::vector<int>& cols,
                                  int k, const VaeHyper& hyper_base, std::uint64_t seed,
                                  int repeats, int jobs) {
    const Eigen::MatrixXd sub = select_columns(mat, cols);
    ClusterRuns runs;
    runs.labels.resize(static_cast<size_t>(repeats));
    runs.objectives.resize(static_cast<size_t>(repeats));
    parallel_for(jobs, repeats, [&](int r) {
        const std::uint64_t rep_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
        VaeHyper hyper = hyper_base;
        hyper.seed = rep_seed;
        const TrainedVae trained = train_vae(sub, hyper);
        const LatentEmbedding latent = encode(trained.params, sub);
        KmeansResult km = kmeans(latent.means, k, derive_seed(rep_seed, 3));
        runs.labels[static_cast<size_t>(r)] = std::move(km.labels);
        runs.objectives[static_cast<size_t>(r)] = km.objective;
    });
    pick_representative(runs);
    return runs;
}

struct IfStep {
    NormalizedMatrix w;
    KsScoreSet scores;           // per column of w
    SelectionResult sel;         // indices into w's columns
    std::vector<int> retained_w; // = sel.retained
    std::vector<int> retained_original;
};

IfStep run_if_step(const DataMatrix& x, const MethodSpec& spec, const NullTables* tables) {
    IfStep step;
    step.w = normalize_columns(x);

    NullCdfTable sv_local, ks_local;
    const NullCdfTable* sv = tables ? tables->studentized : nullptr;
    const NullCdfTable* ks = tables ? tables->ks : nullptr;
    if (!sv) {
        sv_local = load_or_build_null_cdf(static_cast<int>(x.n()), spec.null_b, spec.null_seed,
                                          StatKind::studentized_value);
        sv = &sv_local;
    }
    if (!ks && spec.pvalue_mode == PvalueMode::null_score) {
        ks_local = load_or_build_null_cdf(static_cast<int>(x.n()), spec.null_b, spec.null_seed,
                                          StatKind::ks_score);
        ks = &ks_local;
    }
    if (sv->n != static_cast<int>(x.n()))
        throw std::invalid_argument("run_method: null table sample size does not match data");

    step.scores = score_features(step.w.values, *sv, ks, spec.pvalue_mode, spec.jobs);
    step.sel = hct(step.scores.pvalues, static_cast<int>(x.n()), spec.hc_variant);
    step.retained_w = step.sel.retained;
    step.retained_original.reserve(step.retained_w.size());
    for (int c : step.retained_w)
        step.retained_original.push_back(step.w.retained[static_cast<size_t>(c)]);
    return step;
}

void fill_errors(PipelineReport& rep, const std::vector<int>* truth, int k) {
    if (!truth) return;
    double total = 0.0;
    for (const auto& labels : rep.repeat_labels) {
        const MetricsReport m = clustering_error(labels, *truth, k);
        rep.per_repeat_errors.push_back(static_cast<double>(m.error_count));
        total += m.error_count;
    }
    const double n = static_cast<double>(truth->size());
    const double mean = total / static_cast<double>(rep.per_repeat_errors.size());
    rep.diagnostics["mean_error_count"] = mean;
    rep.diagnostics["mean_error_rate"] = mean / n;
    rep.diagnostics["representative_error_count"] =
        rep.per_repeat_errors[static_cast<size_t>(rep.representative_repeat)];
}

void adopt_runs(PipelineReport& rep, ClusterRuns&& runs) {
    rep.repeat_labels = std::move(runs.labels);
    rep.repeat_objectives = std::move(runs.objectives);
    rep.representative_repeat = runs.representative;
    rep.labels = rep.repeat_labels[static_cast<size_t>(runs.representative)];
    if (runs.sigma_1 > 0.0) rep.diagnostics["sigma_1"] = runs.sigma_1;
    rep.diagnostics["kmeans_objective"] =
        rep.repeat_objectives[static_cast<size_t>(runs.representative)];
}

}  // namespace

int default_repeats(const MethodSpec& spec) {
    switch (spec.family) {
        case MethodFamily::vae:
        case MethodFamily::ifvae:
            return 10;
        case MethodFamily::ifpca:
            return spec.clustering_input == ClusteringInput::raw ? 20 : 5;
        case MethodFamily::pca:
            return 5;
        case MethodFamily::simplified_pca:
        case MethodFamily::simplified_ifpca:
            return 1;
    }
    return 1;
}

MethodSpec make_method_spec(const std::string& name) {
    MethodSpec spec;
    if (name == "pca" || name == "pca-x")
        spec.family = MethodFamily::pca;
    else if (name == "ifpca" || name == "ifpca-x")
        spec.family = MethodFamily::ifpca;
    else if (name == "vae" || name == "vae-x")
        spec.family = MethodFamily::vae;
    else if (name == "ifvae" || name == "ifvae-x")
        spec.family = MethodFamily::ifvae;
    else if (name == "spca")
        spec.family = MethodFamily::simplified_pca;
    else if (name == "sifpca")
        spec.family = MethodFamily::simplified_ifpca;
    else
        throw std::invalid_argument("unknown method: " + name);
    const bool raw = name.size() > 2 && name.compare(name.size() - 2, 2, "-x") == 0;
    const bool simplified = spec.family == MethodFamily::simplified_pca ||
                            spec.family == MethodFamily::simplified_ifpca;
    spec.clustering_input = (raw || simplified) ? ClusteringInput::raw : ClusteringInput::normalized;
    return spec;
}

std::string method_name(const MethodSpec& spec) {
    const bool raw = spec.clustering_input == ClusteringInput::raw;
    switch (spec.family) {
        case MethodFamily::pca:
            return raw ? "pca-x" : "pca";
        case MethodFamily::ifpca:
            return raw ? "ifpca-x" : "ifpca";
        case MethodFamily::vae:
            return raw ? "vae-x" : "vae";
        case MethodFamily::ifvae:
            return raw ? "ifvae-x" : "ifvae";
        case MethodFamily::simplified_pca:
            return "spca";
        case MethodFamily::simplified_ifpca:
            return "sifpca";
    }
    return "?";
}

PipelineReport run_method(const DataMatrix& x, const MethodSpec& spec,
                          const std::vector<int>* truth, const NullTables* tables) {
    const bool simplified = spec.family == MethodFamily::simplified_pca ||
                            spec.family == MethodFamily::simplified_ifpca;
    const int k = simplified ? 2 : spec.k;
    if (k < 2) throw std::invalid_argument("run_method: k must be at least 2");
    if (x.n() < 2) throw std::invalid_argument("run_method: need at least 2 subjects");
    if (x.p() < 1) throw std::invalid_argument("run_method: empty data");
    if (truth && static_cast<Eigen::Index>(truth->size()) != x.n())
        throw std::invalid_argument("run_method: truth labels length mismatch");
    const int repeats = spec.repeats > 0 ? spec.repeats : default_repeats(spec);

    PipelineReport rep;
    rep.tags["method"] = method_name(spec);
    rep.tags["if_step_matrix"] = "none";

    switch (spec.family) {
        case MethodFamily::pca: {
            if (spec.clustering_input == ClusteringInput::normalized) {
                const NormalizedMatrix w = normalize_columns(x);
                rep.tags["clustering_matrix"] = "W";
                rep.tags["reduction"] = "svd_top_" + std::to_string(k - 1);
                adopt_runs(rep, cluster_submatrix_svd(w.values, all_columns(w.values.cols()), k,
                                                      k - 1, spec.seed, repeats, spec.jobs));
            } else {
                rep.tags["clustering_matrix"] = "X";
                rep.tags["reduction"] = "svd_top_" + std::to_string(k);
                adopt_runs(rep, cluster_submatrix_svd(x.values, all_columns(x.p()), k, k,
                                                      spec.seed, repeats, spec.jobs));
            }
            break;
        }
        case MethodFamily::ifpca: {
            if (x.p() < 2) throw std::invalid_argument("run_method: ifpca needs p >= 2");
            const IfStep step = run_if_step(x, spec, tables);
            rep.has_if_step = true;
            rep.retained = step.retained_original;
            rep.threshold = step.sel.threshold;
            rep.fallback_used = step.sel.fallback_used;
            rep.tags["if_step_matrix"] = "W";
            rep.diagnostics["selected_count"] = static_cast<double>(rep.retained.size());
            rep.diagnostics["efron_mu"] = step.scores.mu_star;
            rep.diagnostics["efron_sigma"] = step.scores.sigma_star;
            if (spec.clustering_input == ClusteringInput::normalized) {
                rep.tags["clustering_matrix"] = "W^IF";
                rep.tags["reduction"] = "svd_top_" + std::to_string(k - 1);
                adopt_runs(rep, cluster_submatrix_svd(step.w.values, step.retained_w, k, k - 1,
                                                      spec.seed, repeats, spec.jobs));
            } else {
                const int n_vec = spec.x_use_k_vectors ? k : k - 1;
                rep.tags["clustering_matrix"] = "X^IF";
                rep.tags["reduction"] = "svd_top_" + std::to_string(n_vec);
                adopt_runs(rep, cluster_submatrix_svd(x.values, step.retained_original, k, n_vec,
                                                      spec.seed, repeats, spec.jobs));
            }
            break;
        }
        case MethodFamily::vae:
        case MethodFamily::ifvae: {
            const VaeHyper hyper = spec.vae_hyper ? *spec.vae_hyper : VaeHyper{};
            const Eigen::MatrixXd* mat = nullptr;
            std::vector<int> cols;
            NormalizedMatrix w;
            IfStep step;
            if (spec.family == MethodFamily::ifvae) {
                if (x.p() < 2) throw std::invalid_argument("run_method: ifvae needs p >= 2");
                step = run_if_step(x, spec, tables);
                rep.has_if_step = true;
                rep.retained = step.retained_original;
                rep.threshold = step.sel.threshold;
                rep.fallback_used = step.sel.fallback_used;
                rep.tags["if_step_matrix"] = "W";
                rep.diagnostics["selected_count"] = static_cast<double>(rep.retained.size());
                rep.diagnostics["efron_mu"] = step.scores.mu_star;
                rep.diagnostics["efron_sigma"] = step.scores.sigma_star;
                if (spec.clustering_input == ClusteringInput::normalized) {
                    mat = &step.w.values;
                    cols = step.retained_w;
                    rep.tags["clustering_matrix"] = "W^IF";
                } else {
                    mat = &x.values;
                    cols = step.retained_original;
                    rep.tags["clustering_matrix"] = "X^IF";
                }
            } else if (spec.clustering_input == ClusteringInput::normalized) {
                w = normalize_columns(x);
                mat = &w.values;
                cols = all_columns(w.values.cols());
                rep.tags["clustering_matrix"] = "W";
            } else {
                mat = &x.values;
                cols = all_columns(x.p());
                rep.tags["clustering_matrix"] = "X";
            }
            rep.tags["reduction"] = "vae_latent_" + std::to_string(hyper.d);
            adopt_runs(rep, cluster_submatrix_vae(*mat, cols, k, hyper, spec.seed, repeats,
                                                  spec.jobs));
            break;
        }
        case MethodFamily::simplified_pca: {
            const SpectralEmbedding emb = truncated_svd(x.values, 1);
            rep.tags["clustering_matrix"] = "X";
            rep.tags["reduction"] = "first_sv_sign";
            rep.diagnostics["sigma_1"] = emb.singular_values[0];
            rep.repeat_labels = {sign_cluster(emb.vectors.col(0))};
            rep.repeat_objectives = {0.0};
            rep.labels = rep.repeat_labels[0];
            break;
        }
        case MethodFamily::simplified_ifpca: {
            if (x.p() < 2) throw std::invalid_argument("run_method: sifpca needs p >= 2");
            const Eigen::VectorXd psi = chi_square_scores(x.values);
            const FeatureSet fs = fixed_threshold_select(psi, x.p());
            rep.has_if_step = true;
            rep.tags["if_step_matrix"] = "X";
            rep.threshold = std::sqrt(2.0 * std::log(static_cast<double>(x.p())));
            rep.diagnostics["selected_count"] = static_cast<double>(fs.indices.size());
            if (fs.indices.empty())
                throw NoFeaturesSelected(
                    "simplified ifpca: no features selected (all chi-square scores below "
                    "threshold " +
                    std::to_string(rep.threshold) + ")");
            rep.retained = fs.indices;
            const SpectralEmbedding emb = truncated_svd(select_columns(x.values, fs.indices), 1);
            rep.tags["clustering_matrix"] = "X^IF";
            rep.tags["reduction"] = "first_sv_sign";
            rep.diagnostics["sigma_1"] = emb.singular_values[0];
            rep.repeat_labels = {sign_cluster(emb.vectors.col(0))};
            rep.repeat_objectives = {0.0};
            rep.labels = rep.repeat_labels[0];
            break;
        }
    }

    fill_errors(rep, truth, k);
    return rep;
}

PipelineReport pca_cluster(const DataMatrix& x, int k, ClusteringInput input, std::uint64_t seed,
                           int repeats) {
    MethodSpec spec;
    spec.family = MethodFamily::pca;
    spec.clustering_input = input;
    spec.k = k;
    spec.seed = seed;
    spec.repeats = repeats;
    return run_method(x, spec);
}

PipelineReport if_pca(const DataMatrix& x, int k, ClusteringInput input, const MethodSpec& config) {
    MethodSpec spec = config;
    spec.family = MethodFamily::ifpca;
    spec.clustering_input = input;
    spec.k = k;
    return run_method(x, spec);
}

PipelineReport simplified_pca(const DataMatrix& x, std::uint64_t seed) {
    MethodSpec spec;
    spec.family = MethodFamily::simplified_pca;
    spec.clustering_input = ClusteringInput::raw;
    spec.seed = seed;
    return run_method(x, spec);
}

PipelineReport simplified_if_pca(const DataMatrix& x, std::uint64_t seed) {
    MethodSpec spec;
    spec.family = MethodFamily::simplified_ifpca;
    spec.clustering_input = ClusteringInput::raw;
    spec.seed = seed;
    return run_method(x, spec);
}

PipelineReport vae_cluster(const DataMatrix& x, int k, ClusteringInput input,
                           const VaeHyper& hyper, std::uint64_t seed, int repeats) {
    MethodSpec spec;
    spec.family = MethodFamily::vae;
    spec.clustering_input = input;
    spec.k = k;
    spec.seed = seed;
    spec.repeats = repeats;
    spec.vae_hyper = hyper;
    return run_method(x, spec);
}

PipelineReport if_vae(const DataMatrix& x, int k, ClusteringInput input, const VaeHyper& hyper,
                      const MethodSpec& config) {
    MethodSpec spec = config;
    spec.family = MethodFamily::ifvae;
    spec.clustering_input = input;
    spec.k = k;
    spec.vae_hyper = hyper;
    return run_method(x, spec);
}

std::vector<SweepPoint> feature_sweep(const DataMatrix& x, const std::vector<int>& truth, int k,
                                      const std::vector<int>& m_grid, SweepClusterer clusterer,
                                      std::uint64_t seed, int repeats,
                                      const SweepOptions& options, const NullTables* tables) {
    if (k < 2) throw std::invalid_argument("feature_sweep: k must be at least 2");
    if (m_grid.empty()) throw std::invalid_argument("feature_sweep: empty m grid");
    if (static_cast<Eigen::Index>(truth.size()) != x.n())
        throw std::invalid_argument("feature_sweep: truth labels length mismatch");
    if (repeats < 1) throw std::invalid_argument("feature_sweep: repeats must be positive");

    IfStep step;
    step.w = normalize_columns(x);
    {
        NullCdfTable sv_local;
        const NullCdfTable* sv = tables ? tables->studentized : nullptr;
        if (!sv) {
            sv_local = load_or_build_null_cdf(static_cast<int>(x.n()), options.null_b,
                                              options.null_seed, StatKind::studentized_value);
            sv = &sv_local;
        }
        if (sv->n != static_cast<int>(x.n()))
            throw std::invalid_argument("feature_sweep: null table sample size mismatch");
        step.scores = score_features(step.w.values, *sv, nullptr, PvalueMode::literal,
                                     options.jobs);
    }
    const int scored = static_cast<int>(step.scores.standardized.size());
    for (int m : m_grid)
        if (m < 1 || m > scored)
            throw std::invalid_argument("feature_sweep: m must be in [1, scored feature count]");

    const double n = static_cast<double>(x.n());
    std::vector<SweepPoint> out;
    for (int m : m_grid) {
        const FeatureSet fs = top_m_select(step.scores.standardized, m);
        std::vector<int> cols;
        cols.reserve(fs.indices.size());
        for (int c : fs.indices) cols.push_back(step.w.retained[static_cast<size_t>(c)]);

        ClusterRuns runs;
        if (clusterer == SweepClusterer::pca) {
            const int n_vec = options.x_use_k_vectors ? k : k - 1;
            runs = cluster_submatrix_svd(x.values, cols, k, n_vec, seed, repeats, options.jobs);
        } else {
            const VaeHyper hyper = options.vae_hyper ? *options.vae_hyper : VaeHyper{};
            runs = cluster_submatrix_vae(x.values, cols, k, hyper, seed, repeats, options.jobs);
        }

        SweepPoint pt;
        pt.m = m;
        double total = 0.0;
        for (const auto& labels : runs.labels) {
            const double err = static_cast<double>(clustering_error(labels, truth, k).error_count);
            pt.repeat_error_rates.push_back(err / n);
            total += err / n;
        }
        pt.mean_error_rate = total / static_cast<double>(runs.labels.size());
        out.push_back(std::move(pt));
    }
    return out;
}

}  // namespace ifpca
