#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ifpca/data_model.hpp"
#include "ifpca/feature_scoring.hpp"
#include "ifpca/selection.hpp"
#include "ifpca/vae.hpp"

namespace ifpca {

// Raised by the simplified IF pipeline when the fixed chi-square threshold
// retains nothing; callers treat this as a distinct outcome, not a clustering.
struct NoFeaturesSelected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MethodFamily { pca, ifpca, vae, ifvae, simplified_pca, simplified_ifpca };
enum class ClusteringInput { normalized, raw };

struct MethodSpec {
    MethodFamily family = MethodFamily::pca;
    ClusteringInput clustering_input = ClusteringInput::normalized;
    int k = 2;
    std::uint64_t seed = 0;
    // 0 -> family default: 5 for k-means pipelines, 20 for ifpca on raw X,
    // 10 for the VAE family, 1 for the simplified methods
    int repeats = 0;
    std::optional<VaeHyper> vae_hyper;  // seed field ignored; derived per repeat
    // ifpca on raw X reduces to k-1 vectors by default; this switches it to k
    bool x_use_k_vectors = false;
    PvalueMode pvalue_mode = PvalueMode::literal;
    HcVariant hc_variant = HcVariant::as_printed;
    std::int64_t null_b = 100000;
    std::uint64_t null_seed = 7;
    int jobs = 1;
};

// Parses a CLI method name: pca, pca-x, ifpca, ifpca-x, vae, vae-x, ifvae,
// ifvae-x, spca, sifpca ("-x" variants cluster on the raw matrix).
MethodSpec make_method_spec(const std::string& name);
std::string method_name(const MethodSpec& spec);
int default_repeats(const MethodSpec& spec);

// Pre-built Monte Carlo null tables; when supplied they bypass the disk cache.
struct NullTables {
    const NullCdfTable* studentized = nullptr;
    const NullCdfTable* ks = nullptr;  // needed only in null_score p-value mode
};

struct PipelineReport {
    std::vector<int> labels;  // representative assignment, values 1..k
    int representative_repeat = 0;  // repeat with the smallest k-means objective
    std::vector<std::vector<int>> repeat_labels;
    std::vector<double> repeat_objectives;
    std::vector<double> per_repeat_errors;  // error counts vs truth, if provided
    bool has_if_step = false;
    std::vector<int> retained;  // original feature indices (IF pipelines only)
    double threshold = 0.0;     // p-value cutoff (HCT) or chi-square cutoff
    bool fallback_used = false;
    std::map<std::string, double> diagnostics;
    std::map<std::string, std::string> tags;  // matrix identity per step
};

// Runs one method end to end. `truth` (1..k labels) enables per-repeat error
// counts. Deterministic given the spec.
PipelineReport run_method(const DataMatrix& x, const MethodSpec& spec,
                          const std::vector<int>* truth = nullptr,
                          const NullTables* tables = nullptr);

// Named entry points wired per the method grid (thin run_method wrappers).
PipelineReport pca_cluster(const DataMatrix& x, int k, ClusteringInput input,
                           std::uint64_t seed, int repeats = 0);
PipelineReport if_pca(const DataMatrix& x, int k, ClusteringInput input, const MethodSpec& config);
PipelineReport simplified_pca(const DataMatrix& x, std::uint64_t seed = 0);
PipelineReport simplified_if_pca(const DataMatrix& x, std::uint64_t seed = 0);
PipelineReport vae_cluster(const DataMatrix& x, int k, ClusteringInput input,
                           const VaeHyper& hyper, std::uint64_t seed, int repeats = 0);
PipelineReport if_vae(const DataMatrix& x, int k, ClusteringInput input, const VaeHyper& hyper,
                      const MethodSpec& config);

enum class SweepClusterer { pca, vae };

struct SweepPoint {
    int m = 0;
    double mean_error_rate = 0.0;
    std::vector<double> repeat_error_rates;
};

struct SweepOptions {
    bool x_use_k_vectors = false;  // match the ifpca raw-X vector-count choice
    std::optional<VaeHyper> vae_hyper;
    std::int64_t null_b = 100000;
    std::uint64_t null_seed = 7;
    int jobs = 1;
};

// Ranks features by Efron-standardized KS score (computed on the normalized
// matrix), then for each m clusters the raw-X submatrix of the top m features
// and records the mean error rate over `repeats` (repeat seeds shared with
// run_method, so a singleton grid at the HCT count reproduces the ifpca-x
// report and m = p reproduces the corresponding no-selection run bit for bit).
std::vector<SweepPoint> feature_sweep(const DataMatrix& x, const std::vector<int>& truth, int k,
                                      const std::vector<int>& m_grid, SweepClusterer clusterer,
                                      std::uint64_t seed, int repeats = 5,
                                      const SweepOptions& options = {},
                                      const NullTables* tables = nullptr);

}  // namespace ifpca
