#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ifpca {

struct NullTables;  // pipelines.hpp

// Two-class sparse mean-shift model: X = Y mu^T + Z with iid N(0,1) noise,
// Y iid uniform on {-1,+1}, and mu carrying +-tau on a sparse support.
// Exponent parameterization: n = round(p^theta), epsilon = p^-beta,
// tau = p^-alpha; each can be overridden directly, and the support can be
// pinned to an explicit index set (signs still random).
struct RareWeakConfig {
    int p = 0;
    double theta = 0.0;
    double beta = 0.0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    std::optional<int> n_override;
    std::optional<double> epsilon_override;
    std::optional<double> tau_override;
    std::optional<std::vector<int>> fixed_support;  // ascending 0-based indices

    int n() const;
    double epsilon() const;
    double tau() const;
};

struct RareWeakInstance {
    Eigen::MatrixXd x;        // n x p, equals y mu^T + z by construction
    std::vector<int> y;       // +-1 per subject
    Eigen::VectorXd mu;       // length p, entries in {0, +-tau}
    std::vector<int> support; // ascending indices of nonzero mu
};

RareWeakInstance generate_instance(const RareWeakConfig& config);

// Critical signal strength tau*_p with n = p^theta and s_p = p^(1-beta):
//   [p/(n s_p^2)]^(1/4)  for beta < 1/2
//   n^(-1/4)             for 1/2 < beta < 1 - theta/2
//   s_p^(-1/2)           for beta > 1 - theta/2
// The piecewise boundaries are rejected (tolerance 1e-9).
double critical_tau(double p, double theta, double beta);

// Exponent of tau*_p: (1+theta-2beta)/4, theta/4, or (1-beta)/2 on the same
// pieces, with the same boundary rejection.
double alpha_star(double beta, double theta);

// Fraction of disagreeing entries minimized over a global sign flip.
double hamming_error(const std::vector<int>& y_hat, const std::vector<int>& y);

// Sup-norm discrepancy min(||sqrt(N) xi - Y||_inf, ||sqrt(N) xi + Y||_inf) of
// the first left singular vector xi of X = Y mu^T + Z, one value per rep;
// mu places +-sqrt(mu_norm_sq/m) with iid signs on every coordinate.
std::vector<double> lemma1_discrepancies(int n_rows, int m_cols, double mu_norm_sq, int reps,
                                         std::uint64_t seed);
// Max over reps of the above.
double lemma1_check(int n_rows, int m_cols, double mu_norm_sq, int reps, std::uint64_t seed);

enum class PhaseMethod { simplified_pca, simplified_ifpca, pca, ifpca };
std::string phase_method_name(PhaseMethod method);
PhaseMethod parse_phase_method(const std::string& name);

struct PhaseCell {
    double beta = 0.0;
    double alpha = 0.0;
    std::string method;
    int reps = 0;
    double hamming_mean = 0.0;
    double hamming_sd = 0.0;
    // fraction of reps whose selected set equals the true support; NaN for
    // methods without a selection step
    double select_exact_rate = 0.0;
    int no_selection_count = 0;  // reps where the fixed threshold kept nothing
};

struct PhaseGridOptions {
    int jobs = 1;
    std::int64_t null_b = 100000;       // tables for the full ifpca method
    std::uint64_t null_seed = 7;
};

// Monte Carlo summary of one configuration/method pair: rep r regenerates the
// instance with seed derive_seed(base.seed, cell_index, r), so methods run on
// identical instances when given identical base/cell values. Reps run in
// parallel under options.jobs. A "no features selected" outcome counts the
// rep's Hamming error as 0.5 and increments no_selection_count.
PhaseCell simulate_method(const RareWeakConfig& base, PhaseMethod method, int reps,
                          const PhaseGridOptions& options = {}, std::uint64_t cell_index = 0,
                          const NullTables* tables = nullptr);

// Monte Carlo phase diagram: for every (beta, alpha) cell and method, `reps`
// independent instances (shared across methods within a cell/rep) are
// generated with derived seeds, clustered, and summarized. Betas falling on a
// piecewise boundary of tau*_p are nudged up by 1e-6. Cells are returned
// sorted by (beta, alpha, method).
std::vector<PhaseCell> run_phase_grid(int p, double theta, const std::vector<double>& beta_grid,
                                      const std::vector<double>& alpha_grid,
                                      const std::vector<PhaseMethod>& methods, int reps,
                                      std::uint64_t base_seed,
                                      const PhaseGridOptions& options = {});

// CSV rendering: header beta,alpha,method,reps,hamming_mean,hamming_sd,
// select_exact_rate (blank when not applicable), one row per cell.
std::string phase_grid_csv(const std::vector<PhaseCell>& cells);

}  // namespace ifpca
