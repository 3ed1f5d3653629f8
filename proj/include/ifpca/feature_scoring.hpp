#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ifpca {

enum class StatKind { studentized_value, ks_score };

// Monte Carlo reference distribution used by the KS score and p-value steps.
//   studentized_value: pooled studentized values of ceil(B/n) null samples of size n
//   ks_score:          B null KS scores, each computed against the companion
//                      studentized_value table (seed derived from this table's seed)
struct NullCdfTable {
    int n = 0;
    std::uint64_t seed = 0;
    StatKind kind = StatKind::studentized_value;
    std::vector<double> draws;  // sorted ascending

    // fraction of draws <= t
    double cdf(double t) const;
    std::int64_t size() const { return static_cast<std::int64_t>(draws.size()); }
    std::string key() const;  // cache file stem, e.g. "n166_B100098_seed7_studentized_value"
};

NullCdfTable build_null_cdf(int n, std::int64_t b, std::uint64_t seed, StatKind kind);

// Persistent cache: header line "n,B,seed,kind", then one draw per line.
void save_null_cdf(const NullCdfTable& table, const std::string& path);
NullCdfTable load_null_cdf(const std::string& path);
// Cache directory: $IFPCA_NULL_TABLE_DIR if set, else ./null-tables
std::string null_table_dir();
NullCdfTable load_or_build_null_cdf(int n, std::int64_t b, std::uint64_t seed, StatKind kind,
                                    const std::string& dir = std::string());

// sqrt(n) * sup_t |F_n(t) - F(t)| where F_n is the empirical CDF of the studentized
// entries of z and F is the supplied null CDF; the sup is evaluated exactly at both
// one-sided limits of each of the n jump points of F_n.
double ks_score(const Eigen::VectorXd& z, const std::function<double(double)>& null_cdf);

// KS scores of every column of w against a studentized_value table.
Eigen::VectorXd ks_scores_all(const Eigen::MatrixXd& w, const NullCdfTable& table,
                              int jobs = 1);

struct EfronResult {
    double mu_star = 0.0;
    double sigma_star = 0.0;
    Eigen::VectorXd standardized;
};

// Standardizes raw scores by their own empirical mean and sample sd.
EfronResult efron_standardize(const Eigen::VectorXd& raw_scores);

enum class PvalueMode { literal, null_score };

// literal:    pi_j = 1 - F(psi*_j) with F the studentized_value table CDF
// null_score: pi_j = 1 - G(psi*_j) with G the CDF of the table's KS draws after
//             standardizing them by their own mean/sd (table kind must match mode)
Eigen::VectorXd ks_pvalues(const Eigen::VectorXd& standardized, const NullCdfTable& table,
                           PvalueMode mode);

struct KsScoreSet {
    Eigen::VectorXd raw;           // per scored column of w
    Eigen::VectorXd standardized;  // Efron-corrected
    Eigen::VectorXd pvalues;
    double mu_star = 0.0;
    double sigma_star = 0.0;
    std::string null_table_ref;
};

// Full IF-step scoring driver: raw KS scores, Efron correction, p-values.
// `ks_table` is required (and used) only in null_score mode.
KsScoreSet score_features(const Eigen::MatrixXd& w, const NullCdfTable& sv_table,
                          const NullCdfTable* ks_table, PvalueMode mode, int jobs = 1);

// psi_j = (||x_j||^2 - n) / sqrt(2n) on the raw (unnormalized) matrix.
Eigen::VectorXd chi_square_scores(const Eigen::MatrixXd& x);

}  // namespace ifpca
