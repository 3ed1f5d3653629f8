#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ifpca {

// Comparison of a predicted labeling against ground truth, minimized over
// relabelings of the predicted side.
struct MetricsReport {
    int error_count = 0;
    double accuracy = 1.0;
    double ari = 1.0;
    int n = 0;
    // permutation_used[c-1] = true label matched to predicted label c
    std::vector<int> permutation_used;
};

// Minimum mismatch count over all bijections of predicted onto true labels.
// Exhaustive for k <= 10, exact bipartite matching beyond that.
MetricsReport clustering_error(const std::vector<int>& y_hat, const std::vector<int>& y, int k);

// Pair-counting adjusted Rand index; 1 when the partitions coincide.
double adjusted_rand_index(const std::vector<int>& y_hat, const std::vector<int>& y);

struct LeaderboardReport {
    Eigen::MatrixXd per_dataset_ranks;    // methods x datasets, fractional ties
    Eigen::MatrixXd per_dataset_regrets;  // methods x datasets, NaN where excluded
    std::vector<int> excluded_datasets;   // datasets where all methods tie exactly
    std::vector<double> rank_mean;
    std::vector<double> rank_sd;
    std::vector<double> regret_mean;
    std::vector<double> regret_sd;
};

// Cross-dataset summary: per-dataset regret (e - e_min)/(e_max - e_min) and
// fractional tie-shared ranks, with means and sample standard deviations per
// method. Datasets with e_max = e_min keep their (all-tied) ranks but are
// excluded from the regret summaries.
LeaderboardReport regret_and_rank(const Eigen::MatrixXd& errors);

}  // namespace ifpca
