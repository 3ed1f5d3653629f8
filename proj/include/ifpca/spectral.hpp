#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace ifpca {

struct SpectralEmbedding {
    Eigen::MatrixXd vectors;          // n x k left singular vectors, orthonormal
    Eigen::VectorXd singular_values;  // descending, nonnegative
};

// Top-k left singular vectors via eigendecomposition of the smaller Gram matrix
// (A A^T when rows <= cols, else A^T A).  Deterministic; each vector's largest-
// magnitude entry is made positive (ties -> smallest index).  Throws when k exceeds
// the usable rank or a residual check fails.
SpectralEmbedding truncated_svd(const Eigen::MatrixXd& a, int k);

struct KmeansResult {
    std::vector<int> labels;  // 1..k
    int k = 0;
    double objective = 0.0;   // within-cluster sum of squared distances
    // per-restart objective trace, one value per Lloyd iteration (nonincreasing)
    std::vector<std::vector<double>> traces;
};

// k-means++ seeding plus Lloyd iterations; `restarts` independent runs with seeds
// derived from `seed` and the restart index, best objective wins (ties -> earliest
// restart).  Empty clusters are reseeded at the point farthest from its assigned
// center.  Deterministic given (points, k, seed, restarts, max_iter).
KmeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    int restarts = 30, int max_iter = 100);

// Label 1 where v_i >= 0, else 2.
std::vector<int> sign_cluster(const Eigen::VectorXd& v);

}  // namespace ifpca
