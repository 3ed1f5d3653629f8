#include "ifpca/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ifpca/rng.hpp"

namespace ifpca {

namespace {

// largest-|entry| positive; ties toward the smallest index
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index arg = 0;
    double best = std::fabs(v[0]);
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        const double a = std::fabs(v[i]);
        if (a > best) {
            best = a;
            arg = i;
        }
    }
    if (v[arg] < 0.0) v = -v;
}

}  // namespace

SpectralEmbedding truncated_svd(const Eigen::MatrixXd& a, int k) {
    const Eigen::Index n = a.rows(), m = a.cols();
    if (n < 1 || m < 1) throw std::invalid_argument("truncated_svd: empty matrix");
    if (k < 1 || k > std::min(n, m))
        throw std::invalid_argument("truncated_svd: k must be in [1, min(rows, cols)]");

    SpectralEmbedding e;
    e.vectors.resize(n, k);
    e.singular_values.resize(k);

    if (n <= m) {
        const Eigen::MatrixXd g = a * a.transpose();  // n x n
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("truncated_svd: eigendecomposition failed to converge");
        const double top = std::sqrt(std::max(0.0, es.eigenvalues()[n - 1]));
        // Gram-route eigenvalues carry absolute noise ~eps * sigma_1^2, so
        // singular values below sqrt(dim * eps) * sigma_1 are numerically zero.
        const double floor = std::sqrt(static_cast<double>(std::max(n, m)) *
                                       std::numeric_limits<double>::epsilon()) * top;
        for (int i = 0; i < k; ++i) {
            const Eigen::Index src = n - 1 - i;  // eigenvalues ascend
            const double sigma = std::sqrt(std::max(0.0, es.eigenvalues()[src]));
            if (sigma <= floor || sigma == 0.0) {
                std::ostringstream msg;
                msg << "truncated_svd: requested k=" << k << " exceeds numerical rank ("
                    << i << " usable singular values)";
                throw std::runtime_error(msg.str());
            }
            e.singular_values[i] = sigma;
            e.vectors.col(i) = es.eigenvectors().col(src);
        }
    } else {
        const Eigen::MatrixXd g = a.transpose() * a;  // m x m
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("truncated_svd: eigendecomposition failed to converge");
        const double top = std::sqrt(std::max(0.0, es.eigenvalues()[m - 1]));
        const double floor = std::sqrt(static_cast<double>(std::max(n, m)) *
                                       std::numeric_limits<double>::epsilon()) * top;
        for (int i = 0; i < k; ++i) {
            const Eigen::Index src = m - 1 - i;
            const double sigma = std::sqrt(std::max(0.0, es.eigenvalues()[src]));
            if (sigma <= floor || sigma == 0.0) {
                std::ostringstream msg;
                msg << "truncated_svd: requested k=" << k << " exceeds numerical rank ("
                    << i << " usable singular values)";
                throw std::runtime_error(msg.str());
            }
            e.singular_values[i] = sigma;
            e.vectors.col(i) = a * es.eigenvectors().col(src) / sigma;
        }
    }

    for (int i = 0; i < k; ++i) fix_sign(e.vectors.col(i));

    // residual check: ||A A^T u - sigma^2 u|| <= 1e-6 sigma_1^2
    const double top2 = e.singular_values[0] * e.singular_values[0];
    if (top2 <= 0.0) throw std::runtime_error("truncated_svd: zero matrix");
    for (int i = 0; i < k; ++i) {
        const Eigen::VectorXd u = e.vectors.col(i);
        const double s2 = e.singular_values[i] * e.singular_values[i];
        const double resid = (a * (a.transpose() * u) - s2 * u).norm();
        if (resid > 1e-6 * top2) {
            std::ostringstream msg;
            msg << "truncated_svd: residual " << resid << " exceeds tolerance "
                << 1e-6 * top2 << " for singular vector " << i;
            throw std::runtime_error(msg.str());
        }
    }
    return e;
}

namespace {

struct LloydRun {
    std::vector<int> labels;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
};

LloydRun lloyd_once(const Eigen::MatrixXd& x, int k, std::uint64_t seed, int max_iter) {
    const Eigen::Index n = x.rows();
    Rng rng(seed);

    // k-means++ seeding
    Eigen::MatrixXd centers(k, x.cols());
    centers.row(0) = x.row(rng.uniform_int(0, static_cast<int>(n) - 1));
    Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index pick = 0;
        if (total <= 0.0) {
            pick = rng.uniform_int(0, static_cast<int>(n) - 1);
        } else {
            double r = rng.uniform() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                r -= d2[i];
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
                pick = i;  // fp slack: fall through to the last point
            }
        }
        centers.row(c) = x.row(pick);
        d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> assign(static_cast<size_t>(n), -1);
    std::vector<int> prev(assign);
    LloydRun run;

    for (int it = 0; it < max_iter; ++it) {
        // assignment step (ties -> smallest cluster index)
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bd = (x.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double d = (x.row(i) - centers.row(c)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            assign[static_cast<size_t>(i)] = best;
        }

        // reseed empty clusters at the point farthest from its assigned center
        for (int c = 0; c < k; ++c) {
            bool empty = true;
            for (Eigen::Index i = 0; i < n; ++i)
                if (assign[static_cast<size_t>(i)] == c) {
                    empty = false;
                    break;
                }
            if (!empty) continue;
            Eigen::Index far = 0;
            double fd = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double d =
                    (x.row(i) - centers.row(assign[static_cast<size_t>(i)])).squaredNorm();
                if (d > fd) {
                    fd = d;
                    far = i;
                }
            }
            assign[static_cast<size_t>(far)] = c;
            centers.row(c) = x.row(far);
        }

        // update step
        for (int c = 0; c < k; ++c) {
            Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(x.cols());
            int cnt = 0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (assign[static_cast<size_t>(i)] == c) {
                    sum += x.row(i);
                    ++cnt;
                }
            if (cnt > 0) centers.row(c) = sum / cnt;
        }

        double obj = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            obj += (x.row(i) - centers.row(assign[static_cast<size_t>(i)])).squaredNorm();
        run.trace.push_back(obj);

        if (assign == prev) break;
        prev = assign;
    }

    run.objective = run.trace.back();
    run.labels.resize(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        run.labels[static_cast<size_t>(i)] = assign[static_cast<size_t>(i)] + 1;
    return run;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts,
                    int max_iter) {
    const Eigen::Index n = points.rows();
    if (n < 1) throw std::invalid_argument("kmeans: no points");
    if (k < 1 || k > n) throw std::invalid_argument("kmeans: k must be in [1, point count]");
    if (restarts < 1 || max_iter < 1)
        throw std::invalid_argument("kmeans: restarts and max_iter must be positive");

    KmeansResult res;
    res.k = k;

    if (k == 1) {
        const Eigen::RowVectorXd mean = points.colwise().mean();
        res.labels.assign(static_cast<size_t>(n), 1);
        res.objective = (points.rowwise() - mean).rowwise().squaredNorm().sum();
        res.traces = {{res.objective}};
        return res;
    }

    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        LloydRun run = lloyd_once(points, k, derive_seed(seed, static_cast<std::uint64_t>(r)),
                                  max_iter);
        res.traces.push_back(run.trace);
        if (run.objective < best) {
            best = run.objective;
            res.labels = std::move(run.labels);
        }
    }
    res.objective = best;
    return res;
}

std::vector<int> sign_cluster(const Eigen::VectorXd& v) {
    std::vector<int> out(static_cast<size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out[static_cast<size_t>(i)] = v[i] >= 0.0 ? 1 : 2;
    return out;
}

}  // namespace ifpca
