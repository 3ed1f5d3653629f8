#include "ifpca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ifpca {

namespace {

// exact min-cost assignment on a square matrix via shortest augmenting paths
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

MetricsReport clustering_error(const std::vector<int>& y_hat, const std::vector<int>& y, int k) {
    if (y_hat.size() != y.size())
        throw std::invalid_argument("clustering_error: label vectors differ in length");
    if (y.empty()) throw std::invalid_argument("clustering_error: empty labelings");
    if (k < 1) throw std::invalid_argument("clustering_error: k must be positive");
    const int n = static_cast<int>(y.size());
    std::vector<std::vector<double>> conf(static_cast<size_t>(k),
                                          std::vector<double>(static_cast<size_t>(k), 0.0));
    for (int i = 0; i < n; ++i) {
        const int a = y_hat[static_cast<size_t>(i)], b = y[static_cast<size_t>(i)];
        if (a < 1 || a > k || b < 1 || b > k) {
            std::ostringstream msg;
            msg << "clustering_error: label out of range at position " << i + 1 << " (got "
                << a << " vs " << b << ", k=" << k << ")";
            throw std::invalid_argument(msg.str());
        }
        conf[static_cast<size_t>(a - 1)][static_cast<size_t>(b - 1)] += 1.0;
    }

    std::vector<int> best_perm(static_cast<size_t>(k));
    if (k <= 10) {
        std::vector<int> perm(static_cast<size_t>(k));
        std::iota(perm.begin(), perm.end(), 0);
        double best = -1.0;
        do {
            double agree = 0.0;
            for (int c = 0; c < k; ++c)
                agree += conf[static_cast<size_t>(c)][static_cast<size_t>(perm[static_cast<size_t>(c)])];
            if (agree > best) {
                best = agree;
                best_perm = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        std::vector<std::vector<double>> cost(static_cast<size_t>(k),
                                              std::vector<double>(static_cast<size_t>(k)));
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                cost[static_cast<size_t>(a)][static_cast<size_t>(b)] =
                    -conf[static_cast<size_t>(a)][static_cast<size_t>(b)];
        best_perm = min_cost_assignment(cost);
    }

    double agree = 0.0;
    for (int c = 0; c < k; ++c)
        agree += conf[static_cast<size_t>(c)][static_cast<size_t>(best_perm[static_cast<size_t>(c)])];

    MetricsReport rep;
    rep.n = n;
    rep.error_count = n - static_cast<int>(agree);
    rep.accuracy = static_cast<double>(n - rep.error_count) / static_cast<double>(n);
    rep.ari = adjusted_rand_index(y_hat, y);
    rep.permutation_used.resize(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c)
        rep.permutation_used[static_cast<size_t>(c)] = best_perm[static_cast<size_t>(c)] + 1;
    return rep;
}

double adjusted_rand_index(const std::vector<int>& y_hat, const std::vector<int>& y) {
    if (y_hat.size() != y.size())
        throw std::invalid_argument("adjusted_rand_index: label vectors differ in length");
    if (y.empty()) throw std::invalid_argument("adjusted_rand_index: empty labelings");
    std::map<int, int> ra, rb;
    for (int a : y_hat)
        if (!ra.count(a)) {
            const int id = static_cast<int>(ra.size());
            ra[a] = id;
        }
    for (int b : y)
        if (!rb.count(b)) {
            const int id = static_cast<int>(rb.size());
            rb[b] = id;
        }
    const size_t ka = ra.size(), kb = rb.size();
    std::vector<std::vector<double>> table(ka, std::vector<double>(kb, 0.0));
    std::vector<double> rows(ka, 0.0), cols(kb, 0.0);
    for (size_t i = 0; i < y.size(); ++i) {
        const size_t a = static_cast<size_t>(ra[y_hat[i]]), b = static_cast<size_t>(rb[y[i]]);
        table[a][b] += 1.0;
        rows[a] += 1.0;
        cols[b] += 1.0;
    }
    double idx = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (size_t a = 0; a < ka; ++a)
        for (size_t b = 0; b < kb; ++b) idx += comb2(table[a][b]);
    for (double r : rows) sum_a += comb2(r);
    for (double c : cols) sum_b += comb2(c);
    const double total = comb2(static_cast<double>(y.size()));
    const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
    const double max_idx = 0.5 * (sum_a + sum_b);
    const double denom = max_idx - expected;
    if (denom == 0.0) return 1.0;  // both partitions degenerate in the same way
    return (idx - expected) / denom;
}

LeaderboardReport regret_and_rank(const Eigen::MatrixXd& errors) {
    const Eigen::Index m = errors.rows(), d = errors.cols();
    if (m < 2) throw std::invalid_argument("regret_and_rank: need at least 2 methods");
    if (d < 1) throw std::invalid_argument("regret_and_rank: need at least 1 dataset");

    LeaderboardReport rep;
    rep.per_dataset_ranks.resize(m, d);
    rep.per_dataset_regrets.resize(m, d);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (Eigen::Index j = 0; j < d; ++j) {
        std::vector<Eigen::Index> order(static_cast<size_t>(m));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return errors(a, j) < errors(b, j); });
        // fractional ranks: tied values share the mean of their positions
        size_t i = 0;
        while (i < order.size()) {
            size_t e = i;
            while (e + 1 < order.size() && errors(order[e + 1], j) == errors(order[i], j)) ++e;
            const double shared = (static_cast<double>(i + 1) + static_cast<double>(e + 1)) / 2.0;
            for (size_t t = i; t <= e; ++t) rep.per_dataset_ranks(order[t], j) = shared;
            i = e + 1;
        }
        const double lo = errors.col(j).minCoeff(), hi = errors.col(j).maxCoeff();
        if (hi == lo) {
            rep.excluded_datasets.push_back(static_cast<int>(j));
            rep.per_dataset_regrets.col(j).setConstant(nan);
        } else {
            for (Eigen::Index a = 0; a < m; ++a)
                rep.per_dataset_regrets(a, j) = (errors(a, j) - lo) / (hi - lo);
        }
    }

    for (Eigen::Index a = 0; a < m; ++a) {
        std::vector<double> ranks, regrets;
        for (Eigen::Index j = 0; j < d; ++j) {
            ranks.push_back(rep.per_dataset_ranks(a, j));
            if (!std::isnan(rep.per_dataset_regrets(a, j)))
                regrets.push_back(rep.per_dataset_regrets(a, j));
        }
        rep.rank_mean.push_back(std::accumulate(ranks.begin(), ranks.end(), 0.0) /
                                static_cast<double>(ranks.size()));
        rep.rank_sd.push_back(sample_sd(ranks));
        if (regrets.empty()) {
            rep.regret_mean.push_back(nan);
            rep.regret_sd.push_back(nan);
        } else {
            rep.regret_mean.push_back(std::accumulate(regrets.begin(), regrets.end(), 0.0) /
                                      static_cast<double>(regrets.size()));
            rep.regret_sd.push_back(sample_sd(regrets));
        }
    }
    return rep;
}

}  // namespace ifpca
