#include "ifpca/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ifpca {

SelectionResult hct(const Eigen::VectorXd& pvalues, int n_subjects, HcVariant variant) {
    const Eigen::Index p = pvalues.size();
    if (p < 1) throw std::invalid_argument("hct: empty p-value vector");
    if (n_subjects < 1) throw std::invalid_argument("hct: n_subjects must be positive");
    for (Eigen::Index j = 0; j < p; ++j)
        if (!(pvalues[j] >= 0.0 && pvalues[j] <= 1.0))
            throw std::invalid_argument("hct: p-values must lie in [0,1]");

    std::vector<double> sorted(pvalues.data(), pvalues.data() + p);
    std::sort(sorted.begin(), sorted.end());

    const double dp = static_cast<double>(p);
    const double sqrt_n = std::sqrt(static_cast<double>(n_subjects));

    SelectionResult res;
    res.hc_curve.resize(static_cast<size_t>(p));
    for (Eigen::Index j1 = 1; j1 <= p; ++j1) {
        const double frac = static_cast<double>(j1) / dp;
        const double d = frac - sorted[static_cast<size_t>(j1 - 1)];
        double denom;
        if (variant == HcVariant::as_printed)
            denom = std::max(sqrt_n * d, 0.0) + frac;
        else
            denom = frac * (1.0 - frac);
        res.hc_curve[static_cast<size_t>(j1 - 1)] =
            denom > 0.0 ? std::sqrt(dp) * d / std::sqrt(denom)
                        : std::numeric_limits<double>::quiet_NaN();
    }

    const double pmin_bound = std::log(dp) / dp;
    int best = -1;
    double best_hc = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j1 = 1; 2 * j1 < p; ++j1) {
        const double pv = sorted[static_cast<size_t>(j1 - 1)];
        if (!(pv > pmin_bound)) continue;
        const double hc = res.hc_curve[static_cast<size_t>(j1 - 1)];
        if (std::isnan(hc)) continue;
        if (hc > best_hc) {
            best_hc = hc;
            best = static_cast<int>(j1 - 1);
        }
    }

    if (best < 0) {
        // no admissible index: keep only the single smallest p-value feature
        int arg = 0;
        for (Eigen::Index j = 1; j < p; ++j)
            if (pvalues[j] < pvalues[arg]) arg = static_cast<int>(j);
        res.fallback_used = true;
        res.j_hat = -1;
        res.threshold = pvalues[arg];
        res.retained = {arg};
        return res;
    }

    res.j_hat = best;
    res.threshold = sorted[static_cast<size_t>(best)];
    for (Eigen::Index j = 0; j < p; ++j)
        if (pvalues[j] <= res.threshold) res.retained.push_back(static_cast<int>(j));
    return res;
}

FeatureSet fixed_threshold_select(const Eigen::VectorXd& chi2_scores,
                                  std::int64_t p_for_threshold) {
    if (p_for_threshold < 2)
        throw std::invalid_argument("fixed_threshold_select: p must be >= 2");
    const double t = std::sqrt(2.0 * std::log(static_cast<double>(p_for_threshold)));
    FeatureSet fs;
    fs.origin = FeatureSet::Origin::fixed_chi2;
    for (Eigen::Index j = 0; j < chi2_scores.size(); ++j)
        if (chi2_scores[j] >= t) fs.indices.push_back(static_cast<int>(j));
    fs.explicit_empty = fs.indices.empty();
    return fs;
}

FeatureSet top_m_select(const Eigen::VectorXd& scores, int m) {
    const Eigen::Index p = scores.size();
    if (m < 1 || m > p)
        throw std::invalid_argument("top_m_select: m must be in [1, feature count]");
    std::vector<int> order(static_cast<size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    FeatureSet fs;
    fs.origin = FeatureSet::Origin::top_m;
    fs.indices.assign(order.begin(), order.begin() + m);
    std::sort(fs.indices.begin(), fs.indices.end());
    return fs;
}

}  // namespace ifpca
