#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace ifpca {

enum class HcVariant {
    as_printed,  // denominator sqrt(max{sqrt(n)(j/p - pi), 0} + j/p)
    classic      // denominator sqrt((j/p)(1 - j/p))
};

struct SelectionResult {
    std::vector<double> hc_curve;  // HC value at sorted index j (1-based j at [j-1])
    int j_hat = -1;                // 0-based sorted index of the maximizer; -1 on fallback
    double threshold = 0.0;        // p-value cutoff actually applied
    std::vector<int> retained;     // original indices, ascending
    bool fallback_used = false;
};

// Higher-Criticism threshold selection over p-values.  The maximizer is searched over
// sorted indices j with pi_(j) > log(p)/p and j < p/2 (ties -> smallest j); when no
// index qualifies, the single smallest p-value feature is retained (fallback).
SelectionResult hct(const Eigen::VectorXd& pvalues, int n_subjects,
                    HcVariant variant = HcVariant::as_printed);

struct FeatureSet {
    enum class Origin { hct, fixed_chi2, top_m };
    std::vector<int> indices;  // ascending original indices
    Origin origin = Origin::top_m;
    bool explicit_empty = false;  // fixed_chi2 may legitimately select nothing
};

// Retain features with chi-square score >= sqrt(2 log p_for_threshold).
FeatureSet fixed_threshold_select(const Eigen::VectorXd& chi2_scores,
                                  std::int64_t p_for_threshold);

// Retain the m largest scores; ties broken toward the smallest index.
FeatureSet top_m_select(const Eigen::VectorXd& scores, int m);

}  // namespace ifpca
