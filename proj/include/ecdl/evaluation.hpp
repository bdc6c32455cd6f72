#pragma once

// Recovery metrics: detections with a neutral band around the support, FWER,
// precision-recall, and run-to-run stability of solution maps.

#include <span>
#include <vector>

#include "ecdl/lasso.hpp"

namespace ecdl {

struct DetectionReport {
    std::vector<Index> detected;  // |z| > threshold, ascending
    double threshold = 3.0;
    Index true_positives = 0;   // detections in the support
    Index false_positives = 0;  // detections outside support and neutral band
    Index neutral_hits = 0;
};

// `in_support` and `neutral` are p-long boolean masks; an empty `neutral`
// means no band.
DetectionReport detect(const Vector& z_scores, std::span<const char> in_support, std::span<const char> neutral,
                       double threshold = 3.0);

// |z| threshold equivalent to rejecting p < alpha / tests (Bonferroni).
double bonferroni_z_threshold(double alpha, Index tests);

struct FwerEstimate {
    double estimate = 0.0;
    double ci_lower = 0.0;  // 95% Clopper-Pearson
    double ci_upper = 0.0;
    Index runs = 0;
    Index runs_with_false_positive = 0;
};

FwerEstimate fwer_estimate(std::span<const DetectionReport> reports);

struct PrPoint {
    double threshold;  // features with score >= threshold are called positive
    double precision;
    double recall;
};

struct PrCurve {
    // One point per distinct score, decreasing threshold, plus the (1, 0) anchor first.
    std::vector<PrPoint> points;

    // Largest recall among points whose precision is >= min_precision.
    double recall_at_precision(double min_precision) const;
};

// Excluded features are dropped from both numerators and denominators.
// NoPositives when no included feature is labeled positive.
PrCurve precision_recall(const Vector& scores, std::span<const char> labels, std::span<const char> exclude);

// |A n B| / |A u B|; 1 when both are empty. Inputs need not be sorted.
double jaccard(std::span<const Index> a, std::span<const Index> b);

// Pearson correlation; ConstantMap when either map is constant.
double map_correlation(const Vector& a, const Vector& b);

struct Summary {
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
};

// Linear-interpolation quantiles of a non-empty sample.
Summary summarize(std::vector<double> values);

struct StabilityReport {
    std::vector<double> correlations;  // pairs (i, j), i < j, row-major order
    std::vector<double> jaccards;
    Summary correlation;
    Summary jaccard;
};

// All pairwise map correlations and Jaccard indices of the |z| > threshold sets.
StabilityReport stability_suite(std::span<const Vector> maps, double threshold = 3.0);

}  // namespace ecdl
