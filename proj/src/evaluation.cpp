#include "ecdl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "ecdl/error.hpp"
#include "ecdl/normal.hpp"

namespace ecdl {

DetectionReport detect(const Vector& z_scores, std::span<const char> in_support, std::span<const char> neutral,
                       double threshold) {
    const auto p = static_cast<std::size_t>(z_scores.size());
    require(in_support.size() == p, ErrorCode::DimensionError, "support mask length != p");
    require(neutral.empty() || neutral.size() == p, ErrorCode::DimensionError, "neutral mask length != p");

    DetectionReport report;
    report.threshold = threshold;
    for (std::size_t j = 0; j < p; ++j) {
        if (!(std::abs(z_scores[static_cast<Index>(j)]) > threshold)) continue;
        report.detected.push_back(static_cast<Index>(j));
        if (in_support[j]) {
            ++report.true_positives;
        } else if (!neutral.empty() && neutral[j]) {
            ++report.neutral_hits;
        } else {
            ++report.false_positives;
        }
    }
    return report;
}

double bonferroni_z_threshold(double alpha, Index tests) {
    require(tests >= 1, ErrorCode::InvalidArgument, "tests must be >= 1");
    return normal_upper_quantile(alpha / (2.0 * static_cast<double>(tests)));
}

FwerEstimate fwer_estimate(std::span<const DetectionReport> reports) {
    require(!reports.empty(), ErrorCode::EmptyInput, "no runs to estimate FWER from");
    FwerEstimate out;
    out.runs = static_cast<Index>(reports.size());
    for (const auto& report : reports) {
        if (report.false_positives >= 1) ++out.runs_with_false_positive;
    }
    const auto k = static_cast<double>(out.runs_with_false_positive);
    const auto r = static_cast<double>(out.runs);
    out.estimate = k / r;
    out.ci_lower = k == 0 ? 0.0 : boost::math::ibeta_inv(k, r - k + 1.0, 0.025);
    out.ci_upper = k == r ? 1.0 : boost::math::ibeta_inv(k + 1.0, r - k, 0.975);
    return out;
}

double PrCurve::recall_at_precision(double min_precision) const {
    double best = 0.0;
    for (const auto& point : points) {
        if (point.precision >= min_precision) best = std::max(best, point.recall);
    }
    return best;
}

PrCurve precision_recall(const Vector& scores, std::span<const char> labels, std::span<const char> exclude) {
    const auto p = static_cast<std::size_t>(scores.size());
    require(labels.size() == p, ErrorCode::DimensionError, "label mask length != p");
    require(exclude.empty() || exclude.size() == p, ErrorCode::DimensionError, "exclude mask length != p");

    std::vector<Index> kept;
    kept.reserve(p);
    Index positives = 0;
    for (std::size_t j = 0; j < p; ++j) {
        if (!exclude.empty() && exclude[j]) continue;
        kept.push_back(static_cast<Index>(j));
        if (labels[j]) ++positives;
    }
    require(positives > 0, ErrorCode::NoPositives, "no positive labels among included features");

    std::stable_sort(kept.begin(), kept.end(), [&](Index a, Index b) { return scores[a] > scores[b]; });

    PrCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});
    Index tp = 0;
    Index fp = 0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (labels[kept[i]]) {
            ++tp;
        } else {
            ++fp;
        }
        const bool last_of_tie = i + 1 == kept.size() || scores[kept[i + 1]] != scores[kept[i]];
        if (last_of_tie) {
            curve.points.push_back({scores[kept[i]], static_cast<double>(tp) / static_cast<double>(tp + fp),
                                    static_cast<double>(tp) / static_cast<double>(positives)});
        }
    }
    return curve;
}

double jaccard(std::span<const Index> a, std::span<const Index> b) {
    std::vector<Index> sa(a.begin(), a.end());
    std::vector<Index> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
    std::sort(sb.begin(), sb.end());
    sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
    if (sa.empty() && sb.empty()) return 1.0;
    std::vector<Index> common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
    const auto intersection = static_cast<double>(common.size());
    return intersection / (static_cast<double>(sa.size() + sb.size()) - intersection);
}

double map_correlation(const Vector& a, const Vector& b) {
    require(a.size() == b.size() && a.size() >= 2, ErrorCode::DimensionError, "maps must have equal length >= 2");
    const Vector ca = a.array() - a.mean();
    const Vector cb = b.array() - b.mean();
    const double na = ca.norm();
    const double nb = cb.norm();
    require(na > 0.0 && nb > 0.0, ErrorCode::ConstantMap, "map is constant");
    return std::clamp(ca.dot(cb) / (na * nb), -1.0, 1.0);
}

Summary summarize(std::vector<double> values) {
    require(!values.empty(), ErrorCode::EmptyInput, "nothing to summarize");
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return {quantile(0.5), quantile(0.25), quantile(0.75)};
}

StabilityReport stability_suite(std::span<const Vector> maps, double threshold) {
    require(maps.size() >= 2, ErrorCode::EmptyInput, "stability needs at least two maps");
    std::vector<std::vector<Index>> detected(maps.size());
    for (std::size_t r = 0; r < maps.size(); ++r) {
        for (Index j = 0; j < maps[r].size(); ++j) {
            if (std::abs(maps[r][j]) > threshold) detected[r].push_back(j);
        }
    }
    StabilityReport out;
    for (std::size_t r = 0; r < maps.size(); ++r) {
        for (std::size_t s = r + 1; s < maps.size(); ++s) {
            out.correlations.push_back(map_correlation(maps[r], maps[s]));
            out.jaccards.push_back(jaccard(detected[r], detected[s]));
        }
    }
    out.correlation = summarize(out.correlations);
    out.jaccard = summarize(out.jaccards);
    return out;
}

}  // namespace ecdl
