#include "doctest.h"

#include <cmath>
#include <random>

#include "ecdl/error.hpp"
#include "ecdl/evaluation.hpp"
#include "test_support.hpp"

using namespace ecdl;

namespace {

DetectionReport with_false_positives(Index count) {
    DetectionReport r;
    r.false_positives = count;
    return r;
}

// Binomial upper tail P(X >= x) by direct summation in log space.
double binomial_tail(Index n, Index x, double q) {
    double total = 0.0;
    for (Index k = x; k <= n; ++k) {
        const double log_term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                                k * std::log(q) + (n - k) * std::log1p(-q);
        total += std::exp(log_term);
    }
    return total;
}

// Clopper-Pearson bounds by bisection on the defining tail equations.
std::pair<double, double> clopper_pearson(Index n, Index x) {
    auto solve = [](auto f) {
        double lo = 0.0, hi = 1.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) ? hi : lo) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double lower = x == 0 ? 0.0 : solve([&](double q) { return binomial_tail(n, x, q) >= 0.025; });
    const double upper = x == n ? 1.0 : solve([&](double q) { return 1.0 - binomial_tail(n, x + 1, q) <= 0.025; });
    return {lower, upper};
}

// Brute-force precision/recall at threshold t over included features.
std::pair<double, double> pr_at(const Vector& s, const std::vector<char>& y, const std::vector<char>& ex, double t) {
    double tp = 0, fp = 0, pos = 0;
    for (Index j = 0; j < s.size(); ++j) {
        if (!ex.empty() && ex[j]) continue;
        pos += y[j];
        if (s[j] >= t) (y[j] ? tp : fp) += 1;
    }
    return {tp + fp == 0 ? 1.0 : tp / (tp + fp), tp / pos};
}

}  // namespace

TEST_CASE("detections are split into support, neutral band, and false positives") {
    Vector z(6);
    z << 4.0, -3.5, 2.9, 3.0, -10.0, 3.01;
    const std::vector<char> support{1, 0, 0, 0, 0, 0};
    const std::vector<char> neutral{0, 1, 0, 0, 0, 0};
    const auto r = detect(z, support, neutral);
    CHECK(r.detected == std::vector<Index>{0, 1, 4, 5});
    CHECK(r.true_positives == 1);
    CHECK(r.neutral_hits == 1);
    CHECK(r.false_positives == 2);
    CHECK(detect(z, support, {}).false_positives == 3);
}

TEST_CASE("enlarging the neutral band never adds false positives") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0.0, 2.0);
    Vector z(200);
    for (Index j = 0; j < 200; ++j) z[j] = normal(rng);
    std::vector<char> support(200, 0), neutral(200, 0);
    for (Index j = 0; j < 20; ++j) support[j] = 1;
    Index previous = detect(z, support, neutral).false_positives;
    for (Index j = 20; j < 200; j += 7) {
        neutral[j] = 1;
        const Index now = detect(z, support, neutral).false_positives;
        CHECK(now <= previous);
        previous = now;
    }
}

TEST_CASE("Bonferroni threshold") {
    CHECK(bonferroni_z_threshold(0.05, 1) == doctest::Approx(1.959963984540054));
    CHECK(bonferroni_z_threshold(0.05, 100) == doctest::Approx(3.4807564));
}

TEST_CASE("FWER estimate and its interval") {
    const std::vector<DetectionReport> clean(10, with_false_positives(0));
    const auto zero = fwer_estimate(clean);
    CHECK(zero.estimate == 0.0);
    CHECK(zero.ci_lower == 0.0);
    CHECK(zero.ci_upper == doctest::Approx(1.0 - std::pow(0.025, 0.1)));

    const std::vector<DetectionReport> mixed{with_false_positives(0), with_false_positives(2), with_false_positives(0),
                                             with_false_positives(1)};
    const auto half = fwer_estimate(mixed);
    CHECK(half.estimate == 0.5);
    CHECK(half.runs == 4);
    CHECK(half.runs_with_false_positive == 2);

    for (const auto [n, x] : {std::pair<Index, Index>{30, 0}, {30, 1}, {30, 7}, {30, 30}, {17, 16}}) {
        std::vector<DetectionReport> reports;
        for (Index i = 0; i < n; ++i) reports.push_back(with_false_positives(i < x ? 1 : 0));
        const auto est = fwer_estimate(reports);
        const auto [lo, hi] = clopper_pearson(n, x);
        CHECK(est.ci_lower == doctest::Approx(lo).epsilon(1e-8));
        CHECK(est.ci_upper == doctest::Approx(hi).epsilon(1e-8));
    }
    CHECK_THROWS_AS(fwer_estimate({}), Error);
}

TEST_CASE("precision-recall agrees with brute force at every threshold") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> level(0, 9);  // ties on purpose
    for (int trial = 0; trial < 20; ++trial) {
        Vector scores(60);
        std::vector<char> labels(60), exclude(60);
        for (Index j = 0; j < 60; ++j) {
            labels[j] = (rng() % 3 == 0) ? 1 : 0;
            exclude[j] = (rng() % 8 == 0) ? 1 : 0;
            scores[j] = level(rng) + (labels[j] ? 2.0 : 0.0);
        }
        labels[0] = 1;
        exclude[0] = 0;
        const auto curve = precision_recall(scores, labels, exclude);
        CHECK(curve.points.front().recall == 0.0);
        CHECK(curve.points.front().precision == 1.0);
        for (std::size_t k = 1; k < curve.points.size(); ++k) {
            const auto& pt = curve.points[k];
            CHECK(pt.threshold < curve.points[k - 1].threshold);
            const auto [precision, recall] = pr_at(scores, labels, exclude, pt.threshold);
            CHECK(pt.precision == doctest::Approx(precision));
            CHECK(pt.recall == doctest::Approx(recall));
        }
        CHECK(curve.points.back().recall == 1.0);
        double best = 0.0;
        for (const auto& pt : curve.points)
            if (pt.precision >= 0.9) best = std::max(best, pt.recall);
        CHECK(curve.recall_at_precision(0.9) == best);
    }
}

TEST_CASE("precision-recall of perfect and random scores") {
    Vector perfect(6);
    perfect << 5, 4, 3, 1, 0.5, 0;
    const std::vector<char> labels{1, 1, 1, 0, 0, 0};
    const auto curve = precision_recall(perfect, labels, {});
    bool through_corner = false;
    for (const auto& pt : curve.points) through_corner = through_corner || (pt.precision == 1.0 && pt.recall == 1.0);
    CHECK(through_corner);
    CHECK(curve.recall_at_precision(0.9) == 1.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u;
    Vector noise(20000);
    std::vector<char> half(20000);
    for (Index j = 0; j < 20000; ++j) {
        noise[j] = u(rng);
        half[j] = j % 2;
    }
    const auto random_curve = precision_recall(noise, half, {});
    // At thresholds below the 10th percentile nearly everything is called.
    for (const auto& pt : random_curve.points)
        if (pt.recall > 0.9) CHECK(std::abs(pt.precision - 0.5) < 0.02);
}

TEST_CASE("precision-recall is invariant to monotone score transforms") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    Vector scores(100);
    std::vector<char> labels(100);
    for (Index j = 0; j < 100; ++j) {
        labels[j] = j < 30;
        scores[j] = normal(rng) + (labels[j] ? 1.0 : 0.0);
    }
    const auto a = precision_recall(scores, labels, {});
    const auto b = precision_recall(scores.array().exp().matrix() * 3.0, labels, {});
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        CHECK(a.points[k].precision == b.points[k].precision);
        CHECK(a.points[k].recall == b.points[k].recall);
    }
}

TEST_CASE("precision-recall without positives") {
    const std::vector<char> labels{0, 1, 0};
    const std::vector<char> exclude{0, 1, 0};
    try {
        precision_recall(Vector::Ones(3), labels, exclude);
        FAIL("expected NoPositives");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoPositives);
    }
}

TEST_CASE("Jaccard index") {
    const std::vector<Index> a{1, 2, 3}, b{4, 3, 2}, c{7, 8}, none;
    CHECK(jaccard(a, a) == 1.0);
    CHECK(jaccard(a, c) == 0.0);
    CHECK(jaccard(a, b) == 0.5);
    CHECK(jaccard(b, a) == 0.5);
    CHECK(jaccard(none, none) == 1.0);
    CHECK(jaccard(a, none) == 0.0);
}

TEST_CASE("map correlation") {
    const Vector a = ecdl::testing::random_vector(100000, 5);
    const Vector b = ecdl::testing::random_vector(100000, 6);
    CHECK(map_correlation(a, 2.0 * a) == doctest::Approx(1.0));
    CHECK(map_correlation(a, -a) == doctest::Approx(-1.0));
    CHECK(std::abs(map_correlation(a, b)) < 0.01);
    CHECK(map_correlation(a, b) == map_correlation(b, a));
    try {
        map_correlation(a, Vector::Constant(100000, 1.0));
        FAIL("expected ConstantMap");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConstantMap);
    }
}

TEST_CASE("summaries use interpolated quantiles") {
    const auto s = summarize({4.0, 1.0, 3.0, 2.0});
    CHECK(s.median == 2.5);
    CHECK(s.q25 == 1.75);
    CHECK(s.q75 == 3.25);
    CHECK(summarize({7.0}).median == 7.0);
}

TEST_CASE("stability of identical and paired maps") {
    Vector map(5);
    map << 4, 0.1, -5, 2, 0.3;
    const std::vector<Vector> same(4, map);
    const auto report = stability_suite(same, 3.0);
    CHECK(report.correlations.size() == 6);
    for (const double c : report.correlations) CHECK(c == doctest::Approx(1.0));
    for (const double j : report.jaccards) CHECK(j == 1.0);

    Vector other(5);
    other << 4, 3.5, 0, 0, 1;
    const std::vector<Vector> pair{map, other};
    const auto two = stability_suite(pair, 3.0);
    REQUIRE(two.jaccards.size() == 1);
    CHECK(two.jaccards[0] == doctest::Approx(1.0 / 3.0));
    CHECK(two.correlations[0] == doctest::Approx(map_correlation(map, other)));
    CHECK_THROWS_AS(stability_suite(std::vector<Vector>{map}, 3.0), Error);
}
