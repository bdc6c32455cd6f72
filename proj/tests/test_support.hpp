#pragma once

// Shared generators and independent oracles for the test suites. Nothing here
// calls the solver paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace ecdl::testing {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
}

inline Vector random_vector(Index n, std::uint64_t seed) { return random_matrix(n, 1, seed).col(0); }

// Two-pass column centering and scaling to norm sqrt(n).
inline Matrix naive_standardize(const Matrix& raw, Vector* means = nullptr, Vector* scales = nullptr) {
    const Index n = raw.rows();
    Matrix out(n, raw.cols());
    if (means) means->resize(raw.cols());
    if (scales) scales->resize(raw.cols());
    for (Index j = 0; j < raw.cols(); ++j) {
        double sum = 0.0;
        for (Index i = 0; i < n; ++i) sum += raw(i, j);
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (Index i = 0; i < n; ++i) ss += (raw(i, j) - mean) * (raw(i, j) - mean);
        const double scale = std::sqrt(ss / static_cast<double>(n));
        for (Index i = 0; i < n; ++i) out(i, j) = (raw(i, j) - mean) / scale;
        if (means) (*means)[j] = mean;
        if (scales) (*scales)[j] = scale;
    }
    return out;
}

// Accelerated proximal gradient (FISTA) for (1/2n)||y - Xw||^2 + lambda ||w||_1.
inline Vector proximal_gradient_lasso(const Matrix& x, const Vector& y, double lambda, int iterations = 200000) {
    const double n = static_cast<double>(x.rows());
    const Matrix gram = x.transpose() * x / n;
    const Vector xty = x.transpose() * y / n;
    const double step = 1.0 / Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().maxCoeff();
    Vector w = Vector::Zero(x.cols()), v = w, previous = w;
    double t = 1.0;
    for (int it = 0; it < iterations; ++it) {
        const Vector grad = gram * v - xty;
        Vector next = v - step * grad;
        for (Index j = 0; j < next.size(); ++j) {
            const double a = std::abs(next[j]) - step * lambda;
            next[j] = a > 0.0 ? std::copysign(a, next[j]) : 0.0;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        v = next + ((t - 1.0) / t_next) * (next - previous);
        previous = next;
        t = t_next;
        w = next;
    }
    return w;
}

// Ordinary least squares with intercept via the normal equations on centered data.
inline Vector ols(const Matrix& x, const Vector& y) {
    const Matrix xc = x.rowwise() - x.colwise().mean();
    const Vector yc = y.array() - y.mean();
    return (xc.transpose() * xc).ldlt().solve(xc.transpose() * yc);
}

// Kolmogorov-Smirnov distance of a sample to Uniform(0, 1).
inline double ks_uniform(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double m = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        d = std::max(d, static_cast<double>(i + 1) / m - sample[i]);
        d = std::max(d, sample[i] - static_cast<double>(i) / m);
    }
    return d;
}

// Within-cluster sum of squares of a set of columns.
inline double within_ss(const Matrix& cols, const std::vector<Index>& members) {
    Vector centroid = Vector::Zero(cols.rows());
    for (const Index j : members) centroid += cols.col(j);
    centroid /= static_cast<double>(members.size());
    double ss = 0.0;
    for (const Index j : members) ss += (cols.col(j) - centroid).squaredNorm();
    return ss;
}

struct OracleMerge {
    Index kept;
    Index removed;
};

// Exhaustive greedy Ward: at every step evaluate the increase in within-cluster
// sum of squares for every adjacent pair of current clusters and merge the
// cheapest, ties to the smallest (min-member, min-member) pair. `adjacent(a, b)`
// decides feature adjacency.
template <class Adjacent>
std::vector<OracleMerge> exhaustive_ward(const Matrix& cols, Index target, Adjacent adjacent) {
    std::vector<std::vector<Index>> clusters;
    for (Index j = 0; j < cols.cols(); ++j) clusters.push_back({j});
    std::vector<OracleMerge> merges;
    while (static_cast<Index>(clusters.size()) > target) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_a = 0, best_b = 0;
        for (std::size_t a = 0; a < clusters.size(); ++a) {
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                bool touching = false;
                for (const Index u : clusters[a])
                    for (const Index v : clusters[b]) touching = touching || adjacent(u, v);
                if (!touching) continue;
                std::vector<Index> joined = clusters[a];
                joined.insert(joined.end(), clusters[b].begin(), clusters[b].end());
                const double cost = within_ss(cols, joined) - within_ss(cols, clusters[a]) - within_ss(cols, clusters[b]);
                // Clusters are kept ordered by smallest member, so scan order is the tie order.
                if (cost < best) {
                    best = cost;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        merges.push_back({clusters[best_a].front(), clusters[best_b].front()});
        clusters[best_a].insert(clusters[best_a].end(), clusters[best_b].begin(), clusters[best_b].end());
        std::sort(clusters[best_a].begin(), clusters[best_a].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
    }
    return merges;
}

}  // namespace ecdl::testing
