#include "ecdl/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ecdl/error.hpp"
#include "ecdl/parallel.hpp"

namespace ecdl {

void CdlConfig::validate(Index p) const {
    dl.validate();
    if (n_clusters < 1 || n_clusters > p) {
        throw Error(ErrorCode::InvalidClusterCount,
                    "cluster count " + std::to_string(n_clusters) + " not in [1, " + std::to_string(p) + "]");
    }
    require(subsample_fraction > 0.0 && subsample_fraction <= 1.0, ErrorCode::InvalidArgument,
            "subsample_fraction must be in (0, 1]");
}

std::vector<Index> draw_subsample(Index n, double fraction, std::uint64_t seed) {
    const auto m = static_cast<Index>(std::floor(fraction * static_cast<double>(n)));
    if (m < 2) {
        throw Error(ErrorCode::SubsampleTooSmall, "subsample of " + std::to_string(m) + " rows from n=" +
                                                      std::to_string(n) + " is too small");
    }
    std::vector<Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Index{0});
    std::mt19937_64 rng(seed);
    for (Index i = 0; i < m; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(rows[i], rows[pick(rng)]);
    }
    rows.resize(static_cast<std::size_t>(m));
    std::sort(rows.begin(), rows.end());
    return rows;
}

CdlResult cdl_infer(const Matrix& design, const Vector& response, const ConnectivityGraph& graph,
                    const CdlConfig& config) {
    const Index n = design.rows();
    const Index p = design.cols();
    require(response.size() == n, ErrorCode::DimensionError, "response length != n");
    require(graph.node_count() == p, ErrorCode::DimensionError, "graph node count != p");
    require(n >= 10, ErrorCode::DimensionError, "clustered inference needs n >= 10");
    config.validate(p);

    CdlResult out;
    const auto rows = draw_subsample(n, config.subsample_fraction, config.seed);
    out.labeling = ward_cluster(design(rows, Eigen::all), graph, config.n_clusters);
    out.labeling.subsample = rows;
    out.labeling.seed = config.seed;

    out.cluster_result = desparsified_lasso(compress(design, out.labeling), response, config.dl);
    const DLResult& clusters = out.cluster_result;

    out.p_values = expand(clusters.p_values, out.labeling);
    out.z_scores = expand(clusters.z_scores, out.labeling);

    const auto sizes = out.labeling.sizes();
    Vector lower(config.n_clusters), upper(config.n_clusters);
    for (Index c = 0; c < config.n_clusters; ++c) {
        lower[c] = clusters.ci_lower[c] / static_cast<double>(sizes[c]);
        upper[c] = clusters.ci_upper[c] / static_cast<double>(sizes[c]);
    }
    out.ci_lower = expand(lower, out.labeling);
    out.ci_upper = expand(upper, out.labeling);
    return out;
}

Vector aggregate_pvalues(const Matrix& pvalues) {
    const Index reps = pvalues.rows();
    require(reps >= 1 && pvalues.cols() >= 1, ErrorCode::EmptyInput, "aggregation needs a non-empty matrix");
    Vector out(pvalues.cols());
    std::vector<double> column(static_cast<std::size_t>(reps));
    for (Index j = 0; j < pvalues.cols(); ++j) {
        for (Index b = 0; b < reps; ++b) column[b] = pvalues(b, j);
        const auto mid = column.begin() + reps / 2;
        std::nth_element(column.begin(), mid, column.end());
        double median = *mid;
        if (reps % 2 == 0) median = 0.5 * (median + *std::max_element(column.begin(), mid));
        out[j] = std::min(1.0, 2.0 * median);
    }
    return out;
}

EcdlResult ecdl_infer(const Matrix& design, const Vector& response, const ConnectivityGraph& graph,
                      const CdlConfig& config, Index repetitions, unsigned workers) {
    require(repetitions >= 1, ErrorCode::InvalidArgument, "repetitions must be >= 1");
    const Index p = design.cols();
    config.validate(p);

    const auto reps = static_cast<std::size_t>(repetitions);
    const unsigned outer = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(reps)));
    const unsigned inner = std::max(1u, workers / outer);

    EcdlResult out;
    out.repetitions = repetitions;
    out.per_repetition.values.resize(repetitions, p);
    out.per_repetition.signs.resize(repetitions, p);
    out.per_repetition.labelings.resize(reps);
    Matrix z(repetitions, p);

    parallel_for(reps, outer, [&](std::size_t b) {
        CdlConfig run = config;
        run.seed = config.seed ^ static_cast<std::uint64_t>(b);
        run.dl.workers = inner;
        CdlResult cdl = cdl_infer(design, response, graph, run);
        const auto row = static_cast<Index>(b);
        out.per_repetition.values.row(row) = cdl.p_values.transpose();
        out.per_repetition.signs.row(row) = cdl.z_scores.array().sign().matrix().transpose();
        z.row(row) = cdl.z_scores.transpose();
        out.per_repetition.labelings[b] = std::move(cdl.labeling);
    });

    out.aggregated_p = aggregate_pvalues(out.per_repetition.values);
    const Vector consensus_sign = z.colwise().sum().transpose().array().sign();
    out.consensus_z = pvalue_to_signed_z(out.aggregated_p, consensus_sign);
    return out;
}

}  // namespace ecdl
