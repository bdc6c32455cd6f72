#pragma once

// Clustered desparsified Lasso (cluster -> compress -> infer -> expand) and
// its ensemble over randomized clusterings, aggregated per feature by twice
// the median p-value.

#include <cstdint>
#include <vector>

#include "ecdl/clustering.hpp"
#include "ecdl/inference.hpp"

namespace ecdl {

struct CdlConfig {
    Index n_clusters = 500;
    double subsample_fraction = 0.7;  // rows used for clustering
    DlConfig dl;
    std::uint64_t seed = 0;

    void validate(Index p) const;
};

struct CdlResult {
    Vector p_values;  // per feature, broadcast from its cluster
    Vector z_scores;  // signed, per feature
    // Cluster interval divided by the cluster size: the per-feature effect
    // when the cluster's coefficient is shared evenly by its members.
    Vector ci_lower;
    Vector ci_upper;
    ClusterLabeling labeling;
    DLResult cluster_result;
};

// floor(fraction * n) distinct rows drawn from `seed`, sorted ascending.
std::vector<Index> draw_subsample(Index n, double fraction, std::uint64_t seed);

CdlResult cdl_infer(const Matrix& design, const Vector& response, const ConnectivityGraph& graph,
                    const CdlConfig& config);

struct PValueMatrix {
    Matrix values;  // B x p
    std::vector<ClusterLabeling> labelings;
    Matrix signs;  // B x p, sign of the cluster estimate
};

struct EcdlResult {
    Vector aggregated_p;
    Vector consensus_z;
    Index repetitions = 0;
    PValueMatrix per_repetition;
};

// Repetition b runs cdl_infer with seed (config.seed XOR b). Repetitions are
// spread over `workers` threads; the output does not depend on the count.
EcdlResult ecdl_infer(const Matrix& design, const Vector& response, const ConnectivityGraph& graph,
                      const CdlConfig& config, Index repetitions, unsigned workers = 1);

// Column-wise min(1, 2 * median); even counts average the two central values.
Vector aggregate_pvalues(const Matrix& pvalues);

}  // namespace ecdl
