#pragma once

// Connectivity-constrained Ward agglomeration of features and the
// compress/expand maps between features and clusters.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ecdl/lasso.hpp"

namespace ecdl {

// Undirected simple graph over p features, stored as a sorted edge list plus
// CSR adjacency.
class ConnectivityGraph {
public:
    using Edge = std::pair<Index, Index>;

    ConnectivityGraph() = default;
    // Edges are normalized to (min, max) and deduplicated. Self-loops and
    // out-of-range endpoints throw DimensionError.
    ConnectivityGraph(Index node_count, std::vector<Edge> edges);

    static ConnectivityGraph complete(Index node_count);

    Index node_count() const { return node_count_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const Index> neighbors(Index j) const;
    bool is_connected() const;

private:
    Index node_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<Index> offsets_;
    std::vector<Index> adjacency_;
};

// Lattice graph over a 1-, 2- or 3-D grid flattened row-major (last axis
// fastest); sites at L1 distance 1 are connected.
ConnectivityGraph grid_connectivity(std::span<const Index> shape);
ConnectivityGraph grid_connectivity(std::initializer_list<Index> shape);

Index flatten_index(std::span<const Index> shape, std::span<const Index> coords);
std::vector<Index> unflatten_index(std::span<const Index> shape, Index flat);

struct ClusterLabeling {
    std::vector<Index> labels;  // length p, values in [0, n_clusters)
    Index n_clusters = 0;
    std::vector<Index> subsample;  // rows the clustering was computed on
    std::uint64_t seed = 0;

    std::vector<Index> sizes() const;
};

struct WardMerge {
    Index kept;     // smallest feature index of the merged pair
    Index removed;  // smallest feature index of the absorbed cluster
    double cost;
};

// Greedy Ward agglomeration restricted to graph-adjacent clusters, run until
// n_clusters remain. A cluster is identified by its smallest feature index;
// equal costs are broken by the lexicographically smallest (id, id) pair.
// Labels are numbered by first appearance in feature order. `design_rows`
// holds one column per feature and is consumed as scratch space.
ClusterLabeling ward_cluster(Matrix design_rows, const ConnectivityGraph& graph, Index n_clusters,
                             std::vector<WardMerge>* merges = nullptr);

// True when every cluster induces a connected subgraph.
bool clusters_connected(const ClusterLabeling& labeling, const ConnectivityGraph& graph);

// n x C matrix whose column c is the mean of the design columns in cluster c.
Matrix compress(const Matrix& design, const ClusterLabeling& labeling);

// out[j] = values[label[j]].
Vector expand(const Vector& values, const ClusterLabeling& labeling);

}  // namespace ecdl
