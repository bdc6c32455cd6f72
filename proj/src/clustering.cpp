#include "ecdl/clustering.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <string>

#include "ecdl/error.hpp"

namespace ecdl {

ConnectivityGraph::ConnectivityGraph(Index node_count, std::vector<Edge> edges) : node_count_(node_count) {
    require(node_count >= 1, ErrorCode::DimensionError, "graph needs at least one node");
    for (auto& [a, b] : edges) {
        require(a >= 0 && b >= 0 && a < node_count && b < node_count, ErrorCode::DimensionError,
                "edge endpoint out of range");
        require(a != b, ErrorCode::DimensionError, "self-loop on node " + std::to_string(a));
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);

    offsets_.assign(static_cast<std::size_t>(node_count) + 1, 0);
    for (const auto& [a, b] : edges_) {
        ++offsets_[a + 1];
        ++offsets_[b + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    adjacency_.resize(offsets_.back());
    std::vector<Index> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [a, b] : edges_) {
        adjacency_[fill[a]++] = b;
        adjacency_[fill[b]++] = a;
    }
    for (Index j = 0; j < node_count; ++j) {
        std::sort(adjacency_.begin() + offsets_[j], adjacency_.begin() + offsets_[j + 1]);
    }
}

ConnectivityGraph ConnectivityGraph::complete(Index node_count) {
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(node_count * (node_count - 1) / 2));
    for (Index a = 0; a < node_count; ++a) {
        for (Index b = a + 1; b < node_count; ++b) edges.emplace_back(a, b);
    }
    return ConnectivityGraph(node_count, std::move(edges));
}

std::span<const Index> ConnectivityGraph::neighbors(Index j) const {
    return {adjacency_.data() + offsets_[j], static_cast<std::size_t>(offsets_[j + 1] - offsets_[j])};
}

bool ConnectivityGraph::is_connected() const {
    if (node_count_ <= 1) return true;
    std::vector<char> seen(static_cast<std::size_t>(node_count_), 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    Index reached = 1;
    while (!stack.empty()) {
        const Index j = stack.back();
        stack.pop_back();
        for (const Index k : neighbors(j)) {
            if (!seen[k]) {
                seen[k] = 1;
                ++reached;
                stack.push_back(k);
            }
        }
    }
    return reached == node_count_;
}

Index flatten_index(std::span<const Index> shape, std::span<const Index> coords) {
    require(shape.size() == coords.size(), ErrorCode::DimensionError, "coordinate rank mismatch");
    Index flat = 0;
    for (std::size_t d = 0; d < shape.size(); ++d) {
        require(coords[d] >= 0 && coords[d] < shape[d], ErrorCode::DimensionError, "coordinate out of range");
        flat = flat * shape[d] + coords[d];
    }
    return flat;
}

std::vector<Index> unflatten_index(std::span<const Index> shape, Index flat) {
    std::vector<Index> coords(shape.size());
    for (std::size_t d = shape.size(); d-- > 0;) {
        coords[d] = flat % shape[d];
        flat /= shape[d];
    }
    require(flat == 0, ErrorCode::DimensionError, "flat index out of range");
    return coords;
}

ConnectivityGraph grid_connectivity(std::span<const Index> shape) {
    require(!shape.empty() && shape.size() <= 3, ErrorCode::DimensionError, "grid must be 1-, 2- or 3-D");
    Index p = 1;
    for (const Index extent : shape) {
        require(extent >= 1, ErrorCode::DimensionError, "grid extents must be >= 1");
        p *= extent;
    }

    // Stride of axis d in the row-major flattening.
    std::vector<Index> stride(shape.size(), 1);
    for (std::size_t d = shape.size() - 1; d-- > 0;) stride[d] = stride[d + 1] * shape[d + 1];

    std::vector<ConnectivityGraph::Edge> edges;
    for (Index flat = 0; flat < p; ++flat) {
        for (std::size_t d = 0; d < shape.size(); ++d) {
            const Index coord = (flat / stride[d]) % shape[d];
            if (coord + 1 < shape[d]) edges.emplace_back(flat, flat + stride[d]);
        }
    }
    return ConnectivityGraph(p, std::move(edges));
}

ConnectivityGraph grid_connectivity(std::initializer_list<Index> shape) {
    return grid_connectivity(std::span<const Index>(shape.begin(), shape.size()));
}

std::vector<Index> ClusterLabeling::sizes() const {
    std::vector<Index> out(static_cast<std::size_t>(n_clusters), 0);
    for (const Index label : labels) ++out[label];
    return out;
}

namespace {

struct Candidate {
    double cost;
    Index a;  // a < b
    Index b;
    std::uint32_t stamp_a;
    std::uint32_t stamp_b;
};

// priority_queue keeps the largest on top; invert to pop the cheapest, then
// the lexicographically smallest pair.
struct CandidateAfter {
    bool operator()(const Candidate& x, const Candidate& y) const {
        if (x.cost != y.cost) return x.cost > y.cost;
        if (x.a != y.a) return x.a > y.a;
        return x.b > y.b;
    }
};

}  // namespace

ClusterLabeling ward_cluster(Matrix design_rows, const ConnectivityGraph& graph, Index n_clusters,
                             std::vector<WardMerge>* merges) {
    const Index p = design_rows.cols();
    require(design_rows.rows() >= 1, ErrorCode::DimensionError, "clustering needs at least one row");
    require(graph.node_count() == p, ErrorCode::DimensionError,
            "graph has " + std::to_string(graph.node_count()) + " nodes but design has " + std::to_string(p) +
                " columns");
    if (n_clusters < 1 || n_clusters > p) {
        throw Error(ErrorCode::InvalidClusterCount,
                    "cluster count " + std::to_string(n_clusters) + " not in [1, " + std::to_string(p) + "]");
    }
    require(graph.is_connected(), ErrorCode::DisconnectedGraph, "connectivity graph is not connected");

    Matrix& sums = design_rows;  // column k holds the member sum of cluster k
    std::vector<double> size(static_cast<std::size_t>(p), 1.0);
    std::vector<std::uint32_t> stamp(static_cast<std::size_t>(p), 0);
    std::vector<char> alive(static_cast<std::size_t>(p), 1);
    std::vector<Index> parent(static_cast<std::size_t>(p));
    std::iota(parent.begin(), parent.end(), Index{0});

    std::vector<std::vector<Index>> adjacent(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) {
        const auto nb = graph.neighbors(j);
        adjacent[j].assign(nb.begin(), nb.end());
    }

    auto ward_cost = [&](Index a, Index b) {
        const double na = size[a];
        const double nb = size[b];
        return na * nb / (na + nb) * (sums.col(a) / na - sums.col(b) / nb).squaredNorm();
    };

    std::vector<Candidate> initial;
    initial.reserve(graph.edges().size());
    for (const auto& [a, b] : graph.edges()) initial.push_back({ward_cost(a, b), a, b, 0, 0});
    std::priority_queue<Candidate, std::vector<Candidate>, CandidateAfter> heap(CandidateAfter{},
                                                                                std::move(initial));
    if (merges) merges->reserve(static_cast<std::size_t>(p - n_clusters));

    Index remaining = p;
    while (remaining > n_clusters) {
        require(!heap.empty(), ErrorCode::DisconnectedGraph, "no adjacent clusters left to merge");
        const Candidate top = heap.top();
        heap.pop();
        if (!alive[top.a] || !alive[top.b] || stamp[top.a] != top.stamp_a || stamp[top.b] != top.stamp_b) {
            continue;
        }

        const Index keep = top.a;
        const Index drop = top.b;
        if (merges) merges->push_back({keep, drop, top.cost});
        sums.col(keep) += sums.col(drop);
        size[keep] += size[drop];
        alive[drop] = 0;
        ++stamp[keep];
        parent[drop] = keep;
        --remaining;

        // Rewire neighbors of the absorbed cluster onto the kept one.
        for (const Index k : adjacent[drop]) {
            if (k == keep) continue;
            auto& list = adjacent[k];
            list.erase(std::find(list.begin(), list.end(), drop));
            if (std::find(list.begin(), list.end(), keep) == list.end()) list.push_back(keep);
        }
        auto& merged = adjacent[keep];
        merged.insert(merged.end(), adjacent[drop].begin(), adjacent[drop].end());
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        merged.erase(std::remove_if(merged.begin(), merged.end(), [&](Index k) { return k == keep || k == drop; }),
                     merged.end());
        std::vector<Index>().swap(adjacent[drop]);

        for (const Index k : merged) {
            const Index a = std::min(keep, k);
            const Index b = std::max(keep, k);
            heap.push({ward_cost(a, b), a, b, stamp[a], stamp[b]});
        }
    }

    // Resolve roots; parent always points to a smaller index.
    for (Index j = 0; j < p; ++j) parent[j] = parent[parent[j]];

    ClusterLabeling out;
    out.n_clusters = n_clusters;
    out.labels.resize(static_cast<std::size_t>(p));
    std::vector<Index> label_of_root(static_cast<std::size_t>(p), -1);
    Index next = 0;
    for (Index j = 0; j < p; ++j) {
        const Index root = parent[j];
        if (label_of_root[root] < 0) label_of_root[root] = next++;
        out.labels[j] = label_of_root[root];
    }
    return out;
}

bool clusters_connected(const ClusterLabeling& labeling, const ConnectivityGraph& graph) {
    const auto p = static_cast<Index>(labeling.labels.size());
    if (graph.node_count() != p) return false;
    std::vector<char> seen(static_cast<std::size_t>(p), 0);
    std::vector<char> label_done(static_cast<std::size_t>(labeling.n_clusters), 0);
    std::vector<Index> stack;
    for (Index start = 0; start < p; ++start) {
        const Index label = labeling.labels[start];
        if (seen[start]) continue;
        if (label_done[label]) return false;  // second component of an already visited cluster
        label_done[label] = 1;
        seen[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            const Index j = stack.back();
            stack.pop_back();
            for (const Index k : graph.neighbors(j)) {
                if (!seen[k] && labeling.labels[k] == label) {
                    seen[k] = 1;
                    stack.push_back(k);
                }
            }
        }
    }
    return std::all_of(label_done.begin(), label_done.end(), [](char c) { return c != 0; });
}

Matrix compress(const Matrix& design, const ClusterLabeling& labeling) {
    require(static_cast<Index>(labeling.labels.size()) == design.cols(), ErrorCode::DimensionError,
            "labeling length != number of design columns");
    Matrix out = Matrix::Zero(design.rows(), labeling.n_clusters);
    for (Index j = 0; j < design.cols(); ++j) out.col(labeling.labels[j]) += design.col(j);
    const auto sizes = labeling.sizes();
    for (Index c = 0; c < labeling.n_clusters; ++c) {
        require(sizes[c] > 0, ErrorCode::DimensionError, "empty cluster " + std::to_string(c));
        out.col(c) /= static_cast<double>(sizes[c]);
    }
    return out;
}

Vector expand(const Vector& values, const ClusterLabeling& labeling) {
    require(values.size() == labeling.n_clusters, ErrorCode::DimensionError, "values length != cluster count");
    Vector out(static_cast<Index>(labeling.labels.size()));
    for (std::size_t j = 0; j < labeling.labels.size(); ++j) out[static_cast<Index>(j)] = values[labeling.labels[j]];
    return out;
}

}  // namespace ecdl
