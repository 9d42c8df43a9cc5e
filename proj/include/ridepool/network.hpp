#pragma once

#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ridepool/types.hpp"

namespace ridepool {

struct GraphNode {
    NodeId id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct GraphEdge {
    NodeId to = 0;
    Seconds travel_time = 0;
};

// Directed street network. Node ids are dense 1..n, every edge has a
// positive integer travel time, and the graph is strongly connected
// (validated at construction so every pickup/drop-off stays reachable).
class StreetGraph {
public:
    StreetGraph(std::vector<GraphNode> nodes,
                std::vector<std::pair<NodeId, GraphEdge>> edges);

    static StreetGraph load(const std::string& path);
    static StreetGraph parse(std::istream& in, const std::string& source_name);

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int edge_count() const { return edge_count_; }
    const GraphNode& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id - 1)]; }
    const std::vector<GraphNode>& nodes() const { return nodes_; }
    const std::vector<GraphEdge>& out_edges(NodeId id) const {
        return adjacency_[static_cast<std::size_t>(id - 1)];
    }
    bool has_node(NodeId id) const { return id >= 1 && id <= node_count(); }

    // Largest Euclidean distance between any two node coordinates; used for
    // clustering feature scales.
    double coordinate_span() const;

private:
    std::vector<GraphNode> nodes_;
    std::vector<std::vector<GraphEdge>> adjacency_;  // sorted by target id
    int edge_count_ = 0;
};

// Shortest-path travel times and path reconstruction on a StreetGraph.
// Single-source runs are computed lazily and cached per origin (and per
// destination for path tie-breaking); the cache is internally synchronized,
// so a const oracle can be shared across worker threads.
class TravelTimeOracle {
public:
    explicit TravelTimeOracle(const StreetGraph& graph);

    TravelTimeOracle(const TravelTimeOracle&) = delete;
    TravelTimeOracle& operator=(const TravelTimeOracle&) = delete;

    const StreetGraph& graph() const { return *graph_; }

    // Minimal travel time in seconds; 0 when from == to.
    Seconds time(NodeId from, NodeId to) const;

    // Node sequence of the shortest path. Among equal-cost paths the
    // lexicographically smallest node-id sequence is returned, which keeps
    // route construction reproducible across runs.
    const std::vector<NodeId>& path(NodeId from, NodeId to) const;

    // max over all node pairs of time(a, b); cached after the first call.
    Seconds diameter() const;

private:
    const std::vector<Seconds>& dist_from(NodeId origin) const;
    const std::vector<Seconds>& dist_to(NodeId destination) const;
    std::vector<Seconds> run_dijkstra(NodeId source, bool reverse) const;

    const StreetGraph* graph_;
    std::vector<std::vector<GraphEdge>> reverse_adjacency_;
    mutable std::mutex mutex_;
    mutable std::vector<std::unique_ptr<std::vector<Seconds>>> from_cache_;
    mutable std::vector<std::unique_ptr<std::vector<Seconds>>> to_cache_;
    mutable std::unordered_map<std::uint64_t, std::unique_ptr<std::vector<NodeId>>> path_cache_;
    mutable Seconds diameter_ = -1;
};

}  // namespace ridepool
