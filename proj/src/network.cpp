#include "ridepool/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

namespace ridepool {

namespace {

[[noreturn]] void parse_fail(const std::string& source, int line, const std::string& what) {
    throw InputError(source + ":" + std::to_string(line) + ": " + what);
}

bool reaches_all(const std::vector<std::vector<GraphEdge>>& adj, NodeId start) {
    std::vector<char> seen(adj.size(), 0);
    std::vector<NodeId> queue{start};
    seen[static_cast<std::size_t>(start - 1)] = 1;
    std::size_t count = 1;
    while (!queue.empty()) {
        NodeId u = queue.back();
        queue.pop_back();
        for (const GraphEdge& e : adj[static_cast<std::size_t>(u - 1)]) {
            char& flag = seen[static_cast<std::size_t>(e.to - 1)];
            if (!flag) {
                flag = 1;
                ++count;
                queue.push_back(e.to);
            }
        }
    }
    return count == adj.size();
}

std::vector<std::vector<GraphEdge>> reversed(const std::vector<std::vector<GraphEdge>>& adj) {
    std::vector<std::vector<GraphEdge>> rev(adj.size());
    for (std::size_t u = 0; u < adj.size(); ++u) {
        for (const GraphEdge& e : adj[u]) {
            rev[static_cast<std::size_t>(e.to - 1)].push_back(
                GraphEdge{static_cast<NodeId>(u + 1), e.travel_time});
        }
    }
    for (auto& edges : rev) {
        std::sort(edges.begin(), edges.end(),
                  [](const GraphEdge& a, const GraphEdge& b) { return a.to < b.to; });
    }
    return rev;
}

}  // namespace

StreetGraph::StreetGraph(std::vector<GraphNode> nodes,
                         std::vector<std::pair<NodeId, GraphEdge>> edges)
    : nodes_(std::move(nodes)) {
    const int n = static_cast<int>(nodes_.size());
    if (n == 0) throw InputError("graph has no nodes");
    for (int i = 0; i < n; ++i) {
        if (nodes_[static_cast<std::size_t>(i)].id != i + 1)
            throw InputError("node ids must be dense 1..n; got id " +
                             std::to_string(nodes_[static_cast<std::size_t>(i)].id) +
                             " at position " + std::to_string(i + 1));
    }
    adjacency_.resize(static_cast<std::size_t>(n));
    for (const auto& [from, edge] : edges) {
        if (from < 1 || from > n)
            throw InputError("edge references unknown node " + std::to_string(from));
        if (edge.to < 1 || edge.to > n)
            throw InputError("edge references unknown node " + std::to_string(edge.to));
        if (edge.travel_time < 1)
            throw InputError("edge " + std::to_string(from) + "->" + std::to_string(edge.to) +
                             " has non-positive travel time");
        adjacency_[static_cast<std::size_t>(from - 1)].push_back(edge);
        ++edge_count_;
    }
    for (auto& out : adjacency_) {
        std::sort(out.begin(), out.end(), [](const GraphEdge& a, const GraphEdge& b) {
            return a.to != b.to ? a.to < b.to : a.travel_time < b.travel_time;
        });
    }
    if (!reaches_all(adjacency_, 1) || !reaches_all(reversed(adjacency_), 1))
        throw InputError("graph is not strongly connected");
}

StreetGraph StreetGraph::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open graph file: " + path);
    return parse(in, path);
}

StreetGraph StreetGraph::parse(std::istream& in, const std::string& source_name) {
    std::vector<GraphNode> nodes;
    std::vector<std::pair<NodeId, GraphEdge>> edges;
    long long expected_nodes = -1, expected_edges = -1;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        std::istringstream fields{std::string(view)};
        std::string tag;
        if (!(fields >> tag)) continue;

        if (tag == "nodes") {
            if (!(fields >> expected_nodes) || expected_nodes < 1)
                parse_fail(source_name, line_no, "expected 'nodes <count>'");
        } else if (tag == "node") {
            GraphNode node;
            if (!(fields >> node.id >> node.x >> node.y))
                parse_fail(source_name, line_no, "expected 'node <id> <x> <y>'");
            nodes.push_back(node);
        } else if (tag == "edges") {
            if (!(fields >> expected_edges) || expected_edges < 0)
                parse_fail(source_name, line_no, "expected 'edges <count>'");
        } else if (tag == "edge") {
            NodeId from = 0;
            GraphEdge edge;
            double raw_time = 0.0;
            if (!(fields >> from >> edge.to >> raw_time))
                parse_fail(source_name, line_no, "expected 'edge <from> <to> <seconds>'");
            edge.travel_time = static_cast<Seconds>(raw_time);
            if (static_cast<double>(edge.travel_time) != raw_time)
                parse_fail(source_name, line_no, "travel times must be integer seconds");
            if (edge.travel_time < 1)
                parse_fail(source_name, line_no, "travel times must be >= 1 second");
            edges.emplace_back(from, edge);
        } else {
            parse_fail(source_name, line_no, "unknown record '" + tag + "'");
        }
        std::string extra;
        if (fields >> extra) parse_fail(source_name, line_no, "trailing content '" + extra + "'");
    }

    if (expected_nodes >= 0 && expected_nodes != static_cast<long long>(nodes.size()))
        throw InputError(source_name + ": header declares " + std::to_string(expected_nodes) +
                         " nodes but " + std::to_string(nodes.size()) + " were given");
    if (expected_edges >= 0 && expected_edges != static_cast<long long>(edges.size()))
        throw InputError(source_name + ": header declares " + std::to_string(expected_edges) +
                         " edges but " + std::to_string(edges.size()) + " were given");

    std::sort(nodes.begin(), nodes.end(),
              [](const GraphNode& a, const GraphNode& b) { return a.id < b.id; });
    try {
        return StreetGraph(std::move(nodes), std::move(edges));
    } catch (const InputError& err) {
        throw InputError(source_name + ": " + err.what());
    }
}

double StreetGraph::coordinate_span() const {
    double best = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes_.size(); ++j) {
            double dx = nodes_[i].x - nodes_[j].x;
            double dy = nodes_[i].y - nodes_[j].y;
            best = std::max(best, std::hypot(dx, dy));
        }
    }
    return best;
}

TravelTimeOracle::TravelTimeOracle(const StreetGraph& graph)
    : graph_(&graph), reverse_adjacency_(reversed([&] {
          std::vector<std::vector<GraphEdge>> adj;
          adj.reserve(static_cast<std::size_t>(graph.node_count()));
          for (NodeId id = 1; id <= graph.node_count(); ++id) adj.push_back(graph.out_edges(id));
          return adj;
      }())) {
    from_cache_.resize(static_cast<std::size_t>(graph.node_count()));
    to_cache_.resize(static_cast<std::size_t>(graph.node_count()));
}

std::vector<Seconds> TravelTimeOracle::run_dijkstra(NodeId source, bool reverse) const {
    const int n = graph_->node_count();
    std::vector<Seconds> dist(static_cast<std::size_t>(n), std::numeric_limits<Seconds>::max());
    dist[static_cast<std::size_t>(source - 1)] = 0;
    using Item = std::pair<Seconds, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.emplace(0, source);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d != dist[static_cast<std::size_t>(u - 1)]) continue;
        const auto& edges =
            reverse ? reverse_adjacency_[static_cast<std::size_t>(u - 1)] : graph_->out_edges(u);
        for (const GraphEdge& e : edges) {
            Seconds nd = d + e.travel_time;
            Seconds& cur = dist[static_cast<std::size_t>(e.to - 1)];
            if (nd < cur) {
                cur = nd;
                heap.emplace(nd, e.to);
            }
        }
    }
    return dist;
}

const std::vector<Seconds>& TravelTimeOracle::dist_from(NodeId origin) const {
    std::lock_guard lock(mutex_);
    auto& slot = from_cache_[static_cast<std::size_t>(origin - 1)];
    if (!slot) slot = std::make_unique<std::vector<Seconds>>(run_dijkstra(origin, false));
    return *slot;
}

const std::vector<Seconds>& TravelTimeOracle::dist_to(NodeId destination) const {
    std::lock_guard lock(mutex_);
    auto& slot = to_cache_[static_cast<std::size_t>(destination - 1)];
    if (!slot) slot = std::make_unique<std::vector<Seconds>>(run_dijkstra(destination, true));
    return *slot;
}

Seconds TravelTimeOracle::time(NodeId from, NodeId to) const {
    if (!graph_->has_node(from) || !graph_->has_node(to))
        throw InternalError("travel time query for unknown node");
    if (from == to) return 0;
    return dist_from(from)[static_cast<std::size_t>(to - 1)];
}

const std::vector<NodeId>& TravelTimeOracle::path(NodeId from, NodeId to) const {
    if (!graph_->has_node(from) || !graph_->has_node(to))
        throw InternalError("path query for unknown node");
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) |
        static_cast<std::uint64_t>(static_cast<std::uint32_t>(to));
    {
        std::lock_guard lock(mutex_);
        auto it = path_cache_.find(key);
        if (it != path_cache_.end()) return *it->second;
    }

    // Walk forward choosing, among shortest-path successors, the smallest
    // node id; this yields the lexicographically smallest minimal path.
    const std::vector<Seconds>& to_target = dist_to(to);
    auto nodes = std::make_unique<std::vector<NodeId>>();
    nodes->push_back(from);
    NodeId u = from;
    while (u != to) {
        NodeId next = 0;
        for (const GraphEdge& e : graph_->out_edges(u)) {  // sorted by target id
            if (e.travel_time + to_target[static_cast<std::size_t>(e.to - 1)] ==
                to_target[static_cast<std::size_t>(u - 1)]) {
                next = e.to;
                break;
            }
        }
        if (next == 0) throw InternalError("path reconstruction failed");
        nodes->push_back(next);
        u = next;
    }

    std::lock_guard lock(mutex_);
    auto [it, inserted] = path_cache_.emplace(key, std::move(nodes));
    return *it->second;
}

Seconds TravelTimeOracle::diameter() const {
    {
        std::lock_guard lock(mutex_);
        if (diameter_ >= 0) return diameter_;
    }
    Seconds best = 0;
    for (NodeId origin = 1; origin <= graph_->node_count(); ++origin) {
        for (Seconds d : dist_from(origin)) best = std::max(best, d);
    }
    std::lock_guard lock(mutex_);
    diameter_ = best;
    return diameter_;
}

}  // namespace ridepool
