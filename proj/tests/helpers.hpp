#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here deliberately avoid the library's own shortest-path / insertion code
// paths: expected values are recomputed from first principles.

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <vector>

#include "ridepool/greedy.hpp"
#include "ridepool/network.hpp"
#include "ridepool/rng.hpp"

namespace ridepool::testing {

// ---- graph builders -------------------------------------------------------

struct EdgeSpec {
    NodeId from, to;
    Seconds time;
};

inline StreetGraph make_graph(int n, const std::vector<EdgeSpec>& edges,
                              const std::vector<std::pair<double, double>>& coords = {}) {
    std::vector<GraphNode> nodes;
    for (int i = 1; i <= n; ++i) {
        double x = i, y = 0;
        if (!coords.empty()) {
            x = coords[static_cast<std::size_t>(i - 1)].first;
            y = coords[static_cast<std::size_t>(i - 1)].second;
        }
        nodes.push_back(GraphNode{i, x, y});
    }
    std::vector<std::pair<NodeId, GraphEdge>> list;
    for (const EdgeSpec& e : edges) list.emplace_back(e.from, GraphEdge{e.to, e.time});
    return StreetGraph(std::move(nodes), std::move(list));
}

// Square grid with unit coordinates and uniform bidirectional edges;
// node id = row * width + column + 1.
inline StreetGraph make_grid(int width, int height, Seconds edge_time) {
    std::vector<GraphNode> nodes;
    std::vector<std::pair<NodeId, GraphEdge>> edges;
    auto id = [width](int x, int y) { return y * width + x + 1; };
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            nodes.push_back(GraphNode{id(x, y), static_cast<double>(x), static_cast<double>(y)});
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (x + 1 < width) {
                edges.emplace_back(id(x, y), GraphEdge{id(x + 1, y), edge_time});
                edges.emplace_back(id(x + 1, y), GraphEdge{id(x, y), edge_time});
            }
            if (y + 1 < height) {
                edges.emplace_back(id(x, y), GraphEdge{id(x, y + 1), edge_time});
                edges.emplace_back(id(x, y + 1), GraphEdge{id(x, y), edge_time});
            }
        }
    }
    return StreetGraph(std::move(nodes), std::move(edges));
}

// Random strongly connected digraph: a random cycle through all nodes plus
// extra random edges.
inline StreetGraph make_random_graph(int n, int extra_edges, Seconds max_time, Rng& rng) {
    std::vector<NodeId> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i + 1;
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
    std::vector<EdgeSpec> edges;
    for (int i = 0; i < n; ++i) {
        edges.push_back(EdgeSpec{order[static_cast<std::size_t>(i)],
                                 order[static_cast<std::size_t>((i + 1) % n)],
                                 1 + static_cast<Seconds>(rng.below(static_cast<std::uint64_t>(max_time)))});
    }
    for (int i = 0; i < extra_edges; ++i) {
        NodeId a = 1 + static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
        NodeId b = 1 + static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
        if (a == b) continue;
        edges.push_back(EdgeSpec{a, b, 1 + static_cast<Seconds>(rng.below(
                                               static_cast<std::uint64_t>(max_time)))});
    }
    std::vector<std::pair<double, double>> coords;
    for (int i = 0; i < n; ++i)
        coords.emplace_back(static_cast<double>(rng.below(1000)) / 10.0,
                            static_cast<double>(rng.below(1000)) / 10.0);
    return make_graph(n, edges, coords);
}

// ---- independent shortest-path oracle (Bellman-Ford style) ----------------

inline std::vector<Seconds> brute_force_distances(const StreetGraph& graph, NodeId source) {
    const int n = graph.node_count();
    const Seconds inf = std::numeric_limits<Seconds>::max() / 4;
    std::vector<Seconds> dist(static_cast<std::size_t>(n), inf);
    dist[static_cast<std::size_t>(source - 1)] = 0;
    for (int round = 0; round < n; ++round) {
        bool changed = false;
        for (NodeId u = 1; u <= n; ++u) {
            if (dist[static_cast<std::size_t>(u - 1)] >= inf) continue;
            for (const GraphEdge& e : graph.out_edges(u)) {
                Seconds cand = dist[static_cast<std::size_t>(u - 1)] + e.travel_time;
                if (cand < dist[static_cast<std::size_t>(e.to - 1)]) {
                    dist[static_cast<std::size_t>(e.to - 1)] = cand;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }
    return dist;
}

// ---- exhaustive insertion oracle ------------------------------------------

// Every interleaving of (pickup, dropoff) into the pending stop sequence,
// timed and validated exactly like the engine but by direct enumeration.
// Returns the minimal added cost, or nothing if no valid placement exists.
inline std::optional<Seconds> brute_force_best_insertion(const FleetState& state, RobotId robot,
                                                         const Request& request,
                                                         const ProblemConfig& config,
                                                         const TravelTimeOracle& oracle) {
    const Route& route = state.routes[static_cast<std::size_t>(robot)];
    const auto pending_span = route.pending();
    std::vector<Stop> pending(pending_span.begin(), pending_span.end());

    auto waits_of = [&](const std::vector<Stop>& stops) {
        Seconds total = 0;
        std::map<RequestId, Seconds> picks;
        for (const Stop& s : stops) {
            if (s.kind == StopKind::Pickup) picks[s.request] = s.time;
            if (s.kind == StopKind::Dropoff) {
                const Request& r = state.request(s.request);
                total += (picks.at(s.request) - r.desired_pickup_time) +
                         (s.time - (picks.at(s.request) + oracle.time(r.pickup, r.dropoff)));
            }
        }
        return total;
    };

    std::optional<Seconds> best;
    const std::size_t L = pending.size();
    for (std::size_t p = 0; p < L; ++p) {
        for (std::size_t d = p; d < L; ++d) {
            std::vector<Stop> seq;
            for (std::size_t i = 0; i < L; ++i) {
                if (i == p) seq.push_back(Stop{request.pickup, 0, StopKind::Pickup, request.id});
                if (i == d) seq.push_back(Stop{request.dropoff, 0, StopKind::Dropoff, request.id});
                seq.push_back(pending[i]);
            }
            Route candidate = replan_route(route, seq, state, oracle);
            if (!validate_route(candidate, state, config, oracle).ok()) continue;
            Seconds delta = waits_of(candidate.stops) - waits_of(route.stops);
            if (!best || delta < *best) best = delta;
        }
    }
    return best;
}

// ---- small config / day builders ------------------------------------------

inline ProblemConfig basic_config(NodeId depot, int fleet, Seconds t_end = 36000,
                                  Seconds t_last = 0) {
    ProblemConfig config;
    config.t_start = 0;
    config.t_end = t_end;
    config.t_last = t_last > 0 ? t_last : t_end / 2;
    config.w_pick = 900;
    config.w_drop = 900;
    config.capacity = 16;
    config.depots = {depot};
    config.fleet_size = fleet;
    return config;
}

inline Request make_request(RequestId id, NodeId pickup, NodeId dropoff, Seconds entry,
                            Seconds desired) {
    Request r;
    r.id = id;
    r.pickup = pickup;
    r.dropoff = dropoff;
    r.entry_time = entry;
    r.desired_pickup_time = desired;
    r.arrival_seq = static_cast<int>(id);
    return r;
}

inline DayLog make_day(std::vector<Request> requests, const std::string& date = "2024-03-04",
                       int weekday = 0, int month = 3) {
    std::stable_sort(requests.begin(), requests.end(),
                     [](const Request& a, const Request& b) {
                         return a.entry_time < b.entry_time;
                     });
    for (std::size_t i = 0; i < requests.size(); ++i)
        requests[i].arrival_seq = static_cast<int>(i);
    DayLog day;
    day.info = DayInfo{date, weekday, month};
    day.requests = std::move(requests);
    return day;
}

// The fleet-gap instance: a 5x5 unit grid (60 s edges, depot at the
// center) with three requests that make grow-on-failure sizing return a
// fleet that the same day then defeats online.
inline StreetGraph fleet_gap_grid() { return make_grid(5, 5, 60); }

inline ProblemConfig fleet_gap_config(int fleet) {
    ProblemConfig config;
    config.t_start = 0;
    config.t_end = 1800;
    config.t_last = 240;
    config.w_pick = 300;
    config.w_drop = 300;
    config.capacity = 16;
    config.depots = {13};
    config.fleet_size = fleet;
    return config;
}

inline DayLog fleet_gap_day() {
    return make_day({make_request(1, 2, 9, 60, 120), make_request(2, 11, 3, 120, 180),
                     make_request(3, 25, 23, 180, 240)});
}

}  // namespace ridepool::testing
