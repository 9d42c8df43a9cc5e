#include "ridepool/routesgen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

namespace ridepool {

namespace {

double euclidean(const RequestFeature& a, const RequestFeature& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sum);
}

struct MstEdge {
    int a, b;
    double dist;
};

std::vector<MstEdge> mutual_reachability_mst(const std::vector<RequestFeature>& points,
                                             int min_samples) {
    const int n = static_cast<int>(points.size());
    std::vector<std::vector<double>> d(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                d[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
                    euclidean(points[static_cast<std::size_t>(i)],
                              points[static_cast<std::size_t>(j)]);

    // Core distance: distance to the (min_samples - 1)-th nearest other
    // point (the point itself counts toward min_samples).
    std::vector<double> core(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(n - 1));
        for (int j = 0; j < n; ++j)
            if (j != i) row.push_back(d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        std::sort(row.begin(), row.end());
        const int k = std::min<int>(min_samples - 1, static_cast<int>(row.size())) - 1;
        core[static_cast<std::size_t>(i)] = k >= 0 ? row[static_cast<std::size_t>(k)] : 0.0;
    }

    auto mreach = [&](int i, int j) {
        return std::max({core[static_cast<std::size_t>(i)], core[static_cast<std::size_t>(j)],
                         d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]});
    };

    // Prim over the complete mutual-reachability graph.
    std::vector<MstEdge> mst;
    std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
    std::vector<double> best(static_cast<std::size_t>(n),
                             std::numeric_limits<double>::infinity());
    std::vector<int> link(static_cast<std::size_t>(n), -1);
    in_tree[0] = 1;
    for (int j = 1; j < n; ++j) {
        best[static_cast<std::size_t>(j)] = mreach(0, j);
        link[static_cast<std::size_t>(j)] = 0;
    }
    for (int step = 1; step < n; ++step) {
        int pick = -1;
        for (int j = 0; j < n; ++j) {
            if (in_tree[static_cast<std::size_t>(j)]) continue;
            if (pick == -1 || best[static_cast<std::size_t>(j)] < best[static_cast<std::size_t>(pick)])
                pick = j;
        }
        in_tree[static_cast<std::size_t>(pick)] = 1;
        mst.push_back(MstEdge{link[static_cast<std::size_t>(pick)], pick,
                              best[static_cast<std::size_t>(pick)]});
        for (int j = 0; j < n; ++j) {
            if (in_tree[static_cast<std::size_t>(j)]) continue;
            double w = mreach(pick, j);
            if (w < best[static_cast<std::size_t>(j)]) {
                best[static_cast<std::size_t>(j)] = w;
                link[static_cast<std::size_t>(j)] = pick;
            }
        }
    }
    std::sort(mst.begin(), mst.end(), [](const MstEdge& x, const MstEdge& y) {
        if (x.dist != y.dist) return x.dist < y.dist;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    return mst;
}

// Binary merge dendrogram node.
struct DendroNode {
    int left = -1, right = -1;  // children (leaf if < n, internal otherwise)
    double dist = 0.0;
    int size = 1;
};

constexpr double kMinSplitDistance = 1e-12;

// Condensed-tree cluster used for excess-of-mass selection.
struct CondensedCluster {
    double birth_lambda = 0.0;
    double stability = 0.0;
    std::vector<int> members_at_death;  // points still inside when it splits or dissolves
    std::vector<int> children;          // indices into the cluster array
};

class Condenser {
public:
    Condenser(const std::vector<DendroNode>& nodes, int n, int min_cluster_size)
        : nodes_(nodes), n_(n), mcs_(min_cluster_size) {}

    std::vector<CondensedCluster> run(int root) {
        clusters_.clear();
        build(root, 0.0);
        return std::move(clusters_);
    }

private:
    int size_of(int node) const { return node < n_ ? 1 : nodes_[static_cast<std::size_t>(node)].size; }

    void leaves_of(int node, std::vector<int>& out) const {
        if (node < n_) {
            out.push_back(node);
            return;
        }
        leaves_of(nodes_[static_cast<std::size_t>(node)].left, out);
        leaves_of(nodes_[static_cast<std::size_t>(node)].right, out);
    }

    // Walks a cluster rooted at `node` born at `birth_lambda`; returns its
    // index in clusters_.
    int build(int node, double birth_lambda) {
        const int id = static_cast<int>(clusters_.size());
        clusters_.push_back(CondensedCluster{birth_lambda, 0.0, {}, {}});

        int current = node;
        while (true) {
            if (current < n_) {
                clusters_[static_cast<std::size_t>(id)].members_at_death.push_back(current);
                break;
            }
            const DendroNode& dn = nodes_[static_cast<std::size_t>(current)];
            const double lambda = 1.0 / std::max(dn.dist, kMinSplitDistance);
            const int ls = size_of(dn.left);
            const int rs = size_of(dn.right);
            if (ls >= mcs_ && rs >= mcs_) {
                // Real split: the cluster dies, two children are born.
                std::vector<int> remaining;
                leaves_of(current, remaining);
                clusters_[static_cast<std::size_t>(id)].stability +=
                    (lambda - birth_lambda) * static_cast<double>(remaining.size());
                clusters_[static_cast<std::size_t>(id)].members_at_death = std::move(remaining);
                int lc = build(dn.left, lambda);
                int rc = build(dn.right, lambda);
                clusters_[static_cast<std::size_t>(id)].children = {lc, rc};
                break;
            }
            if (ls < mcs_ && rs < mcs_) {
                // Both sides too small: the cluster dissolves; whatever is
                // left are its members.
                std::vector<int> remaining;
                leaves_of(current, remaining);
                clusters_[static_cast<std::size_t>(id)].stability +=
                    (lambda - birth_lambda) * static_cast<double>(remaining.size());
                clusters_[static_cast<std::size_t>(id)].members_at_death = std::move(remaining);
                break;
            }
            // One side falls out as noise, the other continues the cluster.
            const int falling = ls < mcs_ ? dn.left : dn.right;
            const int continuing = ls < mcs_ ? dn.right : dn.left;
            std::vector<int> fell;
            leaves_of(falling, fell);
            clusters_[static_cast<std::size_t>(id)].stability +=
                (lambda - birth_lambda) * static_cast<double>(fell.size());
            current = continuing;
        }
        return id;
    }

    const std::vector<DendroNode>& nodes_;
    int n_;
    int mcs_;
    std::vector<CondensedCluster> clusters_;
};

// Excess-of-mass selection: keep a cluster when it is more stable than the
// sum of its selected descendants. The root is eligible, so a lone tight
// group still comes out as one cluster.
void select_eom(const std::vector<CondensedCluster>& clusters, int id,
                std::vector<char>& selected, std::vector<double>& value) {
    const CondensedCluster& c = clusters[static_cast<std::size_t>(id)];
    if (c.children.empty()) {
        selected[static_cast<std::size_t>(id)] = 1;
        value[static_cast<std::size_t>(id)] = c.stability;
        return;
    }
    double child_sum = 0.0;
    for (int ch : c.children) {
        select_eom(clusters, ch, selected, value);
        child_sum += value[static_cast<std::size_t>(ch)];
    }
    if (c.stability > child_sum) {
        selected[static_cast<std::size_t>(id)] = 1;
        value[static_cast<std::size_t>(id)] = c.stability;
    } else {
        value[static_cast<std::size_t>(id)] = child_sum;
    }
}

void collect_selected(const std::vector<CondensedCluster>& clusters, int id,
                      const std::vector<char>& selected, std::vector<std::vector<int>>& out) {
    const CondensedCluster& c = clusters[static_cast<std::size_t>(id)];
    if (selected[static_cast<std::size_t>(id)]) {
        out.push_back(c.members_at_death);
        return;
    }
    for (int ch : c.children) collect_selected(clusters, ch, selected, out);
}

}  // namespace

RequestFeature request_feature(const Request& request, const StreetGraph& graph,
                               double time_scale) {
    const GraphNode& p = graph.node(request.pickup);
    const GraphNode& d = graph.node(request.dropoff);
    return RequestFeature{p.x, p.y, d.x, d.y,
                          static_cast<double>(request.desired_pickup_time) * time_scale};
}

double feature_time_scale(const StreetGraph& graph, const ProblemConfig& config) {
    // One pickup-wait window maps to roughly one map span, so time and
    // space disagreements weigh comparably.
    const double span = graph.coordinate_span();
    if (span <= 0.0 || config.w_pick <= 0) return 0.0;
    return span / static_cast<double>(config.w_pick);
}

std::vector<int> hdbscan_labels(const std::vector<RequestFeature>& points,
                                int min_cluster_size) {
    const int n = static_cast<int>(points.size());
    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    if (n < min_cluster_size) return labels;

    const std::vector<MstEdge> mst = mutual_reachability_mst(points, min_cluster_size);

    // Merge edges in ascending distance into a binary dendrogram.
    std::vector<DendroNode> nodes;
    nodes.reserve(static_cast<std::size_t>(2 * n));
    std::vector<int> top(static_cast<std::size_t>(n));  // component root -> dendrogram node
    std::iota(top.begin(), top.end(), 0);
    std::vector<int> find_map(static_cast<std::size_t>(n));
    std::iota(find_map.begin(), find_map.end(), 0);

    std::function<int(int)> find = [&](int x) {
        while (find_map[static_cast<std::size_t>(x)] != x) {
            find_map[static_cast<std::size_t>(x)] =
                find_map[static_cast<std::size_t>(find_map[static_cast<std::size_t>(x)])];
            x = find_map[static_cast<std::size_t>(x)];
        }
        return x;
    };

    int next_node = n;
    nodes.resize(static_cast<std::size_t>(n));  // leaf placeholders (unused fields)
    for (const MstEdge& e : mst) {
        int ra = find(e.a);
        int rb = find(e.b);
        DendroNode merged;
        merged.left = top[static_cast<std::size_t>(ra)];
        merged.right = top[static_cast<std::size_t>(rb)];
        merged.dist = e.dist;
        merged.size = (merged.left < n ? 1 : nodes[static_cast<std::size_t>(merged.left)].size) +
                      (merged.right < n ? 1 : nodes[static_cast<std::size_t>(merged.right)].size);
        nodes.push_back(merged);
        find_map[static_cast<std::size_t>(rb)] = ra;
        top[static_cast<std::size_t>(ra)] = next_node;
        ++next_node;
    }
    const int root = top[static_cast<std::size_t>(find(0))];
    if (root < n) return labels;  // single point

    Condenser condenser(nodes, n, min_cluster_size);
    const std::vector<CondensedCluster> clusters = condenser.run(root);

    std::vector<char> selected(clusters.size(), 0);
    std::vector<double> value(clusters.size(), 0.0);
    select_eom(clusters, 0, selected, value);

    std::vector<std::vector<int>> groups;
    collect_selected(clusters, 0, selected, groups);

    // Points that fell out of their cluster before it died stay noise.
    std::sort(groups.begin(), groups.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) {
                  return *std::min_element(a.begin(), a.end()) <
                         *std::min_element(b.begin(), b.end());
              });
    int label = 0;
    for (const auto& group : groups) {
        if (static_cast<int>(group.size()) < min_cluster_size) continue;
        for (int p : group) labels[static_cast<std::size_t>(p)] = label;
        ++label;
    }
    return labels;
}

std::vector<int> single_linkage_labels(const std::vector<RequestFeature>& points,
                                       int min_cluster_size, double threshold) {
    const int n = static_cast<int>(points.size());
    std::vector<int> comp(static_cast<std::size_t>(n));
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (comp[static_cast<std::size_t>(x)] != x) {
            comp[static_cast<std::size_t>(x)] =
                comp[static_cast<std::size_t>(comp[static_cast<std::size_t>(x)])];
            x = comp[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (euclidean(points[static_cast<std::size_t>(i)],
                          points[static_cast<std::size_t>(j)]) <= threshold)
                comp[static_cast<std::size_t>(find(j))] = find(i);

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
    int label = 0;
    for (const auto& [rep, members] : groups) {
        if (static_cast<int>(members.size()) < min_cluster_size) continue;
        for (int p : members) labels[static_cast<std::size_t>(p)] = label;
        ++label;
    }
    return labels;
}

std::vector<std::vector<RequestId>> cluster_requests(const std::vector<const Request*>& avail,
                                                     const StreetGraph& graph,
                                                     const ProblemConfig& config,
                                                     const ClusterParams& params) {
    std::vector<std::vector<RequestId>> out;
    if (static_cast<int>(avail.size()) < params.min_cluster_size) return out;

    const double scale = feature_time_scale(graph, config);
    std::vector<RequestFeature> points;
    points.reserve(avail.size());
    for (const Request* r : avail) points.push_back(request_feature(*r, graph, scale));

    const std::vector<int> labels =
        params.algo == ClusterAlgo::Hdbscan
            ? hdbscan_labels(points, params.min_cluster_size)
            : single_linkage_labels(points, params.min_cluster_size, params.linkage_threshold);

    std::map<int, std::vector<RequestId>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= 0) groups[labels[i]].push_back(avail[i]->id);
    }
    for (auto& [label, ids] : groups) {
        std::sort(ids.begin(), ids.end());
        out.push_back(std::move(ids));
    }
    return out;
}

std::vector<FleetState> generate_promising_controls(const FleetState& state,
                                                    const Request& request, int n_routes,
                                                    const ProblemConfig& config,
                                                    const TravelTimeOracle& oracle,
                                                    const ClusterParams& params) {
    struct Candidate {
        FleetState state;
        Seconds stage_delta;
        bool is_plain;
    };
    std::vector<Candidate> candidates;

    for (RobotId m = 0; m < static_cast<RobotId>(state.routes.size()); ++m) {
        FleetState with_request = state;
        if (!with_request.has_request(request.id)) with_request.add_request(request);
        auto plain = insertion_procedure(with_request, m, request, config, oracle);
        if (!plain) continue;
        with_request.commit_route(std::move(plain->route), oracle);
        const Seconds plain_delta = with_request.wait_sum - state.wait_sum;
        candidates.push_back(Candidate{with_request, plain_delta, true});

        // Swap candidates: move a whole cluster of m's waiting requests to
        // some other robot, keeping the new request on m.
        std::vector<const Request*> avail;
        for (const Request& r : state.requests) {
            if (r.assigned == m && !r.dropped_off) avail.push_back(&r);
        }
        const auto clusters = cluster_requests(avail, oracle.graph(), config, params);
        for (const auto& cluster : clusters) {
            const bool movable = std::none_of(cluster.begin(), cluster.end(), [&](RequestId id) {
                return state.request(id).picked_up;
            });
            if (!movable) continue;

            FleetState removed = with_request;
            const Route& current = removed.routes[static_cast<std::size_t>(m)];
            std::vector<Stop> kept;
            for (const Stop& stop : current.pending()) {
                if ((stop.kind == StopKind::Pickup || stop.kind == StopKind::Dropoff) &&
                    std::binary_search(cluster.begin(), cluster.end(), stop.request))
                    continue;
                kept.push_back(stop);
            }
            Route shrunk = replan_route(current, kept, removed, oracle);
            if (!validate_route(shrunk, removed, config, oracle).ok()) continue;
            removed.commit_route(std::move(shrunk), oracle);

            std::vector<RequestId> ordered(cluster.begin(), cluster.end());
            std::sort(ordered.begin(), ordered.end(), [&](RequestId a, RequestId b) {
                const Request& ra = removed.request(a);
                const Request& rb = removed.request(b);
                if (ra.desired_pickup_time != rb.desired_pickup_time)
                    return ra.desired_pickup_time < rb.desired_pickup_time;
                return a < b;
            });

            for (RobotId k = 0; k < static_cast<RobotId>(state.routes.size()); ++k) {
                if (k == m) continue;
                FleetState swapped = removed;
                bool ok = true;
                for (RequestId id : ordered) {
                    auto ins = insertion_procedure(swapped, k, swapped.request(id), config, oracle);
                    if (!ins) {
                        ok = false;
                        break;
                    }
                    swapped.commit_route(std::move(ins->route), oracle);
                }
                if (!ok) continue;
                const Seconds delta = swapped.wait_sum - state.wait_sum;
                candidates.push_back(Candidate{std::move(swapped), delta, false});
            }
        }
    }

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         return a.stage_delta < b.stage_delta;
                     });

    // Truncate, but never drop the greedy (cheapest plain-insertion)
    // control: rollout's candidate set must contain the base policy's
    // choice for the cost-improvement property to hold.
    std::size_t keep = std::min<std::size_t>(candidates.size(),
                                             static_cast<std::size_t>(std::max(1, n_routes)));
    std::size_t best_plain = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].is_plain) {
            best_plain = i;
            break;
        }
    }
    std::vector<FleetState> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.push_back(std::move(candidates[i].state));
    if (best_plain != candidates.size() && best_plain >= keep && keep > 0) {
        out.back() = std::move(candidates[best_plain].state);
    }
    return out;
}

}  // namespace ridepool
