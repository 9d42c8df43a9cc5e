#pragma once

#include <array>

#include "ridepool/greedy.hpp"

namespace ridepool {

enum class ClusterAlgo { Hdbscan, SingleLinkage };

struct ClusterParams {
    int min_cluster_size = 2;
    ClusterAlgo algo = ClusterAlgo::Hdbscan;
    double linkage_threshold = 1.0;  // single-linkage fallback only
};

// Feature vector fed to the clustering: pickup and drop-off coordinates
// plus the desired pickup time, scaled so one pickup-wait window spans
// about one map width.
using RequestFeature = std::array<double, 5>;

RequestFeature request_feature(const Request& request, const StreetGraph& graph,
                               double time_scale);

double feature_time_scale(const StreetGraph& graph, const ProblemConfig& config);

// Density-based hierarchical clustering (mutual-reachability distances,
// minimum spanning tree, cluster-stability extraction). Returns per-point
// labels; -1 marks noise. Labels are assigned in order of first member.
std::vector<int> hdbscan_labels(const std::vector<RequestFeature>& points, int min_cluster_size);

std::vector<int> single_linkage_labels(const std::vector<RequestFeature>& points,
                                       int min_cluster_size, double threshold);

// Groups one robot's not-yet-dropped-off requests into swap candidates.
// Clusters smaller than the minimum never form; noise stays unclustered.
std::vector<std::vector<RequestId>> cluster_requests(const std::vector<const Request*>& avail,
                                                     const StreetGraph& graph,
                                                     const ProblemConfig& config,
                                                     const ClusterParams& params);

// The candidate-control builder: for every robot with a valid plain
// insertion of `request`, emit that control, then for each valid cluster of
// the robot's un-picked-up requests emit one control per other robot that
// can absorb the whole cluster (freeing the first robot). Controls come
// back sorted by stage cost, truncated to n_routes; the plain greedy
// control always survives the truncation.
std::vector<FleetState> generate_promising_controls(const FleetState& state,
                                                    const Request& request, int n_routes,
                                                    const ProblemConfig& config,
                                                    const TravelTimeOracle& oracle,
                                                    const ClusterParams& params);

}  // namespace ridepool
