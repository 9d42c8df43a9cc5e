#include "ridepool/fleetsize.hpp"

#include <algorithm>

namespace ridepool {

namespace {

void add_idle_robot(FleetState& state, NodeId depot, const ProblemConfig& config) {
    Route route;
    route.robot = static_cast<RobotId>(state.routes.size());
    route.depot = depot;
    route.stops = {Stop{depot, config.t_start, StopKind::DepotStart, -1},
                   Stop{depot, config.t_start, StopKind::DepotEnd, -1}};
    route.traversed = 1;
    state.routes.push_back(std::move(route));
    state.locations.push_back(depot);
    state.loads.push_back(0);
}

NodeId depot_nearest(NodeId pickup, const ProblemConfig& config, const TravelTimeOracle& oracle) {
    NodeId best = config.depots.front();
    Seconds best_time = oracle.time(best, pickup);
    for (NodeId depot : config.depots) {
        Seconds t = oracle.time(depot, pickup);
        if (t < best_time || (t == best_time && depot < best)) {
            best = depot;
            best_time = t;
        }
    }
    return best;
}

}  // namespace

std::vector<RequestId> replay_day_greedy(const DayLog& day, int fleet,
                                         const ProblemConfig& config,
                                         const TravelTimeOracle& oracle) {
    ProblemConfig day_config = config;
    day_config.fleet_size = fleet;
    FleetState state = FleetState::initial(day_config);
    for (auto& [t, batch] : arrival_batches(day, config)) {
        advance_to(state, t, oracle);
        for (const Request& r : batch) {
            state.add_request(r);
            if (!greedy_assign_inplace(state, r.id, config, oracle)) state.mark_rejected(r.id);
        }
    }
    return state.rejected;
}

FleetSizingReport single_pass(const std::vector<DayLog>& history, const ProblemConfig& config,
                              const TravelTimeOracle& oracle) {
    if (history.empty()) throw InputError("fleet sizing needs at least one day of history");
    FleetSizingReport report;
    report.algorithm = "single-pass";
    report.fleet = 1;
    for (const DayLog& day : history) {
        ProblemConfig day_config = config;
        day_config.fleet_size = 1;
        FleetState state = FleetState::initial(day_config);
        for (auto& [t, batch] : arrival_batches(day, config)) {
            advance_to(state, t, oracle);
            for (const Request& r : batch) {
                state.add_request(r);
                if (greedy_assign_inplace(state, r.id, config, oracle)) continue;
                // Grow the fleet by one robot at the depot covering the
                // failed pickup and retry immediately.
                add_idle_robot(state, depot_nearest(r.pickup, config, oracle), config);
                if (!greedy_assign_inplace(state, r.id, config, oracle))
                    throw ConfigError(
                        "request " + std::to_string(r.id) + " on day " + day.info.date +
                        " cannot be served even by a fresh robot; depots do not cover the "
                        "graph within the pickup wait limit");
            }
        }
        report.per_day.push_back(DaySizing{day.info.date, static_cast<int>(state.routes.size())});
        report.fleet = std::max(report.fleet, static_cast<int>(state.routes.size()));
    }
    return report;
}

FleetSizingReport restart_and_optimize(const std::vector<DayLog>& history, int m_max,
                                       const ProblemConfig& config,
                                       const TravelTimeOracle& oracle) {
    if (history.empty()) throw InputError("fleet sizing needs at least one day of history");
    if (m_max < 1) throw ConfigError("m_max must be at least 1");
    FleetSizingReport report;
    report.algorithm = "restart-and-optimize";
    report.m_max = m_max;
    report.fleet = 1;
    for (const DayLog& day : history) {
        int found = 0;
        for (int size = 1; size <= m_max; ++size) {
            if (replay_day_greedy(day, size, config, oracle).empty()) {
                found = size;
                break;
            }
        }
        if (found == 0)
            throw InfeasibleError("day " + day.info.date + " still has rejections at m_max=" +
                                  std::to_string(m_max));
        report.per_day.push_back(DaySizing{day.info.date, found});
        report.fleet = std::max(report.fleet, found);
    }
    return report;
}

std::vector<int> verify_stability(int fleet, const std::vector<DayLog>& days,
                                  const DayRunner& runner) {
    std::vector<int> rejections;
    rejections.reserve(days.size());
    for (const DayLog& day : days) rejections.push_back(runner(day, fleet));
    return rejections;
}

}  // namespace ridepool
