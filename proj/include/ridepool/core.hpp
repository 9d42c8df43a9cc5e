#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ridepool/network.hpp"
#include "ridepool/types.hpp"

namespace ridepool {

// A pickup-and-delivery task. Planned times mirror the stops of the
// assigned robot's route and are refreshed whenever that route changes.
struct Request {
    RequestId id = 0;
    NodeId pickup = 0;
    NodeId dropoff = 0;
    Seconds entry_time = 0;
    Seconds desired_pickup_time = 0;
    RobotId assigned = kUnassigned;
    Seconds planned_pickup = kUnsetTime;
    Seconds planned_dropoff = kUnsetTime;
    bool picked_up = false;
    bool dropped_off = false;
    bool synthetic = false;  // sampled future request, only ever lives in clones
    int arrival_seq = 0;     // position in the day log; breaks ordering ties
};

// Waypoint marks the committed position a re-plan started from (a robot
// that is already driving must finish its current edge); it carries no
// passenger action and always sits in the executed prefix.
enum class StopKind : std::uint8_t { DepotStart, Pickup, Dropoff, DepotEnd, Waypoint };

struct Stop {
    NodeId node = 0;
    Seconds time = 0;  // scheduled service time (arrival, or desired pickup if later)
    StopKind kind = StopKind::DepotStart;
    RequestId request = -1;
};

// A robot's day plan: stop sequence scheduled on the time-expanded graph.
// stops.front() is DepotStart at T_start and stops.back() is DepotEnd with
// the planned return time. The executed prefix is immutable; between stops
// the robot follows the oracle's shortest path.
struct Route {
    RobotId robot = 0;
    NodeId depot = 0;
    std::vector<Stop> stops;
    std::size_t traversed = 1;  // stops executed so far (DepotStart counts)

    std::span<const Stop> pending() const {
        return std::span<const Stop>(stops).subspan(traversed);
    }
    const Stop& last_executed() const { return stops[traversed - 1]; }
    bool idle() const { return stops.size() - traversed == 1; }
};

struct ProblemConfig {
    Seconds t_start = 0;
    Seconds t_end = 0;
    Seconds t_last = 0;
    Seconds w_pick = 900;
    Seconds w_drop = 900;
    int capacity = 16;
    std::vector<NodeId> depots;
    int fleet_size = 3;

    // Checks field ranges plus the buffer-time requirement
    // t_end - t_last >= 3 * diameter (enough slack to reach any pickup,
    // drive any trip, and return to a depot).
    void validate(const TravelTimeOracle& oracle) const;
    // Every node within w_pick of some depot; required by fleet sizing.
    bool depots_cover_graph(const TravelTimeOracle& oracle) const;
};

struct WaitTimes {
    Seconds pick = 0;
    Seconds drop = 0;
    bool rejected = false;  // conceptually (inf, inf)
};

// Snapshot of the whole fleet at one instant. Value semantics: copying
// yields an independent state, which is how candidate controls and rollout
// simulations are represented.
class FleetState {
public:
    Seconds now = 0;
    std::vector<Route> routes;
    std::vector<NodeId> locations;  // per robot, last node reached
    std::vector<int> loads;         // passengers on board
    std::vector<Request> requests;  // every request entered so far
    std::vector<RequestId> rejected;
    Seconds wait_sum = 0;  // finite part of the immediate cost

    static FleetState initial(const ProblemConfig& config);

    bool has_request(RequestId id) const { return index_.count(id) != 0; }
    Request& request(RequestId id);
    const Request& request(RequestId id) const;
    void add_request(const Request& request);
    void mark_rejected(RequestId id);

    // Replaces one robot's route and refreshes the planned times (and the
    // wait sum) of every request scheduled on it.
    void commit_route(Route new_route, const TravelTimeOracle& oracle);

    std::vector<RequestId> assignments(RobotId robot) const;

private:
    std::unordered_map<RequestId, std::size_t> index_;
};

WaitTimes wait_times(const FleetState& state, RequestId id, const TravelTimeOracle& oracle);

// Eq-style immediate cost: sum of both wait components over all entered
// requests, unbounded as soon as anything was rejected.
Cost immediate_cost(const FleetState& state);

// h(next) - h(prev); at the first step of the horizon the cost is h(next)
// alone (h of the start state is zero by definition there anyway).
Cost stage_cost(const FleetState& prev, const FleetState& next, const ProblemConfig& config);

enum class RouteViolation {
    None,
    BadEndpoints,
    TimeOrder,
    TravelTime,
    PickupBeforeDesired,
    PrecedenceOrder,
    Capacity,
    WaitPickExceeded,
    WaitDropExceeded,
    LateDepotReturn,
};

struct RouteCheck {
    RouteViolation violation = RouteViolation::None;
    int stop_index = -1;
    std::string detail;

    bool ok() const { return violation == RouteViolation::None; }
};

RouteCheck validate_route(const Route& route, const FleetState& state,
                          const ProblemConfig& config, const TravelTimeOracle& oracle);

// The robot's next committed position at `now`: the current node if it sits
// at one, otherwise the head of the edge it is traversing (an edge, once
// entered, is always finished).
std::pair<NodeId, Seconds> route_anchor(const Route& route, Seconds now,
                                        const TravelTimeOracle& oracle);

// Last node reached by time `now`.
NodeId position_at(const Route& route, Seconds now, const TravelTimeOracle& oracle);

// Rebuilds stop times for a pending stop sequence: consecutive stops are
// connected by shortest paths, and a robot reaching a pickup early waits
// there until the desired pickup time.
void retime_pending(std::vector<Stop>& pending, NodeId anchor_node, Seconds anchor_time,
                    const FleetState& state, const TravelTimeOracle& oracle);

// Replaces a route's pending stops with `pending` (times are recomputed):
// keeps the executed prefix, anchors at the robot's committed position and
// records that position as a traversed waypoint.
Route replan_route(const Route& route, std::vector<Stop> pending, const FleetState& state,
                   const TravelTimeOracle& oracle);

// Advances the clock one second, executing any stop scheduled at the new
// time (advance_to jumps over quiet stretches; same effect).
void advance(FleetState& state, const TravelTimeOracle& oracle);
void advance_to(FleetState& state, Seconds t, const TravelTimeOracle& oracle);

// Requests are served in ascending desired pickup time; ties fall back to
// log order, then id. Scheduled requests sort ahead via entry time.
void canonical_order(std::vector<Request>& batch);

struct DayInfo {
    std::string date;  // YYYY-MM-DD
    int weekday = 0;   // 0 = Monday .. 6 = Sunday
    int month = 1;     // 1..12
};

struct DayLog {
    DayInfo info;
    std::vector<Request> requests;  // sorted by entry time
};

// Arrival batches for replay: one (time, requests) pair per entry second,
// requests in canonical order; scheduled requests join the t_start batch
// ahead of that second's real-time arrivals.
std::vector<std::pair<Seconds, std::vector<Request>>> arrival_batches(
    const DayLog& day, const ProblemConfig& config);

DayLog load_day_log(const std::string& path, const ProblemConfig& config);
DayLog parse_day_log(std::istream& in, const std::string& source_name,
                     const ProblemConfig& config);
void write_day_log(const DayLog& log, const std::string& path);

}  // namespace ridepool
