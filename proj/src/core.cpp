#include "ridepool/core.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace ridepool {

namespace {

// Wait-time contribution of one assigned request, from its planned times.
Seconds wait_contribution(const Request& r, const TravelTimeOracle& oracle) {
    if (r.assigned == kUnassigned || r.planned_pickup == kUnsetTime) return 0;
    Seconds w_pick = r.planned_pickup - r.desired_pickup_time;
    Seconds w_drop = r.planned_dropoff - (r.planned_pickup + oracle.time(r.pickup, r.dropoff));
    return w_pick + w_drop;
}

}  // namespace

void ProblemConfig::validate(const TravelTimeOracle& oracle) const {
    if (!(t_start < t_last && t_last < t_end))
        throw ConfigError("need t_start < t_last < t_end");
    if (w_pick <= 0 || w_drop <= 0) throw ConfigError("wait-time limits must be positive");
    if (capacity < 1) throw ConfigError("capacity must be at least 1");
    if (fleet_size < 0) throw ConfigError("fleet size must be non-negative");
    if (depots.empty()) throw ConfigError("at least one depot is required");
    for (NodeId depot : depots) {
        if (!oracle.graph().has_node(depot))
            throw ConfigError("depot node " + std::to_string(depot) + " does not exist");
    }
    const Seconds buffer = 3 * oracle.diameter();
    if (t_end - t_last < buffer)
        throw ConfigError("t_end - t_last must be at least three graph diameters (" +
                          std::to_string(buffer) + " s) so late requests can still be served");
}

bool ProblemConfig::depots_cover_graph(const TravelTimeOracle& oracle) const {
    for (NodeId node = 1; node <= oracle.graph().node_count(); ++node) {
        bool covered = false;
        for (NodeId depot : depots) {
            if (oracle.time(depot, node) <= w_pick) {
                covered = true;
                break;
            }
        }
        if (!covered) return false;
    }
    return true;
}

FleetState FleetState::initial(const ProblemConfig& config) {
    if (config.depots.empty()) throw ConfigError("cannot build a fleet without depots");
    FleetState state;
    state.now = config.t_start;
    state.routes.reserve(static_cast<std::size_t>(config.fleet_size));
    for (int m = 0; m < config.fleet_size; ++m) {
        NodeId depot = config.depots[static_cast<std::size_t>(m) % config.depots.size()];
        Route route;
        route.robot = m;
        route.depot = depot;
        route.stops = {Stop{depot, config.t_start, StopKind::DepotStart, -1},
                       Stop{depot, config.t_start, StopKind::DepotEnd, -1}};
        route.traversed = 1;
        state.routes.push_back(std::move(route));
        state.locations.push_back(depot);
        state.loads.push_back(0);
    }
    return state;
}

Request& FleetState::request(RequestId id) {
    auto it = index_.find(id);
    if (it == index_.end()) throw InputError("unknown request id " + std::to_string(id));
    return requests[it->second];
}

const Request& FleetState::request(RequestId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw InputError("unknown request id " + std::to_string(id));
    return requests[it->second];
}

void FleetState::add_request(const Request& request) {
    if (index_.count(request.id))
        throw InputError("duplicate request id " + std::to_string(request.id));
    index_.emplace(request.id, requests.size());
    requests.push_back(request);
}

void FleetState::mark_rejected(RequestId id) {
    Request& r = request(id);
    r.assigned = kUnassigned;
    r.planned_pickup = kUnsetTime;
    r.planned_dropoff = kUnsetTime;
    rejected.push_back(id);
}

void FleetState::commit_route(Route new_route, const TravelTimeOracle& oracle) {
    Route& slot = routes[static_cast<std::size_t>(new_route.robot)];

    // Requests touched by either version of the route.
    auto touch = [&](const Route& route, std::vector<RequestId>& out) {
        for (const Stop& stop : route.stops) {
            if (stop.kind == StopKind::Pickup) out.push_back(stop.request);
        }
    };
    std::vector<RequestId> affected;
    touch(slot, affected);
    touch(new_route, affected);
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());

    for (RequestId id : affected) wait_sum -= wait_contribution(request(id), oracle);

    slot = std::move(new_route);
    std::vector<RequestId> on_new;
    for (const Stop& stop : slot.stops) {
        if (stop.kind == StopKind::Pickup) {
            Request& r = request(stop.request);
            r.assigned = slot.robot;
            r.planned_pickup = stop.time;
            on_new.push_back(stop.request);
        } else if (stop.kind == StopKind::Dropoff) {
            request(stop.request).planned_dropoff = stop.time;
        }
    }

    // Requests that were on the old route but not on the new one have been
    // removed (cluster swap); they lose their assignment until re-inserted.
    for (RequestId id : affected) {
        Request& r = request(id);
        if (r.assigned == slot.robot &&
            std::find(on_new.begin(), on_new.end(), id) == on_new.end()) {
            r.assigned = kUnassigned;
            r.planned_pickup = kUnsetTime;
            r.planned_dropoff = kUnsetTime;
        }
    }

    for (RequestId id : affected) wait_sum += wait_contribution(request(id), oracle);
}

std::vector<RequestId> FleetState::assignments(RobotId robot) const {
    std::vector<RequestId> out;
    for (const Request& r : requests) {
        if (r.assigned == robot) out.push_back(r.id);
    }
    return out;
}

WaitTimes wait_times(const FleetState& state, RequestId id, const TravelTimeOracle& oracle) {
    const Request& r = state.request(id);
    if (std::find(state.rejected.begin(), state.rejected.end(), id) != state.rejected.end())
        return WaitTimes{0, 0, true};
    if (r.assigned == kUnassigned || r.planned_pickup == kUnsetTime) return WaitTimes{0, 0, false};
    WaitTimes w;
    w.pick = r.planned_pickup - r.desired_pickup_time;
    w.drop = r.planned_dropoff - (r.planned_pickup + oracle.time(r.pickup, r.dropoff));
    return w;
}

Cost immediate_cost(const FleetState& state) {
    return Cost{state.wait_sum, !state.rejected.empty()};
}

Cost stage_cost(const FleetState& prev, const FleetState& next, const ProblemConfig& config) {
    if (next.now != prev.now + 1)
        throw InternalError("stage cost needs consecutive states (got " +
                            std::to_string(prev.now) + " -> " + std::to_string(next.now) + ")");
    Cost h_next = immediate_cost(next);
    if (prev.now == config.t_start) return h_next;
    Cost h_prev = immediate_cost(prev);
    return Cost{h_next.waits - h_prev.waits, h_next.unbounded};
}

RouteCheck validate_route(const Route& route, const FleetState& state,
                          const ProblemConfig& config, const TravelTimeOracle& oracle) {
    auto fail = [](RouteViolation v, int index, std::string detail) {
        return RouteCheck{v, index, std::move(detail)};
    };
    const auto& stops = route.stops;
    if (stops.size() < 2 || stops.front().kind != StopKind::DepotStart ||
        stops.back().kind != StopKind::DepotEnd || stops.front().node != route.depot ||
        stops.back().node != route.depot || stops.front().time != config.t_start)
        return fail(RouteViolation::BadEndpoints, 0, "route must start and end at its depot");
    if (stops.back().time > config.t_end)
        return fail(RouteViolation::LateDepotReturn, static_cast<int>(stops.size()) - 1,
                    "depot return after t_end");

    int load = 0;
    for (std::size_t i = 0; i < stops.size(); ++i) {
        const Stop& stop = stops[i];
        if (i > 0) {
            const Stop& prev = stops[i - 1];
            if (stop.time < prev.time || (stop.time == prev.time && stop.node != prev.node))
                return fail(RouteViolation::TimeOrder, static_cast<int>(i),
                            "stop times must advance");
            if (stop.time - prev.time < oracle.time(prev.node, stop.node))
                return fail(RouteViolation::TravelTime, static_cast<int>(i),
                            "consecutive stops closer in time than the shortest path");
        }
        if (stop.kind == StopKind::Pickup) {
            if (stop.time < state.request(stop.request).desired_pickup_time)
                return fail(RouteViolation::PickupBeforeDesired, static_cast<int>(i),
                            "pickup scheduled before the desired time");
            if (++load > config.capacity)
                return fail(RouteViolation::Capacity, static_cast<int>(i),
                            "load exceeds capacity");
        } else if (stop.kind == StopKind::Dropoff) {
            --load;
        }
    }

    // Pickup precedes dropoff for every request on the route, and wait-time
    // limits hold.
    std::unordered_map<RequestId, std::size_t> pick_at;
    for (std::size_t i = 0; i < stops.size(); ++i) {
        const Stop& stop = stops[i];
        if (stop.kind == StopKind::Pickup) {
            pick_at[stop.request] = i;
        } else if (stop.kind == StopKind::Dropoff) {
            auto it = pick_at.find(stop.request);
            if (it == pick_at.end())
                return fail(RouteViolation::PrecedenceOrder, static_cast<int>(i),
                            "dropoff before pickup");
            const Request& r = state.request(stop.request);
            Seconds w_pick = stops[it->second].time - r.desired_pickup_time;
            Seconds w_drop =
                stop.time - (stops[it->second].time + oracle.time(r.pickup, r.dropoff));
            if (w_pick > config.w_pick)
                return fail(RouteViolation::WaitPickExceeded, static_cast<int>(it->second),
                            "pickup wait above the limit for request " +
                                std::to_string(stop.request));
            if (w_drop > config.w_drop)
                return fail(RouteViolation::WaitDropExceeded, static_cast<int>(i),
                            "on-board wait above the limit for request " +
                                std::to_string(stop.request));
        }
    }
    return RouteCheck{};
}

std::pair<NodeId, Seconds> route_anchor(const Route& route, Seconds now,
                                        const TravelTimeOracle& oracle) {
    const Stop& prev = route.last_executed();
    if (route.traversed >= route.stops.size()) return {prev.node, std::max(now, prev.time)};
    const Stop& next = route.stops[route.traversed];
    if (now <= prev.time || prev.node == next.node) return {prev.node, std::max(now, prev.time)};

    const std::vector<NodeId>& nodes = oracle.path(prev.node, next.node);
    Seconds t = prev.time;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        Seconds arrive = t + oracle.time(nodes[i - 1], nodes[i]);
        if (now < arrive) return {nodes[i], arrive};  // mid-edge: finish the edge
        if (now == arrive) return {nodes[i], now};
        t = arrive;
    }
    return {next.node, now};  // waiting at the next stop's node
}

NodeId position_at(const Route& route, Seconds now, const TravelTimeOracle& oracle) {
    const Stop& prev = route.last_executed();
    if (route.traversed >= route.stops.size() || now <= prev.time) return prev.node;
    const Stop& next = route.stops[route.traversed];
    if (prev.node == next.node) return prev.node;
    const std::vector<NodeId>& nodes = oracle.path(prev.node, next.node);
    Seconds t = prev.time;
    NodeId at = prev.node;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        t += oracle.time(nodes[i - 1], nodes[i]);
        if (t > now) break;
        at = nodes[i];
    }
    return at;
}

void retime_pending(std::vector<Stop>& pending, NodeId anchor_node, Seconds anchor_time,
                    const FleetState& state, const TravelTimeOracle& oracle) {
    NodeId node = anchor_node;
    Seconds t = anchor_time;
    for (Stop& stop : pending) {
        Seconds arrive = t + oracle.time(node, stop.node);
        if (stop.kind == StopKind::Pickup) {
            stop.time = std::max(arrive, state.request(stop.request).desired_pickup_time);
        } else {
            stop.time = arrive;
        }
        node = stop.node;
        t = stop.time;
    }
}

Route replan_route(const Route& route, std::vector<Stop> pending, const FleetState& state,
                   const TravelTimeOracle& oracle) {
    const auto [anchor_node, anchor_time] = route_anchor(route, state.now, oracle);
    retime_pending(pending, anchor_node, anchor_time, state, oracle);

    Route result;
    result.robot = route.robot;
    result.depot = route.depot;
    result.stops.assign(route.stops.begin(),
                        route.stops.begin() + static_cast<long>(route.traversed));
    result.traversed = route.traversed;
    const Stop& prev = result.stops.back();
    if (prev.node != anchor_node || prev.time != anchor_time) {
        result.stops.push_back(Stop{anchor_node, anchor_time, StopKind::Waypoint, -1});
        ++result.traversed;
    }
    result.stops.insert(result.stops.end(), pending.begin(), pending.end());
    return result;
}

void advance_to(FleetState& state, Seconds t, const TravelTimeOracle& oracle) {
    if (t < state.now) throw InternalError("advance_to cannot move time backwards");
    for (std::size_t m = 0; m < state.routes.size(); ++m) {
        Route& route = state.routes[m];
        while (route.traversed < route.stops.size()) {
            const Stop& stop = route.stops[route.traversed];
            if (stop.kind == StopKind::DepotEnd || stop.time > t) break;
            if (stop.kind == StopKind::Pickup) {
                Request& r = state.request(stop.request);
                if (r.picked_up)
                    throw InternalError("request " + std::to_string(r.id) + " picked up twice");
                r.picked_up = true;
                ++state.loads[m];
            } else if (stop.kind == StopKind::Dropoff) {
                Request& r = state.request(stop.request);
                if (!r.picked_up || r.dropped_off)
                    throw InternalError("request " + std::to_string(r.id) +
                                        " dropped off out of order");
                r.dropped_off = true;
                if (--state.loads[m] < 0)
                    throw InternalError("robot " + std::to_string(route.robot) +
                                        " load went negative");
            }
            ++route.traversed;
        }
        state.locations[m] = position_at(route, t, oracle);
    }
    state.now = t;
}

void advance(FleetState& state, const TravelTimeOracle& oracle) {
    advance_to(state, state.now + 1, oracle);
}

void canonical_order(std::vector<Request>& batch) {
    std::stable_sort(batch.begin(), batch.end(), [](const Request& a, const Request& b) {
        if (a.desired_pickup_time != b.desired_pickup_time)
            return a.desired_pickup_time < b.desired_pickup_time;
        if (a.arrival_seq != b.arrival_seq) return a.arrival_seq < b.arrival_seq;
        return a.id < b.id;
    });
}

std::vector<std::pair<Seconds, std::vector<Request>>> arrival_batches(
    const DayLog& day, const ProblemConfig& config) {
    std::vector<Request> scheduled;
    std::map<Seconds, std::vector<Request>> by_time;
    for (const Request& r : day.requests) {
        if (r.entry_time < config.t_start) {
            scheduled.push_back(r);
        } else {
            by_time[r.entry_time].push_back(r);
        }
    }
    canonical_order(scheduled);
    std::vector<Request> first = std::move(scheduled);
    if (auto it = by_time.find(config.t_start); it != by_time.end()) {
        canonical_order(it->second);
        first.insert(first.end(), it->second.begin(), it->second.end());
        by_time.erase(it);
    }
    std::vector<std::pair<Seconds, std::vector<Request>>> out;
    out.emplace_back(config.t_start, std::move(first));
    for (auto& [t, batch] : by_time) {
        canonical_order(batch);
        out.emplace_back(t, std::move(batch));
    }
    return out;
}

DayLog load_day_log(const std::string& path, const ProblemConfig& config) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open request log: " + path);
    return parse_day_log(in, path, config);
}

DayLog parse_day_log(std::istream& in, const std::string& source_name,
                     const ProblemConfig& config) {
    DayLog log;
    std::string line;
    int line_no = 0;
    int seq = 0;
    Seconds last_entry = std::numeric_limits<Seconds>::min();
    std::unordered_map<RequestId, int> seen;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        std::istringstream fields{std::string(view)};
        std::string tag;
        if (!(fields >> tag)) continue;
        auto fail = [&](const std::string& what) -> void {
            throw InputError(source_name + ":" + std::to_string(line_no) + ": " + what);
        };
        if (tag == "day") {
            if (!(fields >> log.info.date >> log.info.weekday >> log.info.month))
                fail("expected 'day <date> <weekday> <month>'");
            if (log.info.weekday < 0 || log.info.weekday > 6) fail("weekday must be 0..6");
            if (log.info.month < 1 || log.info.month > 12) fail("month must be 1..12");
        } else if (tag == "request") {
            Request r;
            if (!(fields >> r.id >> r.entry_time >> r.desired_pickup_time >> r.pickup >>
                  r.dropoff))
                fail("expected 'request <id> <entry> <desired> <pickup> <dropoff>'");
            if (seen.count(r.id)) fail("duplicate request id " + std::to_string(r.id));
            seen.emplace(r.id, line_no);
            if (r.entry_time >= r.desired_pickup_time)
                fail("entry time must precede the desired pickup time");
            if (r.desired_pickup_time > config.t_last)
                fail("desired pickup time after t_last (" + std::to_string(config.t_last) + ")");
            if (r.desired_pickup_time < config.t_start)
                fail("desired pickup time before t_start");
            if (r.pickup == r.dropoff) fail("pickup and dropoff must differ");
            if (r.entry_time < last_entry) fail("requests must be sorted by entry time");
            last_entry = r.entry_time;
            r.arrival_seq = seq++;
            log.requests.push_back(r);
        } else {
            fail("unknown record '" + tag + "'");
        }
    }
    return log;
}

void write_day_log(const DayLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write request log: " + path);
    out << "day " << log.info.date << ' ' << log.info.weekday << ' ' << log.info.month << '\n';
    for (const Request& r : log.requests) {
        out << "request " << r.id << ' ' << r.entry_time << ' ' << r.desired_pickup_time << ' '
            << r.pickup << ' ' << r.dropoff << '\n';
    }
}

}  // namespace ridepool
