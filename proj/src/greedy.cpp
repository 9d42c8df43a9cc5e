#include "ridepool/greedy.hpp"

#include <algorithm>
#include <unordered_map>

namespace ridepool {

namespace {

// One stop of a virtual (not yet materialized) pending sequence.
struct WalkStop {
    NodeId node;
    StopKind kind;
    RequestId request;
};

// Times a pending sequence from the anchor and accumulates the wait costs,
// rejecting it as soon as a capacity, wait-cap or depot-return constraint
// breaks. Requests already picked up contribute their frozen pickup wait.
// Equivalent to retiming plus validate_route, without building the route.
class PendingWalk {
public:
    PendingWalk(const FleetState& state, const ProblemConfig& config,
                const TravelTimeOracle& oracle, NodeId anchor_node, Seconds anchor_time,
                int load)
        : state_(state), config_(config), oracle_(oracle), node_(anchor_node),
          time_(anchor_time), load_(load) {}

    bool push(const WalkStop& stop) {
        Seconds arrive = time_ + oracle_.time(node_, stop.node);
        node_ = stop.node;
        switch (stop.kind) {
            case StopKind::Pickup: {
                const Request& r = state_.request(stop.request);
                time_ = std::max(arrive, r.desired_pickup_time);
                const Seconds wait = time_ - r.desired_pickup_time;
                if (wait > config_.w_pick) return false;
                if (++load_ > config_.capacity) return false;
                waits_ += wait;
                pick_times_.emplace_back(stop.request, time_);
                break;
            }
            case StopKind::Dropoff: {
                const Request& r = state_.request(stop.request);
                time_ = arrive;
                Seconds picked = r.picked_up ? r.planned_pickup : kUnsetTime;
                for (auto it = pick_times_.rbegin(); it != pick_times_.rend(); ++it) {
                    if (it->first == stop.request) {
                        picked = it->second;
                        break;
                    }
                }
                if (picked == kUnsetTime)
                    throw InternalError("dropoff walked before its pickup");
                const Seconds wait = time_ - (picked + oracle_.time(r.pickup, r.dropoff));
                if (wait > config_.w_drop) return false;
                --load_;
                waits_ += wait;
                break;
            }
            case StopKind::DepotEnd:
                time_ = arrive;
                if (time_ > config_.t_end) return false;
                break;
            default:
                time_ = arrive;
                break;
        }
        return true;
    }

    Seconds waits() const { return waits_; }

private:
    const FleetState& state_;
    const ProblemConfig& config_;
    const TravelTimeOracle& oracle_;
    NodeId node_;
    Seconds time_;
    int load_;
    Seconds waits_ = 0;
    // Small sequences: linear scan beats a map here.
    std::vector<std::pair<RequestId, Seconds>> pick_times_;
};

// Frozen pickup waits of already-picked-up requests whose dropoff is still
// pending; they cancel out in cost deltas but belong to the route's total.
Seconds current_load(const FleetState& state, RobotId robot) {
    return state.loads[static_cast<std::size_t>(robot)];
}

}  // namespace

std::optional<InsertionCandidate> insertion_procedure(const FleetState& state, RobotId robot,
                                                      const Request& request,
                                                      const ProblemConfig& config,
                                                      const TravelTimeOracle& oracle) {
    if (!state.has_request(request.id))
        throw InternalError("insertion requires the request to be entered in the state");
    const Route& route = state.routes[static_cast<std::size_t>(robot)];
    const std::span<const Stop> pending = route.pending();
    const int slots = static_cast<int>(pending.size());
    const auto [anchor_node, anchor_time] = route_anchor(route, state.now, oracle);
    const int load = static_cast<int>(current_load(state, robot));

    // Base waits of the untouched pending sequence, same accounting.
    Seconds base_waits = 0;
    {
        PendingWalk walk(state, config, oracle, anchor_node, anchor_time, load);
        for (const Stop& s : pending) {
            if (!walk.push(WalkStop{s.node, s.kind, s.request}))
                throw InternalError("existing route no longer passes its own constraints");
        }
        base_waits = walk.waits();
    }

    const WalkStop pick_stop{request.pickup, StopKind::Pickup, request.id};
    const WalkStop drop_stop{request.dropoff, StopKind::Dropoff, request.id};

    Seconds best_delta = 0;
    int best_pick = -1, best_drop = -1;
    for (int pick = 0; pick < slots; ++pick) {
        for (int drop = pick; drop < slots; ++drop) {
            PendingWalk walk(state, config, oracle, anchor_node, anchor_time, load);
            bool ok = true;
            for (int i = 0; ok && i < slots; ++i) {
                if (i == pick) ok = walk.push(pick_stop);
                if (ok && i == drop) ok = walk.push(drop_stop);
                const Stop& s = pending[static_cast<std::size_t>(i)];
                if (ok) ok = walk.push(WalkStop{s.node, s.kind, s.request});
            }
            if (!ok) continue;
            Seconds delta = walk.waits() - base_waits;
            if (best_pick < 0 || delta < best_delta) {
                best_delta = delta;
                best_pick = pick;
                best_drop = drop;
            }
        }
    }
    if (best_pick < 0) return std::nullopt;

    // Materialize only the winner.
    std::vector<Stop> chosen;
    chosen.reserve(static_cast<std::size_t>(slots) + 2);
    for (int i = 0; i < slots; ++i) {
        if (i == best_pick) chosen.push_back(Stop{request.pickup, 0, StopKind::Pickup, request.id});
        if (i == best_drop)
            chosen.push_back(Stop{request.dropoff, 0, StopKind::Dropoff, request.id});
        chosen.push_back(pending[static_cast<std::size_t>(i)]);
    }
    Route result = replan_route(route, chosen, state, oracle);
    return InsertionCandidate{std::move(result), best_delta, best_pick, best_drop};
}

bool greedy_assign_inplace(FleetState& state, RequestId id, const ProblemConfig& config,
                           const TravelTimeOracle& oracle) {
    const Request request = state.request(id);
    std::optional<InsertionCandidate> best;
    for (RobotId m = 0; m < static_cast<RobotId>(state.routes.size()); ++m) {
        auto candidate = insertion_procedure(state, m, request, config, oracle);
        if (!candidate) continue;
        if (!best || candidate->cost_delta < best->cost_delta) best = std::move(candidate);
    }
    if (!best) return false;
    state.commit_route(std::move(best->route), oracle);
    return true;
}

std::optional<FleetState> greedy_assign(const FleetState& state, const Request& request,
                                        const ProblemConfig& config,
                                        const TravelTimeOracle& oracle) {
    FleetState next = state;
    if (!next.has_request(request.id)) next.add_request(request);
    if (!greedy_assign_inplace(next, request.id, config, oracle)) return std::nullopt;
    return next;
}

Seconds run_base_policy(FleetState state, Seconds horizon, const Scenario& future,
                        const ProblemConfig& config, const TravelTimeOracle& oracle) {
    if (horizon <= 0) return 0;
    const Seconds window_end = std::min(state.now + horizon, config.t_end);
    const Seconds start_waits = state.wait_sum;
    Seconds penalties = 0;

    std::vector<Request> batch;
    std::size_t i = 0;
    while (i < future.requests.size()) {
        const Seconds entry = future.requests[i].entry_time;
        if (entry > window_end) break;
        if (entry <= state.now) {
            ++i;
            continue;
        }
        batch.clear();
        while (i < future.requests.size() && future.requests[i].entry_time == entry) {
            batch.push_back(future.requests[i]);
            ++i;
        }
        advance_to(state, entry, oracle);
        canonical_order(batch);
        for (const Request& r : batch) {
            if (state.has_request(r.id)) continue;
            state.add_request(r);
            if (!greedy_assign_inplace(state, r.id, config, oracle))
                penalties += config.w_pick + config.w_drop;
        }
    }
    return (state.wait_sum - start_waits) + penalties;
}

}  // namespace ridepool
