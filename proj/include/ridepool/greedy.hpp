#pragma once

#include <optional>

#include "ridepool/core.hpp"

namespace ridepool {

struct InsertionCandidate {
    Route route;
    Seconds cost_delta = 0;  // added wait time across the route's requests
    int pick_slot = -1;      // insertion positions in the pending stop sequence
    int drop_slot = -1;
};

// Exhaustive insertion of one request into one robot's remaining stop
// sequence: every (pick, drop) slot pair is tried, stop times are rebuilt
// via shortest paths (waiting for early pickups), invalid placements are
// filtered, and the cheapest valid route wins. Ties go to the smallest
// (pick, drop) pair. Returns nothing when no valid insertion exists.
std::optional<InsertionCandidate> insertion_procedure(const FleetState& state, RobotId robot,
                                                      const Request& request,
                                                      const ProblemConfig& config,
                                                      const TravelTimeOracle& oracle);

// One step of the greedy base policy: try the insertion on every robot and
// commit the cheapest valid one (ties to the lowest robot id). The request
// must already be entered in the state. Returns false when every robot
// fails, in which case the caller records the rejection.
bool greedy_assign_inplace(FleetState& state, RequestId id, const ProblemConfig& config,
                           const TravelTimeOracle& oracle);

// Functional form: returns the chosen control as a new state.
std::optional<FleetState> greedy_assign(const FleetState& state, const Request& request,
                                        const ProblemConfig& config,
                                        const TravelTimeOracle& oracle);

struct Scenario {
    std::vector<Request> requests;  // sorted by entry time
};

// Runs the greedy policy forward for `horizon` seconds against one sampled
// future, accumulating stage costs. A scenario request that cannot be
// placed adds a flat (w_pick + w_drop) penalty instead of an unbounded
// cost, so candidate controls stay comparable.
Seconds run_base_policy(FleetState state, Seconds horizon, const Scenario& future,
                        const ProblemConfig& config, const TravelTimeOracle& oracle);

}  // namespace ridepool
