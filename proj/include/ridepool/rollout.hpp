#pragma once

#include "ridepool/routesgen.hpp"

namespace ridepool {

struct RolloutConfig {
    Seconds horizon = 3600;  // base-policy lookahead, seconds
    int n_scenarios = 20;
    int n_routes = 15;
    std::uint64_t seed = 0;

    void validate() const {
        if (horizon < 0) throw ConfigError("rollout horizon must be non-negative");
        if (n_scenarios < 1) throw ConfigError("need at least one scenario");
        if (n_routes < 1) throw ConfigError("need at least one candidate route");
    }
};

// Monte-Carlo estimate of immediate-plus-future cost for one candidate
// control: the control's stage cost, plus the base policy's handling of the
// same-step arrivals that are still waiting their turn, plus the mean over
// scenarios of running the base policy for the truncation horizon.
double evaluate_control(const FleetState& before, const FleetState& control,
                        const std::vector<Request>& pending_same_step,
                        const std::vector<Scenario>& scenarios, const RolloutConfig& rollout,
                        const ProblemConfig& config, const TravelTimeOracle& oracle);

// One-step lookahead over the promising-control set; empty set means the
// request is rejected everywhere.
std::optional<FleetState> rollout_assign(const FleetState& state, const Request& request,
                                         const std::vector<Request>& pending_same_step,
                                         const std::vector<Scenario>& scenarios,
                                         const RolloutConfig& rollout,
                                         const ProblemConfig& config,
                                         const TravelTimeOracle& oracle,
                                         const ClusterParams& cluster_params);

// Processes one step's arrivals in canonical order, fixing each request's
// control before the next one is considered. Scheduled requests are passed
// in at the front of `arrivals` by the caller.
void plan_step(FleetState& state, std::vector<Request> arrivals,
               const std::vector<Scenario>& scenarios, const RolloutConfig& rollout,
               const ProblemConfig& config, const TravelTimeOracle& oracle,
               const ClusterParams& cluster_params);

}  // namespace ridepool
