#include "ridepool/rollout.hpp"

#include <algorithm>

namespace ridepool {

double evaluate_control(const FleetState& before, const FleetState& control,
                        const std::vector<Request>& pending_same_step,
                        const std::vector<Scenario>& scenarios, const RolloutConfig& rollout,
                        const ProblemConfig& config, const TravelTimeOracle& oracle) {
    // Stage cost of the control plus the base policy's placement of the
    // rest of this step's arrivals; identical across scenarios.
    FleetState work = control;
    Seconds immediate = control.wait_sum - before.wait_sum;
    for (const Request& r : pending_same_step) {
        if (!work.has_request(r.id)) work.add_request(r);
        if (!greedy_assign_inplace(work, r.id, config, oracle))
            immediate += config.w_pick + config.w_drop;
    }

    if (scenarios.empty()) return static_cast<double>(immediate);

    long double future_sum = 0.0L;
    for (const Scenario& scenario : scenarios) {
        future_sum += static_cast<long double>(
            run_base_policy(work, rollout.horizon, scenario, config, oracle));
    }
    return static_cast<double>(static_cast<long double>(immediate) +
                               future_sum / static_cast<long double>(scenarios.size()));
}

std::optional<FleetState> rollout_assign(const FleetState& state, const Request& request,
                                         const std::vector<Request>& pending_same_step,
                                         const std::vector<Scenario>& scenarios,
                                         const RolloutConfig& rollout,
                                         const ProblemConfig& config,
                                         const TravelTimeOracle& oracle,
                                         const ClusterParams& cluster_params) {
    std::vector<FleetState> controls =
        generate_promising_controls(state, request, rollout.n_routes, config, oracle,
                                    cluster_params);
    if (controls.empty()) return std::nullopt;

    std::size_t best = 0;
    double best_cost = 0.0;
    for (std::size_t i = 0; i < controls.size(); ++i) {
        double cost = evaluate_control(state, controls[i], pending_same_step, scenarios, rollout,
                                       config, oracle);
        if (i == 0 || cost < best_cost) {
            best = i;
            best_cost = cost;
        }
    }
    return std::move(controls[best]);
}

void plan_step(FleetState& state, std::vector<Request> arrivals,
               const std::vector<Scenario>& scenarios, const RolloutConfig& rollout,
               const ProblemConfig& config, const TravelTimeOracle& oracle,
               const ClusterParams& cluster_params) {
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
        const Request& request = arrivals[i];
        if (!state.has_request(request.id)) state.add_request(request);
        const std::vector<Request> later(arrivals.begin() + static_cast<long>(i) + 1,
                                         arrivals.end());
        auto chosen = rollout_assign(state, request, later, scenarios, rollout, config, oracle,
                                     cluster_params);
        if (chosen) {
            state = std::move(*chosen);
        } else {
            state.mark_rejected(request.id);
        }
    }
}

}  // namespace ridepool
