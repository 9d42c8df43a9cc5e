#pragma once

#include <functional>

#include "ridepool/greedy.hpp"

namespace ridepool {

struct DaySizing {
    std::string date;
    int size = 1;
};

struct FleetSizingReport {
    std::vector<DaySizing> per_day;
    int fleet = 1;  // max over days
    std::string algorithm;
    int m_max = 0;
};

// Raised when a day cannot be served even with m_max robots.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Grow-on-failure sizing: replays each day once, adding a robot (idle at
// the depot nearest the failed pickup) whenever the greedy policy cannot
// place a request, then retrying that request. Cheap, but the fleet it
// returns is not sufficient for stability in general.
FleetSizingReport single_pass(const std::vector<DayLog>& history, const ProblemConfig& config,
                              const TravelTimeOracle& oracle);

// Restart-based sizing: for each day, replays the whole day from scratch at
// fleet sizes 1..m_max and keeps the first size with zero rejections.
FleetSizingReport restart_and_optimize(const std::vector<DayLog>& history, int m_max,
                                       const ProblemConfig& config,
                                       const TravelTimeOracle& oracle);

// Replays one day under the greedy policy with a fixed fleet; returns the
// rejected request ids.
std::vector<RequestId> replay_day_greedy(const DayLog& day, int fleet,
                                         const ProblemConfig& config,
                                         const TravelTimeOracle& oracle);

// Replays each test day at the given fleet size and reports rejection
// counts; the fleet is stable on this sample iff the total is zero. The
// runner abstracts the policy (greedy or rollout).
using DayRunner = std::function<int(const DayLog& day, int fleet)>;
std::vector<int> verify_stability(int fleet, const std::vector<DayLog>& days,
                                  const DayRunner& runner);

}  // namespace ridepool
