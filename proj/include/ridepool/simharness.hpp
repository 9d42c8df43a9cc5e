#pragma once

#include <iosfwd>

#include "ridepool/demand.hpp"
#include "ridepool/fleetsize.hpp"
#include "ridepool/rollout.hpp"

namespace ridepool {

enum class PolicyKind { Greedy, Rollout };

std::string policy_name(PolicyKind policy);

struct SimOptions {
    bool debug_checks = false;   // verify fleet invariants after every event
    bool step_seconds = false;   // advance one second at a time (slow; tests)
    bool measure_time = false;   // record wall-clock planning time; makes
                                 // output runs non-reproducible, off by default
};

struct RequestOutcome {
    RequestId id = 0;
    Seconds wait_pick = 0;
    Seconds wait_drop = 0;
    Seconds trip = 0;  // planned drop-off minus planned pickup
    bool rejected = false;
};

struct DayMetrics {
    std::string date;
    std::string policy;
    int fleet = 0;
    int entered = 0;
    int serviced = 0;
    int rejected = 0;
    double avg_wait_pick = 0.0;  // over serviced requests
    double avg_trip = 0.0;       // over serviced requests
    double pct_rejected = 0.0;
    Seconds total_cost = 0;      // sum of stage costs == final immediate cost
    double mean_plan_time = 0.0; // seconds per decision, 0 unless measured
    std::vector<RequestOutcome> outcomes;
};

// Supplies the sampled futures used by rollout; refreshed once per
// simulated hour. Implementations must be deterministic given their seed.
class ScenarioProvider {
public:
    virtual ~ScenarioProvider() = default;
    virtual const std::vector<Scenario>& scenarios_for_hour(Seconds hour_start,
                                                            const DayLog& day) = 0;
};

// Model-backed provider: forecasts the hour's interval counts from the
// requests observed in the previous hour, then samples locations from the
// conditional histograms.
class DemandScenarioProvider : public ScenarioProvider {
public:
    DemandScenarioProvider(const ConditionalHistograms& histograms,
                           const CountForecaster& forecaster, const DemandConfig& demand,
                           const ProblemConfig& problem, int n_scenarios, std::uint64_t seed);
    const std::vector<Scenario>& scenarios_for_hour(Seconds hour_start,
                                                    const DayLog& day) override;

private:
    const ConditionalHistograms* histograms_;
    const CountForecaster* forecaster_;
    DemandConfig demand_;
    ProblemConfig problem_;
    int n_scenarios_;
    std::uint64_t seed_;
    Seconds cached_hour_ = kUnsetTime;
    std::vector<Scenario> cache_;
};

// Perfect-prediction provider: the single scenario is the day's true
// future. Upper bound for ablations and the oracle for improvement tests.
class OracleScenarioProvider : public ScenarioProvider {
public:
    explicit OracleScenarioProvider(Seconds window = 3600) : window_(window) {}
    const std::vector<Scenario>& scenarios_for_hour(Seconds hour_start,
                                                    const DayLog& day) override;

private:
    Seconds window_;
    Seconds cached_hour_ = kUnsetTime;
    std::vector<Scenario> cache_;
};

// Replays one day under the chosen policy: per arrival batch the policy
// plans (rollout consults the provider's scenarios), then time advances.
// Invariants are checked per event when debug_checks is set.
DayMetrics simulate_day(const DayLog& day, PolicyKind policy, const ProblemConfig& config,
                        const RolloutConfig& rollout, const ClusterParams& cluster,
                        const TravelTimeOracle& oracle, ScenarioProvider* scenarios,
                        const SimOptions& options, FleetState* final_state = nullptr);

// Structural-invariant audit of a fleet state; returns human-readable
// violations (empty when clean).
std::vector<std::string> check_invariants(const FleetState& state, const ProblemConfig& config,
                                          const TravelTimeOracle& oracle);

struct SynthSpec {
    int n_days = 30;
    std::uint64_t seed = 1;
    std::string start_date = "2024-03-04";
    std::vector<std::pair<NodeId, double>> pickup_weights;
    std::vector<std::pair<NodeId, double>> dropoff_weights;
    std::vector<std::pair<int, double>> hourly_rates;  // hour of day -> mean arrivals
    Seconds lead_min = 60;
    Seconds lead_max = 600;
    double scheduled_fraction = 0.0;

    static SynthSpec load(const std::string& path);
    static SynthSpec parse(std::istream& in, const std::string& source_name);
    void validate(const StreetGraph& graph, const ProblemConfig& config) const;
};

// Draws i.i.d. daily request logs from the spec's distribution.
std::vector<DayLog> generate_synthetic_history(const SynthSpec& spec, const StreetGraph& graph,
                                               const ProblemConfig& config);

struct ExperimentConfig {
    std::vector<DayLog> train_days;  // demand model fitting + fleet sizing
    std::vector<DayLog> test_days;   // evaluation
    std::vector<PolicyKind> policies;
    std::vector<int> fleet_sizes;
    ProblemConfig problem;
    RolloutConfig rollout;
    ClusterParams cluster;
    DemandConfig demand;
    std::string forecaster = "histmean";  // histmean | bootstrap | oracle | file:<path>
    std::uint64_t seed = 0;
    int jobs = 0;  // 0 = hardware concurrency
    SimOptions options;
};

struct ExperimentResult {
    std::vector<DayMetrics> rows;  // ordered by (policy, fleet, day)
};

ExperimentResult run_experiment(const ExperimentConfig& config, const TravelTimeOracle& oracle);

void write_metrics_csv(std::ostream& out, const std::vector<DayMetrics>& rows);
void write_summary(std::ostream& out, const std::vector<DayMetrics>& rows);

// Builds a day-runner for verify_stability on top of simulate_day.
DayRunner make_day_runner(PolicyKind policy, const ProblemConfig& config,
                          const RolloutConfig& rollout, const ClusterParams& cluster,
                          const TravelTimeOracle& oracle,
                          const std::function<ScenarioProvider*()>& provider_factory);

// Calendar helpers for synthetic dates (YYYY-MM-DD).
int weekday_of(const std::string& date);  // 0 = Monday
int month_of(const std::string& date);
std::string add_days(const std::string& date, int days);

}  // namespace ridepool
