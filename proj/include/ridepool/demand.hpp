#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ridepool/core.hpp"
#include "ridepool/greedy.hpp"
#include "ridepool/rng.hpp"

namespace ridepool {

struct DemandConfig {
    int intervals_per_hour = 12;  // 300 s intervals
    Seconds scenario_lead = 60;   // desired pickup = entry + lead for sampled requests

    Seconds interval_length() const { return 3600 / intervals_per_hour; }
    void validate() const;
};

struct DemandContext {
    std::string date;
    int month = 1;    // 1..12
    int weekday = 0;  // 0..6
    int hour = 0;     // 0..23
    int interval = 0;
    double temperature = 0.0;
    double precipitation = 0.0;
};

struct CountForecast {
    std::vector<int> counts;  // one entry per interval of the next hour
};

// Discrete distribution over nodes, stored cumulatively for sampling.
struct NodeDistribution {
    std::vector<NodeId> nodes;
    std::vector<double> cumulative;

    bool empty() const { return nodes.empty(); }
    double probability_of(NodeId node) const;
    NodeId sample(Rng& rng) const;
};

// Empirical conditional location distributions: pickups keyed by
// (month, weekday, hour), drop-offs keyed by (month, weekday, pickup node).
// Lookups back off to coarser conditioning when a bucket is empty
// (drop hour, then weekday, then everything).
class ConditionalHistograms {
public:
    static ConditionalHistograms build(const std::vector<DayLog>& history);

    const NodeDistribution& pickup_distribution(int month, int weekday, int hour) const;
    const NodeDistribution& dropoff_distribution(int month, int weekday, NodeId pickup) const;

    // Exact-bucket lookups without fallback, for tests and inspection.
    const NodeDistribution* pickup_bucket(int month, int weekday, int hour) const;
    const NodeDistribution* dropoff_bucket(int month, int weekday, NodeId pickup) const;

private:
    std::map<long long, NodeDistribution> pickups_;       // (m,w,h)
    std::map<long long, NodeDistribution> pickups_mw_;    // (m,w)
    std::map<long long, NodeDistribution> pickups_m_;     // (m)
    NodeDistribution pickups_all_;
    std::map<long long, NodeDistribution> dropoffs_;      // (m,w,rho)
    std::map<long long, NodeDistribution> dropoffs_mr_;   // (m,rho)
    std::map<long long, NodeDistribution> dropoffs_r_;    // (rho)
    NodeDistribution dropoffs_all_;
};

// Interval count forecaster contract. `observed` holds the per-interval
// request counts of the hour that just ended; `next` carries the context of
// the hour being predicted. An externally trained model can be plugged in
// through the precomputed-forecast file format.
class CountForecaster {
public:
    virtual ~CountForecaster() = default;
    virtual CountForecast forecast(const std::vector<int>& observed,
                                   const std::vector<DemandContext>& next, Rng& rng) const = 0;
};

// Per-(month, weekday, hour, interval) empirical mean, rounded; empty
// buckets forecast zero.
class HistoricalMeanForecaster : public CountForecaster {
public:
    HistoricalMeanForecaster(const std::vector<DayLog>& history, const DemandConfig& demand,
                             const ProblemConfig& problem);
    CountForecast forecast(const std::vector<int>& observed,
                           const std::vector<DemandContext>& next, Rng& rng) const override;

private:
    std::map<long long, std::pair<long long, long long>> sums_;  // key -> (total, days)
    int intervals_;
};

// Gaussian fit of historical day totals; a sampled total is spread
// uniformly over the day's intervals.
class BootstrapForecaster : public CountForecaster {
public:
    BootstrapForecaster(const std::vector<DayLog>& history, const DemandConfig& demand,
                        const ProblemConfig& problem);
    CountForecast forecast(const std::vector<int>& observed,
                           const std::vector<DemandContext>& next, Rng& rng) const override;

private:
    double mean_ = 0.0;
    double stddev_ = 0.0;
    int intervals_per_day_ = 1;
    int intervals_;
};

// Bridge for externally computed forecasts: `forecast <date> <hour> <k> <count>`.
class FileForecaster : public CountForecaster {
public:
    explicit FileForecaster(const std::string& path, const DemandConfig& demand);
    CountForecast forecast(const std::vector<int>& observed,
                           const std::vector<DemandContext>& next, Rng& rng) const override;

private:
    std::map<std::pair<std::string, int>, std::vector<int>> table_;
    int intervals_;
};

// Draws `n` independent future-request scenarios for the hour starting at
// `hour_start`. A request forecast in interval k enters at the end of that
// interval; its pickup is sampled from the (month, weekday, hour) histogram
// and its drop-off conditioned on the sampled pickup.
std::vector<Scenario> sample_scenarios(const CountForecast& forecast,
                                       const ConditionalHistograms& histograms,
                                       const std::vector<DemandContext>& contexts,
                                       Seconds hour_start, const DemandConfig& demand,
                                       const ProblemConfig& problem, std::uint64_t seed, int n);

// History loading: one request-log file per day, each with a `day` line.
std::vector<DayLog> load_history(const std::vector<std::string>& paths,
                                 const ProblemConfig& config);
std::vector<std::string> list_history_files(const std::string& directory);

}  // namespace ridepool
