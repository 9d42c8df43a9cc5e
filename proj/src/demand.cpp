#include "ridepool/demand.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ridepool {

namespace {

long long mwh_key(int month, int weekday, int hour) {
    return (static_cast<long long>(month) * 8 + weekday) * 32 + hour;
}

long long mw_key(int month, int weekday) { return static_cast<long long>(month) * 8 + weekday; }

long long mwr_key(int month, int weekday, NodeId pickup) {
    return (static_cast<long long>(month) * 8 + weekday) * (1LL << 32) + pickup;
}

long long mr_key(int month, NodeId pickup) {
    return static_cast<long long>(month) * (1LL << 32) + pickup;
}

int hour_of(Seconds t) {
    return static_cast<int>((t / 3600) % 24);
}

NodeDistribution normalize(const std::map<NodeId, long long>& counts) {
    NodeDistribution dist;
    long long total = 0;
    for (const auto& [node, count] : counts) total += count;
    if (total == 0) return dist;
    double acc = 0.0;
    for (const auto& [node, count] : counts) {
        if (count == 0) continue;
        acc += static_cast<double>(count) / static_cast<double>(total);
        dist.nodes.push_back(node);
        dist.cumulative.push_back(acc);
    }
    if (!dist.cumulative.empty()) dist.cumulative.back() = 1.0;
    return dist;
}

}  // namespace

void DemandConfig::validate() const {
    if (intervals_per_hour < 1 || intervals_per_hour > 60 || 3600 % intervals_per_hour != 0)
        throw ConfigError("intervals per hour must divide 3600 seconds (and be at most 60)");
    if (scenario_lead < 1) throw ConfigError("scenario lead time must be at least 1 second");
}

double NodeDistribution::probability_of(NodeId node) const {
    double prev = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] == node) return cumulative[i] - prev;
        prev = cumulative[i];
    }
    return 0.0;
}

NodeId NodeDistribution::sample(Rng& rng) const {
    if (empty()) throw InternalError("sampling from an empty node distribution");
    double u = rng.unit();
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    return nodes[static_cast<std::size_t>(it - cumulative.begin())];
}

ConditionalHistograms ConditionalHistograms::build(const std::vector<DayLog>& history) {
    if (history.empty()) throw InputError("demand histograms need at least one historical day");
    std::map<long long, std::map<NodeId, long long>> pick3, pick2, pick1;
    std::map<NodeId, long long> pick0;
    std::map<long long, std::map<NodeId, long long>> drop3, drop2, drop1;
    std::map<NodeId, long long> drop0;

    for (const DayLog& day : history) {
        const int m = day.info.month;
        const int w = day.info.weekday;
        for (const Request& r : day.requests) {
            const int h = hour_of(r.entry_time);
            pick3[mwh_key(m, w, h)][r.pickup]++;
            pick2[mw_key(m, w)][r.pickup]++;
            pick1[m][r.pickup]++;
            pick0[r.pickup]++;
            drop3[mwr_key(m, w, r.pickup)][r.dropoff]++;
            drop2[mr_key(m, r.pickup)][r.dropoff]++;
            drop1[r.pickup][r.dropoff]++;
            drop0[r.dropoff]++;
        }
    }

    ConditionalHistograms out;
    for (const auto& [k, counts] : pick3) out.pickups_[k] = normalize(counts);
    for (const auto& [k, counts] : pick2) out.pickups_mw_[k] = normalize(counts);
    for (const auto& [k, counts] : pick1) out.pickups_m_[k] = normalize(counts);
    out.pickups_all_ = normalize(pick0);
    for (const auto& [k, counts] : drop3) out.dropoffs_[k] = normalize(counts);
    for (const auto& [k, counts] : drop2) out.dropoffs_mr_[k] = normalize(counts);
    for (const auto& [k, counts] : drop1) out.dropoffs_r_[k] = normalize(counts);
    out.dropoffs_all_ = normalize(drop0);
    return out;
}

const NodeDistribution& ConditionalHistograms::pickup_distribution(int month, int weekday,
                                                                   int hour) const {
    if (auto it = pickups_.find(mwh_key(month, weekday, hour)); it != pickups_.end())
        return it->second;
    if (auto it = pickups_mw_.find(mw_key(month, weekday)); it != pickups_mw_.end())
        return it->second;
    if (auto it = pickups_m_.find(month); it != pickups_m_.end()) return it->second;
    return pickups_all_;
}

const NodeDistribution& ConditionalHistograms::dropoff_distribution(int month, int weekday,
                                                                    NodeId pickup) const {
    if (auto it = dropoffs_.find(mwr_key(month, weekday, pickup)); it != dropoffs_.end())
        return it->second;
    if (auto it = dropoffs_mr_.find(mr_key(month, pickup)); it != dropoffs_mr_.end())
        return it->second;
    if (auto it = dropoffs_r_.find(pickup); it != dropoffs_r_.end()) return it->second;
    return dropoffs_all_;
}

const NodeDistribution* ConditionalHistograms::pickup_bucket(int month, int weekday,
                                                             int hour) const {
    auto it = pickups_.find(mwh_key(month, weekday, hour));
    return it == pickups_.end() ? nullptr : &it->second;
}

const NodeDistribution* ConditionalHistograms::dropoff_bucket(int month, int weekday,
                                                              NodeId pickup) const {
    auto it = dropoffs_.find(mwr_key(month, weekday, pickup));
    return it == dropoffs_.end() ? nullptr : &it->second;
}

HistoricalMeanForecaster::HistoricalMeanForecaster(const std::vector<DayLog>& history,
                                                   const DemandConfig& demand,
                                                   const ProblemConfig& problem)
    : intervals_(demand.intervals_per_hour) {
    if (history.empty()) throw InputError("forecaster training needs at least one day");
    const Seconds len = demand.interval_length();
    for (const DayLog& day : history) {
        // Count per (hour, interval), then fold into per-context sums.
        std::map<int, long long> counts;
        for (const Request& r : day.requests) {
            if (r.entry_time < problem.t_start || r.entry_time >= problem.t_end) continue;
            const int h = hour_of(r.entry_time);
            const int k = static_cast<int>((r.entry_time % 3600) / len);
            counts[h * 64 + k]++;
        }
        for (Seconds t = problem.t_start; t < problem.t_end; t += 3600) {
            const int h = hour_of(t);
            for (int k = 0; k < intervals_; ++k) {
                auto& slot = sums_[mwh_key(day.info.month, day.info.weekday, h) * 64 + k];
                auto it = counts.find(h * 64 + k);
                slot.first += (it == counts.end()) ? 0 : it->second;
                slot.second += 1;
            }
        }
    }
}

CountForecast HistoricalMeanForecaster::forecast(const std::vector<int>& observed,
                                                 const std::vector<DemandContext>& next,
                                                 Rng& rng) const {
    (void)observed;
    (void)rng;
    CountForecast out;
    out.counts.reserve(next.size());
    for (const DemandContext& ctx : next) {
        auto it = sums_.find(mwh_key(ctx.month, ctx.weekday, ctx.hour) * 64 + ctx.interval);
        if (it == sums_.end() || it->second.second == 0) {
            out.counts.push_back(0);
        } else {
            double mean = static_cast<double>(it->second.first) /
                          static_cast<double>(it->second.second);
            out.counts.push_back(static_cast<int>(std::llround(mean)));
        }
    }
    return out;
}

BootstrapForecaster::BootstrapForecaster(const std::vector<DayLog>& history,
                                         const DemandConfig& demand,
                                         const ProblemConfig& problem)
    : intervals_(demand.intervals_per_hour) {
    if (history.empty()) throw InputError("forecaster training needs at least one day");
    std::vector<double> totals;
    totals.reserve(history.size());
    for (const DayLog& day : history) totals.push_back(static_cast<double>(day.requests.size()));
    for (double t : totals) mean_ += t;
    mean_ /= static_cast<double>(totals.size());
    double var = 0.0;
    for (double t : totals) var += (t - mean_) * (t - mean_);
    stddev_ = totals.size() > 1 ? std::sqrt(var / static_cast<double>(totals.size() - 1)) : 0.0;
    intervals_per_day_ = static_cast<int>((problem.t_end - problem.t_start) /
                                          demand.interval_length());
    if (intervals_per_day_ < 1) intervals_per_day_ = 1;
}

CountForecast BootstrapForecaster::forecast(const std::vector<int>& observed,
                                            const std::vector<DemandContext>& next,
                                            Rng& rng) const {
    (void)observed;
    long long total = std::llround(rng.normal(mean_, stddev_));
    if (total < 0) total = 0;
    // Spread the day total uniformly across the day's intervals; the next
    // hour keeps whatever lands in its own slots.
    std::vector<int> hour_counts(next.size(), 0);
    for (long long i = 0; i < total; ++i) {
        auto slot = rng.below(static_cast<std::uint64_t>(intervals_per_day_));
        if (slot < hour_counts.size()) hour_counts[static_cast<std::size_t>(slot)]++;
    }
    return CountForecast{std::move(hour_counts)};
}

FileForecaster::FileForecaster(const std::string& path, const DemandConfig& demand)
    : intervals_(demand.intervals_per_hour) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open forecast file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        std::istringstream fields{std::string(view)};
        std::string tag;
        if (!(fields >> tag)) continue;
        if (tag != "forecast")
            throw InputError(path + ":" + std::to_string(line_no) + ": expected 'forecast' record");
        std::string date;
        int hour = 0, k = 0, count = 0;
        if (!(fields >> date >> hour >> k >> count) || k < 0 || k >= intervals_ || count < 0)
            throw InputError(path + ":" + std::to_string(line_no) +
                             ": expected 'forecast <date> <hour> <k> <count>'");
        auto& row = table_[{date, hour}];
        row.resize(static_cast<std::size_t>(intervals_), 0);
        row[static_cast<std::size_t>(k)] = count;
    }
}

CountForecast FileForecaster::forecast(const std::vector<int>& observed,
                                       const std::vector<DemandContext>& next, Rng& rng) const {
    (void)observed;
    (void)rng;
    if (next.empty()) return CountForecast{};
    auto it = table_.find({next.front().date, next.front().hour});
    if (it == table_.end())
        return CountForecast{std::vector<int>(next.size(), 0)};
    return CountForecast{it->second};
}

std::vector<Scenario> sample_scenarios(const CountForecast& forecast,
                                       const ConditionalHistograms& histograms,
                                       const std::vector<DemandContext>& contexts,
                                       Seconds hour_start, const DemandConfig& demand,
                                       const ProblemConfig& problem, std::uint64_t seed, int n) {
    if (forecast.counts.size() != contexts.size())
        throw InternalError("forecast and context lengths differ");
    const Seconds len = demand.interval_length();
    std::vector<Scenario> scenarios;
    scenarios.reserve(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(l)));
        Scenario scenario;
        RequestId next_id = kSyntheticIdBase + static_cast<RequestId>(l) * 100000;
        for (std::size_t k = 0; k < forecast.counts.size(); ++k) {
            const DemandContext& ctx = contexts[k];
            // Forecast requests enter at the end of their interval.
            const Seconds entry = hour_start + static_cast<Seconds>(k + 1) * len;
            const Seconds desired = entry + demand.scenario_lead;
            if (desired > problem.t_last || entry >= problem.t_end) continue;
            const NodeDistribution& pick_dist =
                histograms.pickup_distribution(ctx.month, ctx.weekday, ctx.hour);
            if (pick_dist.empty()) continue;
            for (int c = 0; c < forecast.counts[k]; ++c) {
                Request r;
                r.id = next_id++;
                r.entry_time = entry;
                r.desired_pickup_time = desired;
                r.synthetic = true;
                r.pickup = pick_dist.sample(rng);
                const NodeDistribution& drop_dist =
                    histograms.dropoff_distribution(ctx.month, ctx.weekday, r.pickup);
                if (drop_dist.empty()) continue;
                r.dropoff = drop_dist.sample(rng);
                // A trip needs distinct endpoints; redraw a few times, then
                // give up on this sample.
                int retries = 0;
                while (r.dropoff == r.pickup && retries++ < 32) r.dropoff = drop_dist.sample(rng);
                if (r.dropoff == r.pickup) continue;
                scenario.requests.push_back(r);
            }
        }
        std::stable_sort(scenario.requests.begin(), scenario.requests.end(),
                         [](const Request& a, const Request& b) {
                             return a.entry_time < b.entry_time;
                         });
        scenarios.push_back(std::move(scenario));
    }
    return scenarios;
}

std::vector<DayLog> load_history(const std::vector<std::string>& paths,
                                 const ProblemConfig& config) {
    std::vector<DayLog> out;
    out.reserve(paths.size());
    for (const std::string& path : paths) out.push_back(load_day_log(path, config));
    return out;
}

std::vector<std::string> list_history_files(const std::string& directory) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (!fs::is_directory(directory)) throw InputError("not a directory: " + directory);
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (entry.is_regular_file()) files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace ridepool
