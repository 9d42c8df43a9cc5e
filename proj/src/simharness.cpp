#include "ridepool/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace ridepool {

namespace {

Seconds hour_floor(Seconds t) { return (t / 3600) * 3600; }

void run_checks(const FleetState& state, const ProblemConfig& config,
                const TravelTimeOracle& oracle) {
    auto violations = check_invariants(state, config, oracle);
    if (!violations.empty()) {
        std::string msg = "invariant violation at t=" + std::to_string(state.now);
        for (const auto& v : violations) msg += "; " + v;
        throw InternalError(msg);
    }
}

}  // namespace

std::string policy_name(PolicyKind policy) {
    return policy == PolicyKind::Greedy ? "greedy-wt" : "rollout";
}

DemandScenarioProvider::DemandScenarioProvider(const ConditionalHistograms& histograms,
                                               const CountForecaster& forecaster,
                                               const DemandConfig& demand,
                                               const ProblemConfig& problem, int n_scenarios,
                                               std::uint64_t seed)
    : histograms_(&histograms),
      forecaster_(&forecaster),
      demand_(demand),
      problem_(problem),
      n_scenarios_(n_scenarios),
      seed_(seed) {}

const std::vector<Scenario>& DemandScenarioProvider::scenarios_for_hour(Seconds hour_start,
                                                                        const DayLog& day) {
    if (cached_hour_ == hour_start) return cache_;
    const int n_intervals = demand_.intervals_per_hour;
    const Seconds len = demand_.interval_length();

    // Interval counts of the hour that just ended (never peeks ahead).
    std::vector<int> observed(static_cast<std::size_t>(n_intervals), 0);
    const Seconds prev_start = hour_start - 3600;
    for (const Request& r : day.requests) {
        if (r.entry_time < prev_start || r.entry_time >= hour_start) continue;
        if (r.entry_time < problem_.t_start) continue;
        observed[static_cast<std::size_t>((r.entry_time - prev_start) / len)]++;
    }

    std::vector<DemandContext> contexts;
    contexts.reserve(static_cast<std::size_t>(n_intervals));
    for (int k = 0; k < n_intervals; ++k) {
        DemandContext ctx;
        ctx.date = day.info.date;
        ctx.month = day.info.month;
        ctx.weekday = day.info.weekday;
        ctx.hour = static_cast<int>((hour_start / 3600) % 24);
        ctx.interval = k;
        contexts.push_back(ctx);
    }

    Rng rng(Rng::mix(seed_, static_cast<std::uint64_t>(hour_start)));
    CountForecast forecast = forecaster_->forecast(observed, contexts, rng);
    cache_ = sample_scenarios(forecast, *histograms_, contexts, hour_start, demand_, problem_,
                              Rng::mix(seed_, static_cast<std::uint64_t>(hour_start) * 31 + 7),
                              n_scenarios_);
    cached_hour_ = hour_start;
    return cache_;
}

const std::vector<Scenario>& OracleScenarioProvider::scenarios_for_hour(Seconds hour_start,
                                                                        const DayLog& day) {
    if (cached_hour_ == hour_start) return cache_;
    Scenario truth;
    for (const Request& r : day.requests) {
        if (r.entry_time > hour_start && r.entry_time <= hour_start + window_)
            truth.requests.push_back(r);
    }
    cache_.clear();
    cache_.push_back(std::move(truth));
    cached_hour_ = hour_start;
    return cache_;
}

DayMetrics simulate_day(const DayLog& day, PolicyKind policy, const ProblemConfig& config,
                        const RolloutConfig& rollout, const ClusterParams& cluster,
                        const TravelTimeOracle& oracle, ScenarioProvider* scenarios,
                        const SimOptions& options, FleetState* final_state) {
    if (policy == PolicyKind::Rollout && scenarios == nullptr)
        throw ConfigError("rollout needs a scenario provider");

    FleetState state = FleetState::initial(config);
    double plan_seconds = 0.0;
    long long decisions = 0;

    auto step_to = [&](Seconds t) {
        if (options.step_seconds) {
            while (state.now < t) {
                advance(state, oracle);
                if (options.debug_checks) run_checks(state, config, oracle);
            }
        } else {
            advance_to(state, t, oracle);
        }
    };

    for (auto& [t, batch] : arrival_batches(day, config)) {
        step_to(t);
        if (batch.empty()) continue;
        const auto started = std::chrono::steady_clock::now();
        if (policy == PolicyKind::Greedy) {
            for (const Request& r : batch) {
                state.add_request(r);
                if (!greedy_assign_inplace(state, r.id, config, oracle))
                    state.mark_rejected(r.id);
            }
        } else {
            const std::vector<Scenario>& futures =
                scenarios->scenarios_for_hour(hour_floor(t), day);
            plan_step(state, batch, futures, rollout, config, oracle, cluster);
        }
        decisions += static_cast<long long>(batch.size());
        if (options.measure_time) {
            plan_seconds +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                    .count();
        }
        if (options.debug_checks) run_checks(state, config, oracle);
    }
    step_to(config.t_end);
    if (options.debug_checks) {
        run_checks(state, config, oracle);
        for (std::size_t m = 0; m < state.routes.size(); ++m) {
            if (state.locations[m] != state.routes[m].depot || state.loads[m] != 0)
                throw InternalError("robot " + std::to_string(m) +
                                    " did not finish empty at its depot");
        }
    }

    DayMetrics metrics;
    metrics.date = day.info.date;
    metrics.policy = policy_name(policy);
    metrics.fleet = config.fleet_size;
    metrics.entered = static_cast<int>(day.requests.size());
    metrics.total_cost = state.wait_sum;
    double wait_sum = 0.0, trip_sum = 0.0;
    for (const Request& r : state.requests) {
        RequestOutcome outcome;
        outcome.id = r.id;
        outcome.rejected =
            std::find(state.rejected.begin(), state.rejected.end(), r.id) != state.rejected.end();
        if (outcome.rejected) {
            ++metrics.rejected;
        } else {
            outcome.wait_pick = r.planned_pickup - r.desired_pickup_time;
            outcome.wait_drop =
                r.planned_dropoff - (r.planned_pickup + oracle.time(r.pickup, r.dropoff));
            outcome.trip = r.planned_dropoff - r.planned_pickup;
            ++metrics.serviced;
            wait_sum += static_cast<double>(outcome.wait_pick);
            trip_sum += static_cast<double>(outcome.trip);
        }
        metrics.outcomes.push_back(outcome);
    }
    if (metrics.serviced > 0) {
        metrics.avg_wait_pick = wait_sum / metrics.serviced;
        metrics.avg_trip = trip_sum / metrics.serviced;
    }
    if (metrics.entered > 0)
        metrics.pct_rejected = 100.0 * metrics.rejected / metrics.entered;
    if (decisions > 0 && options.measure_time)
        metrics.mean_plan_time = plan_seconds / static_cast<double>(decisions);
    if (final_state != nullptr) *final_state = std::move(state);
    return metrics;
}

std::vector<std::string> check_invariants(const FleetState& state, const ProblemConfig& config,
                                          const TravelTimeOracle& oracle) {
    std::vector<std::string> out;

    // Route-level structure and wait caps.
    for (const Route& route : state.routes) {
        RouteCheck check = validate_route(route, state, config, oracle);
        if (!check.ok())
            out.push_back("robot " + std::to_string(route.robot) + " route invalid at stop " +
                          std::to_string(check.stop_index) + ": " + check.detail);
    }

    // Assignment bookkeeping: disjointness, pickup-robot pinning, pending
    // stops present exactly once on the assigned robot's route.
    std::size_t assigned_count = 0, rejected_count = state.rejected.size();
    for (const Request& r : state.requests) {
        const bool rejected = std::find(state.rejected.begin(), state.rejected.end(), r.id) !=
                              state.rejected.end();
        if (rejected) {
            if (r.assigned != kUnassigned)
                out.push_back("rejected request " + std::to_string(r.id) + " still assigned");
            continue;
        }
        if (r.assigned == kUnassigned) {
            if (r.picked_up || r.dropped_off)
                out.push_back("request " + std::to_string(r.id) + " served while unassigned");
            continue;
        }
        ++assigned_count;
        if (r.dropped_off && !r.picked_up)
            out.push_back("request " + std::to_string(r.id) + " dropped off before pickup");
        int pick_stops = 0, drop_stops = 0, elsewhere = 0;
        for (const Route& route : state.routes) {
            for (const Stop& stop : route.stops) {
                if (stop.request != r.id) continue;
                if (route.robot == r.assigned) {
                    pick_stops += stop.kind == StopKind::Pickup;
                    drop_stops += stop.kind == StopKind::Dropoff;
                } else {
                    ++elsewhere;
                }
            }
        }
        if (pick_stops != 1 || drop_stops != 1)
            out.push_back("request " + std::to_string(r.id) +
                          " must appear exactly once on its robot's route");
        if (elsewhere != 0)
            out.push_back("request " + std::to_string(r.id) + " appears on a foreign route");
    }
    if (assigned_count + rejected_count >
        state.requests.size())
        out.push_back("assignment accounting exceeds entered requests");

    // Load accounting from executed stops.
    for (std::size_t m = 0; m < state.routes.size(); ++m) {
        int load = 0;
        for (std::size_t i = 0; i < state.routes[m].traversed; ++i) {
            const Stop& stop = state.routes[m].stops[i];
            load += stop.kind == StopKind::Pickup;
            load -= stop.kind == StopKind::Dropoff;
        }
        if (load != state.loads[m])
            out.push_back("robot " + std::to_string(m) + " load mismatch");
        if (load > config.capacity)
            out.push_back("robot " + std::to_string(m) + " above capacity");
    }
    return out;
}

SynthSpec SynthSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open synthetic spec: " + path);
    return parse(in, path);
}

SynthSpec SynthSpec::parse(std::istream& in, const std::string& source_name) {
    SynthSpec spec;
    spec.hourly_rates.clear();
    std::string line;
    int line_no = 0;
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
        if (tag == "days") {
            if (!(fields >> spec.n_days) || spec.n_days < 1) fail("expected 'days <n>'");
        } else if (tag == "seed") {
            if (!(fields >> spec.seed)) fail("expected 'seed <n>'");
        } else if (tag == "start-date") {
            if (!(fields >> spec.start_date)) fail("expected 'start-date <YYYY-MM-DD>'");
        } else if (tag == "rate") {
            int hour;
            double rate;
            if (!(fields >> hour >> rate) || hour < 0 || hour > 23 || rate < 0.0)
                fail("expected 'rate <hour> <mean>'");
            spec.hourly_rates.emplace_back(hour, rate);
        } else if (tag == "pickup") {
            NodeId node;
            double weight;
            if (!(fields >> node >> weight) || weight < 0.0)
                fail("expected 'pickup <node> <weight>'");
            spec.pickup_weights.emplace_back(node, weight);
        } else if (tag == "dropoff") {
            NodeId node;
            double weight;
            if (!(fields >> node >> weight) || weight < 0.0)
                fail("expected 'dropoff <node> <weight>'");
            spec.dropoff_weights.emplace_back(node, weight);
        } else if (tag == "lead") {
            if (!(fields >> spec.lead_min >> spec.lead_max) || spec.lead_min < 1 ||
                spec.lead_max < spec.lead_min)
                fail("expected 'lead <min> <max>'");
        } else if (tag == "scheduled-fraction") {
            if (!(fields >> spec.scheduled_fraction) || spec.scheduled_fraction < 0.0 ||
                spec.scheduled_fraction > 1.0)
                fail("expected 'scheduled-fraction <0..1>'");
        } else {
            fail("unknown record '" + tag + "'");
        }
    }
    return spec;
}

void SynthSpec::validate(const StreetGraph& graph, const ProblemConfig& config) const {
    if (pickup_weights.empty() || dropoff_weights.empty())
        throw InputError("synthetic spec needs pickup and dropoff weights");
    double pick_total = 0.0, drop_total = 0.0;
    for (const auto& [node, w] : pickup_weights) {
        if (!graph.has_node(node))
            throw InputError("pickup weight references unknown node " + std::to_string(node));
        pick_total += w;
    }
    for (const auto& [node, w] : dropoff_weights) {
        if (!graph.has_node(node))
            throw InputError("dropoff weight references unknown node " + std::to_string(node));
        drop_total += w;
    }
    if (pick_total <= 0.0 || drop_total <= 0.0)
        throw InputError("synthetic spec weights must not all be zero");
    if (dropoff_weights.size() == 1 && pickup_weights.size() == 1 &&
        dropoff_weights.front().first == pickup_weights.front().first)
        throw InputError("pickup and dropoff cannot be pinned to the same single node");
    (void)config;
}

std::vector<DayLog> generate_synthetic_history(const SynthSpec& spec, const StreetGraph& graph,
                                               const ProblemConfig& config) {
    spec.validate(graph, config);
    std::vector<double> pick_w, drop_w;
    for (const auto& [node, w] : spec.pickup_weights) pick_w.push_back(w);
    for (const auto& [node, w] : spec.dropoff_weights) drop_w.push_back(w);

    std::vector<DayLog> days;
    days.reserve(static_cast<std::size_t>(spec.n_days));
    std::string date = spec.start_date;
    for (int d = 0; d < spec.n_days; ++d) {
        Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(d)));
        DayLog day;
        day.info.date = date;
        day.info.weekday = weekday_of(date);
        day.info.month = month_of(date);

        std::vector<Request> requests;
        for (const auto& [hour, rate] : spec.hourly_rates) {
            const Seconds hour_start = static_cast<Seconds>(hour) * 3600;
            const Seconds window_lo = std::max(hour_start, config.t_start);
            const Seconds window_hi = std::min(hour_start + 3600, config.t_end);
            if (window_lo >= window_hi) continue;
            const long long count = rng.poisson(rate);
            for (long long i = 0; i < count; ++i) {
                Request r;
                r.entry_time = window_lo + rng.range(0, window_hi - window_lo - 1);
                r.desired_pickup_time = r.entry_time + rng.range(spec.lead_min, spec.lead_max);
                if (spec.scheduled_fraction > 0.0 && rng.unit() < spec.scheduled_fraction) {
                    // Booked ahead of the horizon; keeps its desired time.
                    r.entry_time = config.t_start - 1 - rng.range(0, 3599);
                }
                if (r.desired_pickup_time > config.t_last ||
                    r.desired_pickup_time < config.t_start)
                    continue;
                if (r.entry_time >= r.desired_pickup_time) continue;
                r.pickup = spec.pickup_weights[rng.weighted(pick_w)].first;
                do {
                    r.dropoff = spec.dropoff_weights[rng.weighted(drop_w)].first;
                } while (r.dropoff == r.pickup);
                requests.push_back(r);
            }
        }
        std::stable_sort(requests.begin(), requests.end(), [](const Request& a, const Request& b) {
            return a.entry_time < b.entry_time;
        });
        for (std::size_t i = 0; i < requests.size(); ++i) {
            requests[i].id = static_cast<RequestId>(i + 1);
            requests[i].arrival_seq = static_cast<int>(i);
        }
        day.requests = std::move(requests);
        days.push_back(std::move(day));
        date = add_days(date, 1);
    }
    return days;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const TravelTimeOracle& oracle) {
    struct Task {
        PolicyKind policy;
        int fleet;
        std::size_t day_index;
    };
    std::vector<Task> tasks;
    for (PolicyKind policy : config.policies)
        for (int fleet : config.fleet_sizes)
            for (std::size_t d = 0; d < config.test_days.size(); ++d)
                tasks.push_back(Task{policy, fleet, d});

    // Demand model shared across tasks; each task builds its own provider
    // so scenario caches stay thread-local.
    std::unique_ptr<ConditionalHistograms> histograms;
    std::unique_ptr<CountForecaster> forecaster;
    const bool needs_rollout =
        std::find(config.policies.begin(), config.policies.end(), PolicyKind::Rollout) !=
        config.policies.end();
    const bool oracle_forecaster = config.forecaster == "oracle";
    if (needs_rollout && !oracle_forecaster) {
        if (config.train_days.empty())
            throw ConfigError("rollout with a fitted forecaster needs training days");
        histograms =
            std::make_unique<ConditionalHistograms>(ConditionalHistograms::build(config.train_days));
        if (config.forecaster == "histmean") {
            forecaster = std::make_unique<HistoricalMeanForecaster>(config.train_days,
                                                                    config.demand, config.problem);
        } else if (config.forecaster == "bootstrap") {
            forecaster = std::make_unique<BootstrapForecaster>(config.train_days, config.demand,
                                                               config.problem);
        } else if (config.forecaster.rfind("file:", 0) == 0) {
            forecaster =
                std::make_unique<FileForecaster>(config.forecaster.substr(5), config.demand);
        } else {
            throw ConfigError("unknown forecaster '" + config.forecaster + "'");
        }
    }

    std::vector<DayMetrics> rows(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const Task& task = tasks[i];
            ProblemConfig problem = config.problem;
            problem.fleet_size = task.fleet;
            std::unique_ptr<ScenarioProvider> provider;
            if (task.policy == PolicyKind::Rollout) {
                if (oracle_forecaster) {
                    provider = std::make_unique<OracleScenarioProvider>(config.rollout.horizon);
                } else {
                    provider = std::make_unique<DemandScenarioProvider>(
                        *histograms, *forecaster, config.demand, problem,
                        config.rollout.n_scenarios, Rng::mix(config.seed, task.day_index));
                }
            }
            try {
                rows[i] = simulate_day(config.test_days[task.day_index], task.policy, problem,
                                       config.rollout, config.cluster, oracle, provider.get(),
                                       config.options);
            } catch (const std::exception& err) {
                // Partial-failure policy: record and continue the sweep.
                DayMetrics failed;
                failed.date = config.test_days[task.day_index].info.date;
                failed.policy = policy_name(task.policy);
                failed.fleet = task.fleet;
                failed.entered = -1;
                rows[i] = failed;
                errors[i] = err.what();
            }
        }
    };
    int jobs = config.jobs > 0 ? config.jobs
                               : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    ExperimentResult result;
    result.rows = std::move(rows);
    return result;
}

void write_metrics_csv(std::ostream& out, const std::vector<DayMetrics>& rows) {
    out << "date,policy,fleet,avg_wait_pick,avg_trip,pct_rejected,total_cost,mean_plan_time\n";
    char buf[160];
    for (const DayMetrics& m : rows) {
        std::snprintf(buf, sizeof buf, "%.3f,%.3f,%.3f,%lld,%.6f", m.avg_wait_pick, m.avg_trip,
                      m.pct_rejected, static_cast<long long>(m.total_cost), m.mean_plan_time);
        out << m.date << ',' << m.policy << ',' << m.fleet << ',' << buf << '\n';
    }
}

void write_summary(std::ostream& out, const std::vector<DayMetrics>& rows) {
    struct Agg {
        int days = 0;
        long long entered = 0, rejected = 0;
        double wait = 0.0, trip = 0.0;
    };
    std::map<std::pair<std::string, int>, Agg> groups;
    for (const DayMetrics& m : rows) {
        Agg& agg = groups[{m.policy, m.fleet}];
        agg.days += 1;
        agg.entered += m.entered;
        agg.rejected += m.rejected;
        agg.wait += m.avg_wait_pick;
        agg.trip += m.avg_trip;
    }
    char buf[200];
    for (const auto& [key, agg] : groups) {
        std::snprintf(buf, sizeof buf,
                      "policy %s fleet %d days %d entered %lld rejected %lld "
                      "mean_wait %.3f mean_trip %.3f",
                      key.first.c_str(), key.second, agg.days, agg.entered, agg.rejected,
                      agg.days > 0 ? agg.wait / agg.days : 0.0,
                      agg.days > 0 ? agg.trip / agg.days : 0.0);
        out << buf << '\n';
    }
}

DayRunner make_day_runner(PolicyKind policy, const ProblemConfig& config,
                          const RolloutConfig& rollout, const ClusterParams& cluster,
                          const TravelTimeOracle& oracle,
                          const std::function<ScenarioProvider*()>& provider_factory) {
    return [=, &oracle](const DayLog& day, int fleet) -> int {
        ProblemConfig problem = config;
        problem.fleet_size = fleet;
        std::unique_ptr<ScenarioProvider> provider;
        if (policy == PolicyKind::Rollout) provider.reset(provider_factory());
        DayMetrics metrics = simulate_day(day, policy, problem, rollout, cluster, oracle,
                                          provider.get(), SimOptions{});
        return metrics.rejected;
    };
}

int weekday_of(const std::string& date) {
    int y = std::stoi(date.substr(0, 4));
    int m = std::stoi(date.substr(5, 2));
    int d = std::stoi(date.substr(8, 2));
    // Sakamoto, shifted so 0 = Monday.
    static const int offsets[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
    if (m < 3) y -= 1;
    int w = (y + y / 4 - y / 100 + y / 400 + offsets[m - 1] + d) % 7;  // 0 = Sunday
    return (w + 6) % 7;
}

int month_of(const std::string& date) { return std::stoi(date.substr(5, 2)); }

std::string add_days(const std::string& date, int days) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int y = std::stoi(date.substr(0, 4));
    int m = std::stoi(date.substr(5, 2));
    int d = std::stoi(date.substr(8, 2));
    for (int i = 0; i < days; ++i) {
        int len = lengths[m - 1];
        if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) len = 29;
        if (++d > len) {
            d = 1;
            if (++m > 12) {
                m = 1;
                ++y;
            }
        }
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return std::string(buf);
}

}  // namespace ridepool
