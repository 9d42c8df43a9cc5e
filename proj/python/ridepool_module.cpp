#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ridepool/simharness.hpp"

namespace py = pybind11;
using namespace ridepool;

namespace {

py::dict metrics_to_dict(const DayMetrics& m) {
    py::dict d;
    d["date"] = m.date;
    d["policy"] = m.policy;
    d["fleet"] = m.fleet;
    d["entered"] = m.entered;
    d["serviced"] = m.serviced;
    d["rejected"] = m.rejected;
    d["avg_wait_pick"] = m.avg_wait_pick;
    d["avg_trip"] = m.avg_trip;
    d["pct_rejected"] = m.pct_rejected;
    d["total_cost"] = m.total_cost;
    d["mean_plan_time"] = m.mean_plan_time;
    py::list outcomes;
    for (const RequestOutcome& o : m.outcomes) {
        py::dict row;
        row["id"] = o.id;
        row["wait_pick"] = o.wait_pick;
        row["wait_drop"] = o.wait_drop;
        row["trip"] = o.trip;
        row["rejected"] = o.rejected;
        outcomes.append(row);
    }
    d["outcomes"] = outcomes;
    return d;
}

PolicyKind parse_policy(const std::string& name) {
    if (name == "greedy" || name == "greedy-wt") return PolicyKind::Greedy;
    if (name == "rollout") return PolicyKind::Rollout;
    throw ConfigError("unknown policy '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(ridepool, m) {
    m.doc() = "multi-capacity pickup-and-delivery routing engine";

    py::register_exception<InputError>(m, "InputError");
    py::register_exception<ConfigError>(m, "ConfigurationError");
    py::register_exception<InfeasibleError>(m, "InfeasibleError");

    py::class_<StreetGraph>(m, "StreetGraph")
        .def_static("load", &StreetGraph::load, py::arg("path"))
        .def_property_readonly("node_count", &StreetGraph::node_count)
        .def_property_readonly("edge_count", &StreetGraph::edge_count);

    py::class_<TravelTimeOracle>(m, "TravelTimeOracle")
        .def(py::init<const StreetGraph&>(), py::keep_alive<1, 2>())
        .def("time", &TravelTimeOracle::time, py::arg("origin"), py::arg("destination"))
        .def("path", &TravelTimeOracle::path, py::arg("origin"), py::arg("destination"),
             py::return_value_policy::copy)
        .def("diameter", &TravelTimeOracle::diameter);

    py::class_<ProblemConfig>(m, "ProblemConfig")
        .def(py::init<>())
        .def_readwrite("t_start", &ProblemConfig::t_start)
        .def_readwrite("t_end", &ProblemConfig::t_end)
        .def_readwrite("t_last", &ProblemConfig::t_last)
        .def_readwrite("w_pick", &ProblemConfig::w_pick)
        .def_readwrite("w_drop", &ProblemConfig::w_drop)
        .def_readwrite("capacity", &ProblemConfig::capacity)
        .def_readwrite("depots", &ProblemConfig::depots)
        .def_readwrite("fleet_size", &ProblemConfig::fleet_size)
        .def("validate", &ProblemConfig::validate);

    py::class_<RolloutConfig>(m, "RolloutConfig")
        .def(py::init<>())
        .def_readwrite("horizon", &RolloutConfig::horizon)
        .def_readwrite("n_scenarios", &RolloutConfig::n_scenarios)
        .def_readwrite("n_routes", &RolloutConfig::n_routes)
        .def_readwrite("seed", &RolloutConfig::seed);

    py::class_<DayLog>(m, "DayLog")
        .def_property_readonly("date", [](const DayLog& d) { return d.info.date; })
        .def_property_readonly("size", [](const DayLog& d) { return d.requests.size(); });

    m.def("load_day_log", &load_day_log, py::arg("path"), py::arg("config"));
    m.def("load_history_dir",
          [](const std::string& dir, const ProblemConfig& config) {
              return load_history(list_history_files(dir), config);
          },
          py::arg("directory"), py::arg("config"));

    m.def(
        "simulate_day",
        [](const DayLog& day, const std::string& policy, const ProblemConfig& problem,
           const RolloutConfig& rollout, const TravelTimeOracle& oracle,
           const std::vector<DayLog>& history, const std::string& forecaster, bool debug_checks) {
            ClusterParams cluster;
            DemandConfig demand;
            SimOptions options;
            options.debug_checks = debug_checks;
            PolicyKind kind = parse_policy(policy);
            std::unique_ptr<ConditionalHistograms> histograms;
            std::unique_ptr<CountForecaster> fc;
            std::unique_ptr<ScenarioProvider> provider;
            if (kind == PolicyKind::Rollout) {
                if (forecaster == "oracle") {
                    provider = std::make_unique<OracleScenarioProvider>(rollout.horizon);
                } else {
                    if (history.empty())
                        throw ConfigError("rollout needs history days (or forecaster='oracle')");
                    histograms = std::make_unique<ConditionalHistograms>(
                        ConditionalHistograms::build(history));
                    if (forecaster == "histmean") {
                        fc = std::make_unique<HistoricalMeanForecaster>(history, demand, problem);
                    } else if (forecaster == "bootstrap") {
                        fc = std::make_unique<BootstrapForecaster>(history, demand, problem);
                    } else {
                        throw ConfigError("unknown forecaster '" + forecaster + "'");
                    }
                    provider = std::make_unique<DemandScenarioProvider>(
                        *histograms, *fc, demand, problem, rollout.n_scenarios, rollout.seed);
                }
            }
            DayMetrics metrics = simulate_day(day, kind, problem, rollout, cluster, oracle,
                                              provider.get(), options);
            return metrics_to_dict(metrics);
        },
        py::arg("day"), py::arg("policy"), py::arg("problem"), py::arg("rollout"),
        py::arg("oracle"), py::arg("history") = std::vector<DayLog>{},
        py::arg("forecaster") = "histmean", py::arg("debug_checks") = false,
        "Replay one day under a policy; returns the metrics as a dict.");

    m.def(
        "single_pass",
        [](const std::vector<DayLog>& history, const ProblemConfig& config,
           const TravelTimeOracle& oracle) {
            FleetSizingReport report = single_pass(history, config, oracle);
            py::dict d;
            d["fleet"] = report.fleet;
            py::list days;
            for (const DaySizing& s : report.per_day) {
                days.append(py::make_tuple(s.date, s.size));
            }
            d["per_day"] = days;
            return d;
        },
        py::arg("history"), py::arg("config"), py::arg("oracle"));

    m.def(
        "restart_and_optimize",
        [](const std::vector<DayLog>& history, int m_max, const ProblemConfig& config,
           const TravelTimeOracle& oracle) {
            FleetSizingReport report = restart_and_optimize(history, m_max, config, oracle);
            py::dict d;
            d["fleet"] = report.fleet;
            py::list days;
            for (const DaySizing& s : report.per_day) {
                days.append(py::make_tuple(s.date, s.size));
            }
            d["per_day"] = days;
            return d;
        },
        py::arg("history"), py::arg("m_max"), py::arg("config"), py::arg("oracle"));

    m.def(
        "replay_day_greedy",
        [](const DayLog& day, int fleet, const ProblemConfig& config,
           const TravelTimeOracle& oracle) {
            return replay_day_greedy(day, fleet, config, oracle);
        },
        py::arg("day"), py::arg("fleet"), py::arg("config"), py::arg("oracle"),
        "Rejected request ids for one greedy replay at a fixed fleet size.");

    m.def(
        "sample_scenarios",
        [](const std::vector<DayLog>& history, const std::string& date, int hour, int n,
           std::uint64_t seed, const ProblemConfig& problem) {
            DemandConfig demand;
            auto histograms = ConditionalHistograms::build(history);
            HistoricalMeanForecaster forecaster(history, demand, problem);
            std::vector<DemandContext> contexts;
            for (int k = 0; k < demand.intervals_per_hour; ++k) {
                DemandContext ctx;
                ctx.date = date;
                ctx.month = month_of(date);
                ctx.weekday = weekday_of(date);
                ctx.hour = hour % 24;
                ctx.interval = k;
                contexts.push_back(ctx);
            }
            std::vector<int> observed(static_cast<std::size_t>(demand.intervals_per_hour), 0);
            Rng rng(seed);
            CountForecast forecast = forecaster.forecast(observed, contexts, rng);
            auto scenarios = sample_scenarios(forecast, histograms, contexts,
                                              static_cast<Seconds>(hour) * 3600, demand, problem,
                                              seed, n);
            py::list out;
            for (const Scenario& s : scenarios) {
                py::list reqs;
                for (const Request& r : s.requests) {
                    py::dict row;
                    row["entry"] = r.entry_time;
                    row["desired"] = r.desired_pickup_time;
                    row["pickup"] = r.pickup;
                    row["dropoff"] = r.dropoff;
                    reqs.append(row);
                }
                out.append(reqs);
            }
            return out;
        },
        py::arg("history"), py::arg("date"), py::arg("hour"), py::arg("n"), py::arg("seed"),
        py::arg("problem"),
        "Sample future-request scenarios from the fitted demand model.");

    m.def(
        "generate_synthetic_history",
        [](const std::string& spec_path, const StreetGraph& graph, const ProblemConfig& config) {
            return generate_synthetic_history(SynthSpec::load(spec_path), graph, config);
        },
        py::arg("spec_path"), py::arg("graph"), py::arg("config"));

    m.def("write_day_log", &write_day_log, py::arg("day"), py::arg("path"));
}
