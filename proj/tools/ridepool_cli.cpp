#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "ridepool/configfile.hpp"
#include "ridepool/simharness.hpp"

namespace rp = ridepool;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;

struct CommonOptions {
    std::string graph_path;
    std::string config_path;
    // -1 sentinels mean "not set on the command line".
    long long t_start = -1, t_end = -1, t_last = -1;
    long long w_pick = -1, w_drop = -1;
    long long capacity = -1, fleet = -1;
    std::vector<long long> depots;
    long long seed = -1;
    long long jobs = -1;
    long long horizon = -1, n_scenarios = -1, n_routes = -1;
    long long intervals = -1;
    long long min_cluster = -1;
    std::string forecaster;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt, bool with_rollout) {
    cmd->add_option("--graph", opt.graph_path, "street-network graph file")->required();
    cmd->add_option("--config", opt.config_path, "key = value config file");
    cmd->add_option("--t-start", opt.t_start, "horizon start, seconds");
    cmd->add_option("--t-end", opt.t_end, "horizon end, seconds");
    cmd->add_option("--t-last", opt.t_last, "latest allowed desired pickup, seconds");
    cmd->add_option("--wpick", opt.w_pick, "max pickup wait, seconds");
    cmd->add_option("--wdrop", opt.w_drop, "max on-board wait, seconds");
    cmd->add_option("--capacity", opt.capacity, "robot capacity");
    cmd->add_option("--fleet", opt.fleet, "fleet size");
    cmd->add_option("--depot", opt.depots, "depot node id (repeatable)");
    cmd->add_option("--seed", opt.seed, "random seed");
    cmd->add_option("--jobs", opt.jobs, "worker threads (default: all cores)");
    if (with_rollout) {
        cmd->add_option("--horizon", opt.horizon, "rollout lookahead, seconds");
        cmd->add_option("--scenarios", opt.n_scenarios, "sampled futures per decision");
        cmd->add_option("--routes", opt.n_routes, "candidate controls per request");
        cmd->add_option("--intervals", opt.intervals, "forecast intervals per hour");
        cmd->add_option("--min-cluster", opt.min_cluster, "minimum swap-cluster size");
        cmd->add_option("--forecaster", opt.forecaster,
                        "histmean | bootstrap | oracle | file:<path>");
    }
}

struct Resolved {
    rp::ProblemConfig problem;
    rp::RolloutConfig rollout;
    rp::ClusterParams cluster;
    rp::DemandConfig demand;
    std::string forecaster = "histmean";
    std::uint64_t seed = 0;
    int jobs = 0;
};

// Built-in defaults, overridden by the config file, overridden by flags.
Resolved resolve(const CommonOptions& opt) {
    rp::ConfigFile file;
    if (!opt.config_path.empty()) file = rp::ConfigFile::load(opt.config_path);

    Resolved r;
    r.problem.t_start = opt.t_start >= 0 ? opt.t_start : file.get_int("problem.t_start", 68400);
    r.problem.t_end = opt.t_end >= 0 ? opt.t_end : file.get_int("problem.t_end", 97200);
    r.problem.t_last = opt.t_last >= 0 ? opt.t_last : file.get_int("problem.t_last", -1);
    r.problem.w_pick = opt.w_pick >= 0 ? opt.w_pick : file.get_int("problem.w_pick", 900);
    r.problem.w_drop = opt.w_drop >= 0 ? opt.w_drop : file.get_int("problem.w_drop", 900);
    r.problem.capacity =
        static_cast<int>(opt.capacity >= 0 ? opt.capacity : file.get_int("problem.capacity", 16));
    r.problem.fleet_size =
        static_cast<int>(opt.fleet >= 0 ? opt.fleet : file.get_int("problem.fleet", 3));
    if (!opt.depots.empty()) {
        for (long long d : opt.depots) r.problem.depots.push_back(static_cast<rp::NodeId>(d));
    } else {
        std::istringstream list(file.get("problem.depots", "1"));
        std::string item;
        while (std::getline(list, item, ','))
            if (!item.empty()) r.problem.depots.push_back(std::stoi(item));
    }

    r.rollout.horizon = opt.horizon >= 0 ? opt.horizon : file.get_int("rollout.horizon", 3600);
    r.rollout.n_scenarios = static_cast<int>(
        opt.n_scenarios >= 0 ? opt.n_scenarios : file.get_int("rollout.scenarios", 20));
    r.rollout.n_routes =
        static_cast<int>(opt.n_routes >= 0 ? opt.n_routes : file.get_int("rollout.routes", 15));

    r.demand.intervals_per_hour = static_cast<int>(
        opt.intervals >= 0 ? opt.intervals : file.get_int("demand.intervals", 12));
    r.demand.scenario_lead = file.get_int("demand.lead", 60);

    r.cluster.min_cluster_size = static_cast<int>(
        opt.min_cluster >= 0 ? opt.min_cluster : file.get_int("cluster.min_size", 2));
    const std::string algo = file.get("cluster.algo", "hdbscan");
    if (algo == "hdbscan") {
        r.cluster.algo = rp::ClusterAlgo::Hdbscan;
    } else if (algo == "single-linkage") {
        r.cluster.algo = rp::ClusterAlgo::SingleLinkage;
        r.cluster.linkage_threshold = file.get_double("cluster.linkage_threshold", 1.0);
    } else {
        throw rp::ConfigError("unknown cluster.algo '" + algo + "'");
    }

    r.forecaster = !opt.forecaster.empty() ? opt.forecaster
                                           : file.get("experiment.forecaster", "histmean");
    r.seed = static_cast<std::uint64_t>(opt.seed >= 0 ? opt.seed
                                                      : file.get_int("experiment.seed", 0));
    r.jobs = static_cast<int>(opt.jobs >= 0 ? opt.jobs : file.get_int("experiment.jobs", 0));
    r.rollout.seed = r.seed;
    return r;
}

// t_last defaults to the latest time that still leaves the Assumption-2
// buffer before t_end.
void finalize_problem(rp::ProblemConfig& problem, const rp::TravelTimeOracle& oracle) {
    if (problem.t_last < 0) problem.t_last = problem.t_end - 3 * oracle.diameter();
    problem.validate(oracle);
}

std::vector<rp::DayLog> load_history_dir(const std::string& dir, const rp::ProblemConfig& config) {
    return rp::load_history(rp::list_history_files(dir), config);
}

std::unique_ptr<rp::CountForecaster> build_forecaster(const std::string& name,
                                                      const std::vector<rp::DayLog>& history,
                                                      const rp::DemandConfig& demand,
                                                      const rp::ProblemConfig& problem) {
    if (name == "histmean")
        return std::make_unique<rp::HistoricalMeanForecaster>(history, demand, problem);
    if (name == "bootstrap")
        return std::make_unique<rp::BootstrapForecaster>(history, demand, problem);
    if (name.rfind("file:", 0) == 0)
        return std::make_unique<rp::FileForecaster>(name.substr(5), demand);
    throw rp::ConfigError("unknown forecaster '" + name + "'");
}

std::ostream& open_or_stdout(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw rp::InputError("cannot write to " + path);
    return file;
}

int cmd_validate(const CommonOptions& opt, const std::string& requests_path) {
    rp::StreetGraph graph = rp::StreetGraph::load(opt.graph_path);
    rp::TravelTimeOracle oracle(graph);
    Resolved r = resolve(opt);
    finalize_problem(r.problem, oracle);
    r.demand.validate();
    if (!r.problem.depots_cover_graph(oracle))
        std::cerr << "warning: some nodes are farther than w_pick from every depot; "
                     "fleet sizing will fail on requests there\n";
    if (!requests_path.empty()) {
        rp::DayLog day = rp::load_day_log(requests_path, r.problem);
        for (const rp::Request& req : day.requests) {
            if (!graph.has_node(req.pickup) || !graph.has_node(req.dropoff))
                throw rp::InputError("request " + std::to_string(req.id) +
                                     " references a node outside the graph");
        }
        std::cout << "ok: graph with " << graph.node_count() << " nodes, "
                  << day.requests.size() << " requests\n";
    } else {
        std::cout << "ok: graph with " << graph.node_count() << " nodes\n";
    }
    return kExitOk;
}

int cmd_simulate(const CommonOptions& opt, const std::string& day_path,
                 const std::string& policy_name, const std::string& history_dir,
                 const std::string& out_path, bool timing, bool debug_checks) {
    rp::StreetGraph graph = rp::StreetGraph::load(opt.graph_path);
    rp::TravelTimeOracle oracle(graph);
    Resolved r = resolve(opt);
    finalize_problem(r.problem, oracle);
    r.demand.validate();
    r.rollout.validate();

    rp::PolicyKind policy;
    if (policy_name == "greedy" || policy_name == "greedy-wt") {
        policy = rp::PolicyKind::Greedy;
    } else if (policy_name == "rollout") {
        policy = rp::PolicyKind::Rollout;
    } else {
        throw rp::ConfigError("unknown policy '" + policy_name + "' (greedy | rollout)");
    }

    rp::DayLog day = rp::load_day_log(day_path, r.problem);

    std::unique_ptr<rp::ConditionalHistograms> histograms;
    std::unique_ptr<rp::CountForecaster> forecaster;
    std::unique_ptr<rp::ScenarioProvider> provider;
    if (policy == rp::PolicyKind::Rollout) {
        if (r.forecaster == "oracle") {
            provider = std::make_unique<rp::OracleScenarioProvider>(r.rollout.horizon);
        } else {
            if (history_dir.empty())
                throw rp::ConfigError("rollout needs --history for the demand model "
                                      "(or --forecaster oracle)");
            auto history = load_history_dir(history_dir, r.problem);
            histograms = std::make_unique<rp::ConditionalHistograms>(
                rp::ConditionalHistograms::build(history));
            forecaster = build_forecaster(r.forecaster, history, r.demand, r.problem);
            provider = std::make_unique<rp::DemandScenarioProvider>(
                *histograms, *forecaster, r.demand, r.problem, r.rollout.n_scenarios, r.seed);
        }
    }

    rp::SimOptions options;
    options.measure_time = timing;
    options.debug_checks = debug_checks;
    rp::DayMetrics metrics = rp::simulate_day(day, policy, r.problem, r.rollout, r.cluster,
                                              oracle, provider.get(), options);

    std::ofstream file;
    std::ostream& out = open_or_stdout(file, out_path);
    rp::write_metrics_csv(out, {metrics});
    return kExitOk;
}

int cmd_fleet_size(const CommonOptions& opt, const std::string& algo,
                   const std::string& history_dir, long long m_max,
                   const std::string& out_path) {
    rp::StreetGraph graph = rp::StreetGraph::load(opt.graph_path);
    rp::TravelTimeOracle oracle(graph);
    Resolved r = resolve(opt);
    finalize_problem(r.problem, oracle);
    auto history = load_history_dir(history_dir, r.problem);

    rp::FleetSizingReport report;
    if (algo == "single-pass") {
        report = rp::single_pass(history, r.problem, oracle);
    } else if (algo == "restart") {
        report = rp::restart_and_optimize(history, static_cast<int>(m_max), r.problem, oracle);
    } else {
        throw rp::ConfigError("unknown sizing algorithm '" + algo + "' (single-pass | restart)");
    }

    std::ofstream file;
    std::ostream& out = open_or_stdout(file, out_path);
    for (const rp::DaySizing& day : report.per_day)
        out << "day " << day.date << " size " << day.size << '\n';
    out << "fleet " << report.fleet << '\n';
    return kExitOk;
}

int cmd_sample_demand(const CommonOptions& opt, const std::string& history_dir,
                      const std::string& date, long long hour, long long n,
                      const std::string& out_path) {
    rp::StreetGraph graph = rp::StreetGraph::load(opt.graph_path);
    rp::TravelTimeOracle oracle(graph);
    Resolved r = resolve(opt);
    finalize_problem(r.problem, oracle);
    r.demand.validate();
    auto history = load_history_dir(history_dir, r.problem);
    auto histograms = rp::ConditionalHistograms::build(history);
    auto forecaster = build_forecaster(r.forecaster, history, r.demand, r.problem);

    std::vector<rp::DemandContext> contexts;
    for (int k = 0; k < r.demand.intervals_per_hour; ++k) {
        rp::DemandContext ctx;
        ctx.date = date;
        ctx.month = rp::month_of(date);
        ctx.weekday = rp::weekday_of(date);
        ctx.hour = static_cast<int>(hour % 24);
        ctx.interval = k;
        contexts.push_back(ctx);
    }
    std::vector<int> observed(static_cast<std::size_t>(r.demand.intervals_per_hour), 0);
    rp::Rng rng(r.seed);
    rp::CountForecast forecast = forecaster->forecast(observed, contexts, rng);
    auto scenarios = rp::sample_scenarios(forecast, histograms, contexts, hour * 3600, r.demand,
                                          r.problem, r.seed, static_cast<int>(n));

    std::ofstream file;
    std::ostream& out = open_or_stdout(file, out_path);
    for (std::size_t l = 0; l < scenarios.size(); ++l) {
        for (const rp::Request& req : scenarios[l].requests) {
            out << "scenario " << l << " request " << req.id << ' ' << req.entry_time << ' '
                << req.desired_pickup_time << ' ' << req.pickup << ' ' << req.dropoff << '\n';
        }
    }
    return kExitOk;
}

int cmd_gen_history(const CommonOptions& opt, const std::string& spec_path,
                    const std::string& out_dir, long long days_override,
                    long long seed_override) {
    rp::StreetGraph graph = rp::StreetGraph::load(opt.graph_path);
    rp::TravelTimeOracle oracle(graph);
    Resolved r = resolve(opt);
    finalize_problem(r.problem, oracle);

    rp::SynthSpec spec = rp::SynthSpec::load(spec_path);
    if (days_override > 0) spec.n_days = static_cast<int>(days_override);
    if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);

    auto days = rp::generate_synthetic_history(spec, graph, r.problem);
    std::filesystem::create_directories(out_dir);
    for (std::size_t i = 0; i < days.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "day_%04zu.txt", i + 1);
        rp::write_day_log(days[i], (std::filesystem::path(out_dir) / name).string());
    }
    std::cout << "wrote " << days.size() << " day logs to " << out_dir << '\n';
    return kExitOk;
}

int cmd_experiment(const CommonOptions& opt, const std::string& train_dir,
                   const std::string& test_dir, const std::string& policies_arg,
                   const std::string& fleets_arg, const std::string& out_csv,
                   const std::string& out_summary, bool timing) {
    rp::StreetGraph graph = rp::StreetGraph::load(opt.graph_path);
    rp::TravelTimeOracle oracle(graph);
    Resolved r = resolve(opt);
    finalize_problem(r.problem, oracle);
    r.demand.validate();
    r.rollout.validate();

    rp::ConfigFile file;
    if (!opt.config_path.empty()) file = rp::ConfigFile::load(opt.config_path);

    rp::ExperimentConfig experiment;
    experiment.problem = r.problem;
    experiment.rollout = r.rollout;
    experiment.cluster = r.cluster;
    experiment.demand = r.demand;
    experiment.forecaster = r.forecaster;
    experiment.seed = r.seed;
    experiment.jobs = r.jobs;
    experiment.options.measure_time = timing;

    const std::string train =
        !train_dir.empty() ? train_dir : file.get("experiment.train_dir", "");
    const std::string test = !test_dir.empty() ? test_dir : file.get("experiment.test_dir", "");
    if (test.empty()) throw rp::ConfigError("experiment needs a test-day directory");
    if (!train.empty()) experiment.train_days = load_history_dir(train, r.problem);
    experiment.test_days = load_history_dir(test, r.problem);

    const std::string policies =
        !policies_arg.empty() ? policies_arg : file.get("experiment.policies", "greedy,rollout");
    std::istringstream plist(policies);
    std::string item;
    while (std::getline(plist, item, ',')) {
        if (item == "greedy" || item == "greedy-wt") {
            experiment.policies.push_back(rp::PolicyKind::Greedy);
        } else if (item == "rollout") {
            experiment.policies.push_back(rp::PolicyKind::Rollout);
        } else if (!item.empty()) {
            throw rp::ConfigError("unknown policy '" + item + "'");
        }
    }
    const std::string fleets = !fleets_arg.empty()
                                   ? fleets_arg
                                   : file.get("experiment.fleets",
                                              std::to_string(r.problem.fleet_size));
    std::istringstream flist(fleets);
    while (std::getline(flist, item, ',')) {
        if (!item.empty()) experiment.fleet_sizes.push_back(std::stoi(item));
    }
    if (experiment.policies.empty() || experiment.fleet_sizes.empty())
        throw rp::ConfigError("experiment needs at least one policy and one fleet size");

    rp::ExperimentResult result = rp::run_experiment(experiment, oracle);

    std::ofstream csv_file;
    std::ostream& csv = open_or_stdout(csv_file, out_csv);
    rp::write_metrics_csv(csv, result.rows);
    if (!out_summary.empty()) {
        std::ofstream summary(out_summary);
        if (!summary) throw rp::InputError("cannot write to " + out_summary);
        rp::write_summary(summary, result.rows);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-capacity pickup-and-delivery routing engine"};
    app.require_subcommand(1);

    CommonOptions opt;

    auto* validate = app.add_subcommand("validate", "check a graph / config / request log");
    std::string requests_path;
    add_common_flags(validate, opt, false);
    validate->add_option("--requests", requests_path, "request log to validate");

    auto* simulate = app.add_subcommand("simulate", "replay one day under a policy");
    std::string day_path, policy = "greedy", history_dir, out_path;
    bool timing = false, debug_checks = false;
    add_common_flags(simulate, opt, true);
    simulate->add_option("--day", day_path, "request log for the day")->required();
    simulate->add_option("--policy", policy, "greedy | rollout");
    simulate->add_option("--history", history_dir, "historic day logs (demand model)");
    simulate->add_option("--out", out_path, "metrics CSV destination (default stdout)");
    simulate->add_flag("--timing", timing, "record wall-clock planning time (non-reproducible)");
    simulate->add_flag("--debug-checks", debug_checks, "verify invariants every event");

    auto* fleet = app.add_subcommand("fleet-size", "offline fleet sizing from history");
    std::string algo = "restart", fs_history, fs_out;
    long long m_max = 100;
    add_common_flags(fleet, opt, false);
    fleet->add_option("--algo", algo, "single-pass | restart");
    fleet->add_option("--history", fs_history, "directory of day logs")->required();
    fleet->add_option("--mmax", m_max, "largest fleet size to try");
    fleet->add_option("--out", fs_out, "report destination (default stdout)");

    auto* sample = app.add_subcommand("sample-demand", "sample future-request scenarios");
    std::string sd_history, sd_date = "2024-03-04", sd_out;
    long long sd_hour = 19, sd_n = 20;
    add_common_flags(sample, opt, true);
    sample->add_option("--history", sd_history, "directory of day logs")->required();
    sample->add_option("--date", sd_date, "date being predicted (YYYY-MM-DD)");
    sample->add_option("--hour", sd_hour, "hour of day being predicted");
    sample->add_option("--n", sd_n, "number of scenarios");
    sample->add_option("--out", sd_out, "destination (default stdout)");

    auto* gen = app.add_subcommand("gen-history", "generate synthetic day logs");
    std::string spec_path, gen_out;
    long long gen_days = -1, gen_seed = -1;
    add_common_flags(gen, opt, false);
    gen->add_option("--spec", spec_path, "synthetic demand spec file")->required();
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--days", gen_days, "override day count");
    gen->add_option("--gen-seed", gen_seed, "override spec seed");

    auto* experiment = app.add_subcommand("experiment", "run a policy/fleet sweep");
    std::string ex_train, ex_test, ex_policies, ex_fleets, ex_csv, ex_summary;
    bool ex_timing = false;
    add_common_flags(experiment, opt, true);
    experiment->add_option("--train", ex_train, "training day-log directory");
    experiment->add_option("--test", ex_test, "test day-log directory");
    experiment->add_option("--policies", ex_policies, "comma list: greedy,rollout");
    experiment->add_option("--fleets", ex_fleets, "comma list of fleet sizes");
    experiment->add_option("--out-csv", ex_csv, "per-day metrics CSV");
    experiment->add_option("--out-summary", ex_summary, "aggregate summary file");
    experiment->add_flag("--timing", ex_timing, "record wall-clock planning time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        // Map every usage problem onto the input-error exit code; --help
        // stays a success.
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (app.got_subcommand(validate)) return cmd_validate(opt, requests_path);
        if (app.got_subcommand(simulate))
            return cmd_simulate(opt, day_path, policy, history_dir, out_path, timing,
                                debug_checks);
        if (app.got_subcommand(fleet)) return cmd_fleet_size(opt, algo, fs_history, m_max, fs_out);
        if (app.got_subcommand(sample))
            return cmd_sample_demand(opt, sd_history, sd_date, sd_hour, sd_n, sd_out);
        if (app.got_subcommand(gen))
            return cmd_gen_history(opt, spec_path, gen_out, gen_days, gen_seed);
        if (app.got_subcommand(experiment))
            return cmd_experiment(opt, ex_train, ex_test, ex_policies, ex_fleets, ex_csv,
                                  ex_summary, ex_timing);
    } catch (const rp::InfeasibleError& err) {
        std::cerr << "infeasible: " << err.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
