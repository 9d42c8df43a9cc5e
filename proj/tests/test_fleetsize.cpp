#include <doctest.h>

#include "ridepool/fleetsize.hpp"
#include "ridepool/simharness.hpp"
#include "helpers.hpp"

using namespace ridepool;
using namespace ridepool::testing;

TEST_CASE("single request near the depot needs one robot") {
    StreetGraph graph = fleet_gap_grid();
    TravelTimeOracle oracle(graph);
    ProblemConfig config = fleet_gap_config(1);
    DayLog day = make_day({make_request(1, 8, 3, 60, 180)});

    FleetSizingReport sp = single_pass({day}, config, oracle);
    CHECK(sp.fleet == 1);
    FleetSizingReport ro = restart_and_optimize({day}, 10, config, oracle);
    CHECK(ro.fleet == 1);
}

TEST_CASE("empty day keeps the initial single robot") {
    StreetGraph graph = fleet_gap_grid();
    TravelTimeOracle oracle(graph);
    ProblemConfig config = fleet_gap_config(1);
    DayLog day = make_day({});
    CHECK(single_pass({day}, config, oracle).fleet == 1);
    CHECK(restart_and_optimize({day}, 10, config, oracle).fleet == 1);
}

TEST_CASE("fleet-gap day: grow-on-failure sizing says 2, replay at 2 fails, restart says 3") {
    StreetGraph graph = fleet_gap_grid();
    TravelTimeOracle oracle(graph);
    ProblemConfig config = fleet_gap_config(1);
    DayLog day = fleet_gap_day();

    FleetSizingReport sp = single_pass({day}, config, oracle);
    CHECK(sp.fleet == 2);

    // Online replay with the single-pass fleet rejects the third request.
    std::vector<RequestId> rejected = replay_day_greedy(day, sp.fleet, config, oracle);
    CHECK(rejected == std::vector<RequestId>{3});

    FleetSizingReport ro = restart_and_optimize({day}, 100, config, oracle);
    CHECK(ro.fleet == 3);
    CHECK(replay_day_greedy(day, ro.fleet, config, oracle).empty());
}

TEST_CASE("restart sizing reports the max over days") {
    StreetGraph graph = fleet_gap_grid();
    TravelTimeOracle oracle(graph);
    ProblemConfig config = fleet_gap_config(1);
    DayLog light = make_day({make_request(1, 8, 3, 60, 180)}, "2024-03-05", 1, 3);
    DayLog heavy = fleet_gap_day();

    FleetSizingReport ro = restart_and_optimize({light, heavy}, 100, config, oracle);
    REQUIRE(ro.per_day.size() == 2);
    CHECK(ro.per_day[0].size == 1);
    CHECK(ro.per_day[1].size == 3);
    CHECK(ro.fleet == 3);
}

TEST_CASE("infeasible day raises past m_max") {
    StreetGraph graph = fleet_gap_grid();
    TravelTimeOracle oracle(graph);
    ProblemConfig config = fleet_gap_config(1);
    DayLog day = fleet_gap_day();
    CHECK_THROWS_AS(restart_and_optimize({day}, 2, config, oracle), InfeasibleError);
}

TEST_CASE("single-pass retry failure reports a depot-coverage problem") {
    // Shrink the pickup window so the far corner is unreachable even from
    // the depot: the grown robot cannot help either.
    StreetGraph graph = fleet_gap_grid();
    TravelTimeOracle oracle(graph);
    ProblemConfig config = fleet_gap_config(1);
    config.w_pick = 60;  // corner is 240 s away even from the depot
    DayLog day = make_day({make_request(1, 25, 23, 60, 180)});
    CHECK(!config.depots_cover_graph(oracle));
    CHECK_THROWS_AS(single_pass({day}, config, oracle), ConfigError);
}

TEST_CASE("verify_stability counts rejections through the day runner") {
    StreetGraph graph = fleet_gap_grid();
    TravelTimeOracle oracle(graph);
    ProblemConfig config = fleet_gap_config(1);
    DayLog day = fleet_gap_day();

    DayRunner runner = [&](const DayLog& d, int fleet) {
        return static_cast<int>(replay_day_greedy(d, fleet, config, oracle).size());
    };
    CHECK(verify_stability(2, {day, day}, runner) == std::vector<int>{1, 1});
    CHECK(verify_stability(3, {day, day}, runner) == std::vector<int>{0, 0});

    // Replaying the sizing history at the restart size rejects nothing.
    FleetSizingReport ro = restart_and_optimize({day}, 100, config, oracle);
    std::vector<int> counts = verify_stability(ro.fleet, {day}, runner);
    CHECK(counts == std::vector<int>{0});
}

TEST_CASE("sizing reports are deterministic") {
    StreetGraph graph = fleet_gap_grid();
    TravelTimeOracle oracle(graph);
    ProblemConfig config = fleet_gap_config(1);
    SynthSpec spec;
    spec.n_days = 6;
    spec.seed = 5;
    spec.pickup_weights = {{2, 1.0}, {11, 1.0}, {25, 1.0}};
    spec.dropoff_weights = {{3, 1.0}, {9, 1.0}, {23, 1.0}};
    spec.hourly_rates = {{0, 8.0}};
    spec.lead_min = 60;
    spec.lead_max = 120;
    auto days = generate_synthetic_history(spec, graph, config);

    FleetSizingReport a = restart_and_optimize(days, 100, config, oracle);
    FleetSizingReport b = restart_and_optimize(days, 100, config, oracle);
    REQUIRE(a.per_day.size() == b.per_day.size());
    for (std::size_t i = 0; i < a.per_day.size(); ++i)
        CHECK(a.per_day[i].size == b.per_day[i].size);
    CHECK(a.fleet == b.fleet);
}
