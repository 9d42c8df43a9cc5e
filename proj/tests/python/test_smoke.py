"""End-to-end smoke tests of the python module against the bundled
fleet-gap instance. Needs PYTHONPATH pointing at the built extension and
RIDEPOOL_DATA at the data directory (ctest wires both)."""
import os
from pathlib import Path

import pytest

ridepool = pytest.importorskip("ridepool")

DATA = Path(os.environ.get("RIDEPOOL_DATA", Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture(scope="module")
def setup():
    graph = ridepool.StreetGraph.load(str(DATA / "fleet_gap_grid.txt"))
    oracle = ridepool.TravelTimeOracle(graph)
    config = ridepool.ProblemConfig()
    config.t_start = 0
    config.t_end = 1800
    config.t_last = 240
    config.w_pick = 300
    config.w_drop = 300
    config.capacity = 16
    config.depots = [13]
    config.fleet_size = 2
    config.validate(oracle)
    day = ridepool.load_day_log(str(DATA / "fleet_gap_day.txt"), config)
    return graph, oracle, config, day


def test_graph_and_travel_times(setup):
    graph, oracle, config, day = setup
    assert graph.node_count == 25
    assert oracle.time(13, 13) == 0
    assert oracle.time(13, 25) == 240
    assert oracle.path(13, 2) == [13, 8, 3, 2]
    assert oracle.diameter() == 480


def test_greedy_simulation_rejects_third_request(setup):
    graph, oracle, config, day = setup
    metrics = ridepool.simulate_day(day, "greedy", config, ridepool.RolloutConfig(), oracle,
                                    debug_checks=True)
    assert metrics["entered"] == 3
    assert metrics["rejected"] == 1
    assert metrics["outcomes"][2]["rejected"] is True

    config.fleet_size = 3
    clean = ridepool.simulate_day(day, "greedy", config, ridepool.RolloutConfig(), oracle)
    assert clean["rejected"] == 0
    waits = sum(o["wait_pick"] + o["wait_drop"] for o in clean["outcomes"])
    assert clean["total_cost"] == waits
    config.fleet_size = 2


def test_fleet_sizing_gap(setup):
    graph, oracle, config, day = setup
    single = ridepool.single_pass([day], config, oracle)
    restart = ridepool.restart_and_optimize([day], 100, config, oracle)
    assert single["fleet"] == 2
    assert restart["fleet"] == 3
    assert ridepool.replay_day_greedy(day, 2, config, oracle) == [3]
    assert ridepool.replay_day_greedy(day, 3, config, oracle) == []


def test_rollout_with_oracle_forecaster(setup):
    graph, oracle, config, day = setup
    rollout = ridepool.RolloutConfig()
    rollout.seed = 7
    metrics = ridepool.simulate_day(day, "rollout", config, rollout, oracle,
                                    forecaster="oracle")
    assert metrics["rejected"] <= 1
    assert metrics["policy"] == "rollout"


def test_synthetic_history_and_demand_sampling(setup, tmp_path):
    graph, oracle, config, day = setup
    wide = ridepool.ProblemConfig()
    wide.t_start = 0
    wide.t_end = 14400
    wide.t_last = 12800
    wide.w_pick = 300
    wide.w_drop = 300
    wide.depots = [13]
    wide.fleet_size = 3

    spec = tmp_path / "synth.spec"
    spec.write_text(
        "days 5\nseed 9\nstart-date 2024-03-04\nrate 0 10\n"
        "pickup 2 1\npickup 25 1\ndropoff 9 1\ndropoff 23 1\nlead 60 180\n")
    history = ridepool.generate_synthetic_history(str(spec), graph, wide)
    assert len(history) == 5
    assert history[0].date == "2024-03-04"

    scenarios = ridepool.sample_scenarios(history, "2024-03-11", 0, 4, 3, wide)
    assert len(scenarios) == 4
    again = ridepool.sample_scenarios(history, "2024-03-11", 0, 4, 3, wide)
    assert scenarios == again  # seeded determinism
    for scenario in scenarios:
        for request in scenario:
            assert request["pickup"] != request["dropoff"]


def test_errors_surface_as_python_exceptions(setup):
    graph, oracle, config, day = setup
    with pytest.raises(ridepool.InputError):
        ridepool.StreetGraph.load(str(DATA / "no_such_file.txt"))
    with pytest.raises(ridepool.InfeasibleError):
        ridepool.restart_and_optimize([day], 2, config, oracle)
    bad = ridepool.ProblemConfig()
    bad.t_start = 100
    bad.t_end = 50
    bad.t_last = 75
    bad.depots = [13]
    with pytest.raises(ridepool.ConfigurationError):
        bad.validate(oracle)
