#!/usr/bin/env python3
"""Black-box checks of the command-line surface: exit codes, error
reporting, flag precedence and output formats. Usage:

    run_cli_tests.py <ridepool-binary> <data-dir>
"""
import subprocess
import sys
import tempfile
from pathlib import Path

FAILURES = []


def run(binary, *args, expect=0):
    proc = subprocess.run([str(binary), *args], capture_output=True, text=True)
    if proc.returncode != expect:
        FAILURES.append(
            f"{' '.join(args)}: exit {proc.returncode}, want {expect}\n"
            f"stdout: {proc.stdout[:400]}\nstderr: {proc.stderr[:400]}"
        )
    return proc


def main():
    binary = Path(sys.argv[1])
    data = Path(sys.argv[2])
    graph = str(data / "fleet_gap_grid.txt")
    conf = str(data / "fleet_gap.conf")
    day = str(data / "fleet_gap_day.txt")
    work = Path(tempfile.mkdtemp(prefix="ridepool_cli_"))

    # Help exits cleanly and documents the subcommands.
    proc = run(binary, "--help")
    for sub in ("simulate", "fleet-size", "sample-demand", "gen-history", "experiment",
                "validate"):
        if sub not in proc.stdout:
            FAILURES.append(f"--help does not mention {sub}")

    # validate: ok path and the input-error exit code.
    run(binary, "validate", "--graph", graph, "--config", conf, "--requests", day)
    run(binary, "validate", "--graph", str(data / "missing.txt"), expect=1)

    bad_day = work / "bad_day.txt"
    bad_day.write_text("request 1 100 50 2 4\n")  # desired before entry
    proc = run(binary, "validate", "--graph", graph, "--config", conf,
               "--requests", str(bad_day), expect=1)
    if "bad_day.txt:1" not in proc.stderr:
        FAILURES.append("loader error does not carry file and line context")

    bad_graph = work / "bad_graph.txt"
    bad_graph.write_text("nodes 2\nnode 1 0 0\nnode 2 1 0\nedges 1\nedge 1 2 60\n")
    proc = run(binary, "validate", "--graph", str(bad_graph), expect=1)
    if "strongly connected" not in proc.stderr:
        FAILURES.append("disconnected graph not reported")

    # simulate: greedy on the gap day rejects one of three at fleet 2; the
    # --fleet flag overrides the config file's value.
    proc = run(binary, "simulate", "--graph", graph, "--config", conf, "--day", day,
               "--policy", "greedy", "--fleet", "3", "--seed", "7")
    line = proc.stdout.strip().splitlines()[-1]
    if not line.startswith("2024-03-04,greedy-wt,3,"):
        FAILURES.append(f"unexpected simulate row: {line}")
    if ",0.000," not in line:
        FAILURES.append(f"fleet 3 should reject nothing: {line}")

    proc = run(binary, "simulate", "--graph", graph, "--config", conf, "--day", day,
               "--policy", "greedy", "--fleet", "2", "--seed", "7")
    if ",33.333," not in proc.stdout:
        FAILURES.append(f"fleet 2 should reject one of three: {proc.stdout}")

    run(binary, "simulate", "--graph", graph, "--config", conf, "--day", day,
        "--policy", "nonsense", expect=1)

    # fleet-size on a directory containing the gap day.
    hist = work / "hist"
    hist.mkdir()
    (hist / "day1.txt").write_text(Path(day).read_text())
    proc = run(binary, "fleet-size", "--graph", graph, "--config", conf,
               "--algo", "single-pass", "--history", str(hist))
    if "fleet 2" not in proc.stdout:
        FAILURES.append(f"single-pass should report fleet 2: {proc.stdout}")
    proc = run(binary, "fleet-size", "--graph", graph, "--config", conf,
               "--algo", "restart", "--history", str(hist), "--mmax", "100")
    if "day 2024-03-04 size 3" not in proc.stdout or "fleet 3" not in proc.stdout:
        FAILURES.append(f"restart report malformed: {proc.stdout}")

    # Infeasibility uses its own exit code.
    run(binary, "fleet-size", "--graph", graph, "--config", conf, "--algo", "restart",
        "--history", str(hist), "--mmax", "2", expect=2)

    # gen-history + rollout simulate + experiment round trip on a wider
    # service window.
    wide = work / "wide.conf"
    wide.write_text(
        "[problem]\nt_start = 0\nt_end = 14400\nt_last = 12800\n"
        "w_pick = 300\nw_drop = 300\ncapacity = 16\ndepots = 13\nfleet = 3\n")
    spec = work / "synth.spec"
    spec.write_text(
        "days 4\nseed 5\nstart-date 2024-03-04\nrate 0 10\nrate 1 8\n"
        "pickup 2 1\npickup 11 1\npickup 25 1\n"
        "dropoff 9 1\ndropoff 3 1\ndropoff 23 1\nlead 60 180\n")
    gen = work / "gen"
    run(binary, "gen-history", "--graph", graph, "--config", str(wide), "--spec", str(spec),
        "--out", str(gen))
    files = sorted(gen.glob("day_*.txt"))
    if len(files) != 4:
        FAILURES.append(f"gen-history wrote {len(files)} files, want 4")
    if files and not files[0].read_text().startswith("day 2024-03-04 0 3"):
        FAILURES.append("day log manifest line malformed")

    run(binary, "simulate", "--graph", graph, "--config", str(wide), "--day", str(files[0]),
        "--policy", "rollout", "--fleet", "3", "--seed", "7", "--history", str(gen))

    csv = work / "exp.csv"
    summary = work / "exp.summary"
    run(binary, "experiment", "--graph", graph, "--config", str(wide), "--train", str(gen),
        "--test", str(gen), "--policies", "greedy,rollout", "--fleets", "2,3",
        "--seed", "3", "--out-csv", str(csv), "--out-summary", str(summary))
    rows = csv.read_text().strip().splitlines()
    if len(rows) != 1 + 2 * 2 * 4:
        FAILURES.append(f"experiment CSV has {len(rows)} lines, want 17")
    if "policy rollout fleet 3" not in summary.read_text():
        FAILURES.append("summary missing rollout aggregate")

    # sample-demand emits scenario records (a Monday: the history has one).
    proc = run(binary, "sample-demand", "--graph", graph, "--config", str(wide),
               "--history", str(gen), "--date", "2024-03-11", "--hour", "1", "--n", "3",
               "--seed", "2")
    if "scenario 0 request" not in proc.stdout:
        FAILURES.append(f"sample-demand output malformed: {proc.stdout[:200]}")

    # Unknown flags are rejected.
    run(binary, "simulate", "--graph", graph, "--frobnicate", expect=1)

    if FAILURES:
        print("CLI suite: FAIL")
        for f in FAILURES:
            print(" -", f)
        return 1
    print("CLI suite: all checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
