import csv
import json

import pytest

from wkmeans import cli


def run(argv):
    return cli.main(argv)


def test_cluster_default_json(tmp_path):
    out = tmp_path / "result.json"
    assert run(["cluster", "--seed", "7", "--output", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["command"] == "cluster"
    assert payload["k"] == 2
    assert payload["solver"] == "ptas"
    assert payload["seed"] == 7
    assert payload["cost"] >= 1.0 - 1e-12
    assert len(payload["centers"]) == 2
    assert len(payload["assignment"]) == 4
    assert payload["meta"]["master_seed"] == 7
    # Byte-determinism across thread counts depends on payloads carrying no
    # timing or machine facts.
    flat = json.dumps(payload)
    assert "wall" not in flat and "thread" not in flat


def test_cluster_desk_constants_near_optimal(tmp_path):
    # The theory sample sizes need exhaustive subset search to pay off; with
    # a random tuple budget the small bench constants are the accurate ones.
    out = tmp_path / "desk.json"
    args = ["cluster", "--c1", "8", "--c2", "4", "--seed", "7", "--output", str(out)]
    assert run(args) == 0
    payload = json.loads(out.read_text())
    assert 1.0 - 1e-12 <= payload["cost"] <= 1.5


def test_cluster_csv_format(tmp_path):
    out = tmp_path / "result.csv"
    code = run(
        [
            "cluster",
            "--solver",
            "kmeanspp-lloyd",
            "--seed",
            "1",
            "--format",
            "csv",
            "--output",
            str(out),
        ]
    )
    assert code == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["x1", "weight", "cluster"]
    assert len(rows) == 5
    assert {r[2] for r in rows[1:]} == {"0", "1"}


def test_cluster_oracle_solver(tmp_path):
    out = tmp_path / "oracle.json"
    assert run(["cluster", "--solver", "oracle", "--output", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["cost"] == 1.0
    assert payload["meta"]["groups"] == [[0, 1], [2, 3]]


def test_cluster_usage_errors(tmp_path):
    assert run(["cluster", "--k", "0"]) == 2
    assert run(["cluster", "--input", str(tmp_path / "nope.csv")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert run(["cluster", "--input", str(bad)]) == 2


def test_cluster_exhaustive_infeasible():
    # comb(6400, 200)^2 candidate tuples is far past the cutoff.
    assert run(["cluster", "--tuple-budget", "exhaustive"]) == 3


def test_bad_solver_choice_is_argparse_error():
    with pytest.raises(SystemExit) as exc:
        run(["cluster", "--solver", "simulated-annealing"])
    assert exc.value.code == 2


def test_sensor_default_region(tmp_path):
    out = tmp_path / "placement.json"
    pts = tmp_path / "cells.csv"
    code = run(
        [
            "sensor",
            "--solver",
            "kmeanspp-lloyd",
            "--seed",
            "3",
            "--output",
            str(out),
            "--points-output",
            str(pts),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["command"] == "sensor"
    assert payload["k"] == 1
    assert payload["grid_eps"] == 0.25
    assert payload["n_cells"] == 16
    assert payload["coverage_cost"] == pytest.approx(1.0 / 6.0, abs=1e-9)
    assert payload["centers"][0] == pytest.approx([0.5, 0.5], abs=1e-9)
    rows = pts.read_text().splitlines()
    assert rows[0] == "x1,x2,weight"
    assert len(rows) == 17


def test_sensor_points_path_derived_from_output(tmp_path):
    out = tmp_path / "place.json"
    code = run(
        ["sensor", "--solver", "kmeanspp-lloyd", "--output", str(out)]
    )
    assert code == 0
    assert (tmp_path / "place_points.csv").exists()


def test_sensor_bad_region(tmp_path):
    bad = tmp_path / "region.json"
    bad.write_text("{]")
    assert run(["sensor", "--region", str(bad)]) == 2


def test_verify_subset_passes(capsys):
    assert run(["verify", "--only", "parallel-axis,centroid-optimality"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    assert all("PASS" in line for line in lines)


def test_verify_tolerance_hook_fails(capsys):
    assert run(["verify", "--only", "parallel-axis", "--parallel-axis-tol", "0"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_bench_matrix(tmp_path):
    out = tmp_path / "bench.csv"
    code = run(["bench", "--repeat", "2", "--solvers", "oracle", "--output", str(out)])
    assert code == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == [
        "instance",
        "solver",
        "seed",
        "cost",
        "ratio_to_oracle",
        "wall_time_s",
    ]
    assert len(rows) == 1 + 5 * 2
    for row in rows[1:]:
        assert float(row[4]) == pytest.approx(1.0, abs=1e-12)
        assert float(row[5]) >= 0.0


def test_bench_usage_errors():
    assert run(["bench", "--repeat", "0"]) == 2
    assert run(["bench", "--solvers", "ptas,magic"]) == 2


def test_threads_do_not_change_bytes(tmp_path):
    args = [
        "cluster",
        "--c1",
        "2",
        "--c2",
        "1",
        "--tuple-budget",
        "50",
        "--seed",
        "5",
    ]
    one = tmp_path / "t1.json"
    eight = tmp_path / "t8.json"
    assert run(args + ["--threads", "1", "--output", str(one)]) == 0
    assert run(args + ["--threads", "8", "--output", str(eight)]) == 0
    assert one.read_bytes() == eight.read_bytes()
