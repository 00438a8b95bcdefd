import json
import math

from ntnplan import artifacts
from ntnplan.config import scenario_from_config
from ntnplan.optimizer import run_baseline


def test_csv_cell_rendering():
    text = artifacts.rows_to_csv(
        ("a", "b", "c", "d"),
        [{"a": None, "b": True, "c": 0.1, "d": "x;y"}],
    )
    lines = text.splitlines()
    assert lines[0] == "a,b,c,d"
    assert lines[1] == ",true,0.1,x;y"


def test_csv_float_repr_round_trips():
    value = 1.0 / 3.0
    text = artifacts.rows_to_csv(("v",), [{"v": value}])
    cell = text.splitlines()[1]
    assert float(cell) == value


def test_canonical_json_is_sorted_and_newline_terminated():
    text = artifacts.canonical_json({"b": 1, "a": [1, 2]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"b": 1, "a": [1, 2]}


def test_summary_serializes_unbounded_ratio_as_null():
    sc = scenario_from_config({}, seed=0)
    result = run_baseline("haps-only", sc, seed=0)
    summary = artifacts.solution_summary(result.best, sc)
    assert math.isinf(result.best.kappa)
    assert summary["kappa"] is None
    assert summary["lambda_upp"] == 0.0  # empty fleet: the bound is exactly zero
    assert summary["lambda_upp_db"] is None  # and has no dB representation


def test_summary_carries_both_loss_representations():
    sc = scenario_from_config({}, seed=0)
    result = run_baseline("uav-only", sc, seed=0)
    summary = artifacts.solution_summary(result.best, sc)
    assert summary["lambda_true"] > 0
    assert summary["lambda_true_db"] == 10 * math.log10(summary["lambda_true"])
    assert summary["lambda_upp"] >= summary["lambda_true"]


def test_allocation_rows_sorted_and_labelled():
    sc = scenario_from_config({}, seed=0)
    result = run_baseline("equal-split", sc, seed=0)
    rows = artifacts.allocation_rows(result.best, sc)
    assert [row["user"] for row in rows] == list(range(sc.n_users))
    for row in rows:
        if row["server"] == "haps":
            assert row["ris_elements"] > 0
            assert row["n_subcarriers"] > 0
        elif row["server"].startswith("uav-"):
            assert row["ris_elements"] == 0
        else:
            assert row["server"] == "none"


def test_artifact_contains_only_json_native_values():
    sc = scenario_from_config({}, seed=0)
    result = run_baseline("optimized", sc, seed=0)
    artifact = artifacts.solution_artifact(result, sc, seed=0)
    text = artifacts.canonical_json(artifact)  # allow_nan=False would reject inf/nan
    assert json.loads(text) == artifact
