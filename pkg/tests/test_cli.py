"""Command-line front end: argument handling, payload bytes, exit codes.

Command output is compared against direct library calls, so the CLI is pinned
to the same canonical serialization the HTTP service uses.
"""

import json
import subprocess
import sys

import pytest

from flowshop.bench import CSV_HEADER
from flowshop.cli import main
from flowshop.model import (
    canonical_json,
    evaluate_timeline,
    make_instance,
    makespan,
    validate_instance,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_instance(tmp_path, p, buffers=None, name="instance.json"):
    inst = make_instance(p, buffers=buffers)
    path = tmp_path / name
    path.write_text(canonical_json(inst.to_document()))
    return inst, str(path)


# ---------------------------------------------------------------------------
# gen


def test_gen_emits_valid_deterministic_instance(capsys):
    code, out, err = run_cli(capsys, "gen", "--n", "6", "--seed", "7")
    assert code == 0 and err == ""
    doc = json.loads(out)
    inst = validate_instance(doc)
    assert inst.n == 6 and inst.m == 2 and inst.seed == 7
    assert doc["buffers"] == [None]

    code2, out2, _ = run_cli(capsys, "gen", "--n", "6", "--seed", "7")
    assert code2 == 0 and out2 == out


def test_gen_honors_range_buffers_and_machine_count(capsys):
    code, out, _ = run_cli(
        capsys, "gen", "--n", "4", "--m", "3", "--lo", "2", "--hi", "2",
        "--seed", "0", "--buffers", "2",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["p"] == [[2, 2, 2]] * 4
    # A single capacity token is broadcast across all machine gaps.
    assert doc["buffers"] == [2, 2]


def test_gen_buffers_inf_token_means_unbounded(capsys):
    code, out, _ = run_cli(capsys, "gen", "--n", "3", "--seed", "1", "--buffers", "inf")
    assert code == 0
    assert json.loads(out)["buffers"] == [None]


def test_gen_writes_output_file(capsys, tmp_path):
    out_path = tmp_path / "inst.json"
    code, out, _ = run_cli(capsys, "gen", "--n", "3", "--seed", "2", "--out", str(out_path))
    assert code == 0 and out == ""
    validate_instance(json.loads(out_path.read_text()))


def test_gen_rejects_bad_time_range(capsys):
    code, out, err = run_cli(capsys, "gen", "--n", "3", "--lo", "5", "--hi", "2")
    assert code == 2 and out == ""
    assert err.startswith("error:")


# ---------------------------------------------------------------------------
# eval


def test_eval_matches_direct_timeline_and_hand_value(capsys, tmp_path):
    inst, path = write_instance(tmp_path, [[1, 5], [1, 1]], buffers=[0])
    code, out, err = run_cli(capsys, "eval", "--instance", path, "--sequence", "0,1")
    assert code == 0 and err == ""
    expected = canonical_json(evaluate_timeline(inst, [0, 1]).to_document()) + "\n"
    assert out == expected
    doc = json.loads(out)
    # Second job finishes machine 0 at 2 but waits on the blocked first job.
    assert doc["makespan"] == 7
    assert doc["sequence"] == [0, 1]


def test_eval_sequence_file_and_buffer_override(capsys, tmp_path):
    inst, path = write_instance(tmp_path, [[1, 5], [1, 1]])
    seq_path = tmp_path / "seq.json"
    seq_path.write_text("[0, 1]")
    code, out, _ = run_cli(
        capsys, "eval", "--instance", path,
        "--sequence-file", str(seq_path), "--buffers", "0",
    )
    assert code == 0
    assert json.loads(out)["makespan"] == 7


def test_eval_requires_a_sequence_source(capsys, tmp_path):
    _, path = write_instance(tmp_path, [[1, 2]])
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--instance", path])
    assert exc.value.code == 2


def test_eval_rejects_non_permutation(capsys, tmp_path):
    _, path = write_instance(tmp_path, [[1, 2], [3, 4]])
    code, out, err = run_cli(capsys, "eval", "--instance", path, "--sequence", "0,0")
    assert code == 2 and err.startswith("error:")


# ---------------------------------------------------------------------------
# johnson / sa / gbml


def test_johnson_output_document(capsys, tmp_path):
    p = [[5, 2], [2, 2], [4, 9], [9, 3], [1, 8]]
    inst, path = write_instance(tmp_path, p)
    code, out, err = run_cli(capsys, "johnson", "--instance", path)
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert doc["algorithm"] == "johnson"
    assert doc["sequence"] == [4, 1, 2, 3, 0]
    assert doc["objective"] == makespan(inst, doc["sequence"])
    assert doc["instance_id"] == inst.id
    assert doc["seed"] is None


def test_sa_is_seed_deterministic_and_honors_config(capsys, tmp_path):
    inst, path = write_instance(tmp_path, [[3, 1], [1, 3], [2, 2], [4, 1]], buffers=[1])
    cfg_path = tmp_path / "sa.json"
    cfg_path.write_text(json.dumps({"iterations": 25}))
    args = ("sa", "--instance", path, "--seed", "9", "--config", str(cfg_path))
    code, out, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code == code2 == 0
    assert out == out2
    doc = json.loads(out)
    assert doc["algorithm"] == "sa"
    assert doc["iterations_run"] == 25
    assert doc["seed"] == 9
    assert doc["objective"] == makespan(inst, doc["sequence"])


def test_gbml_single_and_multi_instance(capsys, tmp_path):
    _, path_a = write_instance(tmp_path, [[3, 1], [1, 3]], buffers=[1], name="a.json")
    _, path_b = write_instance(tmp_path, [[2, 2], [1, 4], [4, 1]], buffers=[1], name="b.json")
    cfg_path = tmp_path / "gbml.json"
    cfg_path.write_text(json.dumps({"population_size": 6, "generations": 2}))

    code, out, _ = run_cli(
        capsys, "gbml", "--instance", path_a, "--seed", "3", "--config", str(cfg_path),
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["algorithm"] == "gbml"
    assert len(doc["history"]) == 2
    assert len(doc["per_problem"]) == 1
    assert doc["ruleset"]["weights"]

    code, out, _ = run_cli(
        capsys, "gbml", "--instance", path_a, "--instance", path_b,
        "--seed", "3", "--config", str(cfg_path),
    )
    assert code == 0
    doc = json.loads(out)
    assert len(doc["per_problem"]) == 2
    assert len(doc["instance_ids"]) == 2
    assert len(doc["sequences"][1]) == 3


# ---------------------------------------------------------------------------
# run


def tiny_plan_doc():
    return {
        "n_examples": 1,
        "n": 5,
        "trials": 1,
        "buffers": [1],
        "algorithms": ["johnson", "sa"],
        "master_seed": 4,
        "sa": {"iterations": 20},
    }


def test_run_emits_csv_and_is_repeatable(capsys, tmp_path):
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(json.dumps(tiny_plan_doc()))
    code, out, err = run_cli(capsys, "run", "--plan", str(plan_path))
    assert code == 0 and err == ""
    lines = out.strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 2

    code2, out2, _ = run_cli(capsys, "run", "--plan", str(plan_path))
    assert code2 == 0 and out2 == out


def test_run_markdown_format_and_output_file(capsys, tmp_path):
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(json.dumps(tiny_plan_doc()))
    report_path = tmp_path / "report.md"
    code, out, _ = run_cli(
        capsys, "run", "--plan", str(plan_path),
        "--format", "markdown", "--out", str(report_path),
    )
    assert code == 0 and out == ""
    assert report_path.read_text().startswith("| example | buffer |")


def test_run_resume_file_is_populated(capsys, tmp_path):
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(json.dumps(tiny_plan_doc()))
    results_path = tmp_path / "cells.jsonl"
    code, _, _ = run_cli(
        capsys, "run", "--plan", str(plan_path), "--results", str(results_path),
    )
    assert code == 0
    rows = [json.loads(line) for line in results_path.read_text().strip().splitlines()]
    assert len(rows) == 2
    assert {r["algorithm"] for r in rows} == {"johnson", "sa"}


# ---------------------------------------------------------------------------
# Error handling and process entry


def test_missing_instance_file_reports_error(capsys):
    code, out, err = run_cli(capsys, "johnson", "--instance", "/nonexistent.json")
    assert code == 2 and err.startswith("error:")


def test_malformed_instance_json_reports_error(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, out, err = run_cli(capsys, "johnson", "--instance", str(path))
    assert code == 2 and err.startswith("error:")


def test_invalid_buffer_token_reports_error(capsys, tmp_path):
    _, path = write_instance(tmp_path, [[1, 2], [3, 4]])
    code, out, err = run_cli(capsys, "johnson", "--instance", path, "--buffers", "big")
    assert code == 2 and "buffer" in err


def test_unknown_subcommand_exits_with_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_module_is_runnable_as_a_process():
    proc = subprocess.run(
        [sys.executable, "-m", "flowshop.cli", "gen", "--n", "3", "--seed", "1"],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["n"] == 3
