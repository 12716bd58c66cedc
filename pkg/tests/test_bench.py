"""Experiment harness: seeded generation, the run grid, resume, and reports.

Frozen seed values were derived independently with hashlib before being
asserted here; aggregate-level numbers are cross-checked against direct
calls into the algorithms rather than against the harness itself.
"""

import json

import pytest

from flowshop.baselines import SaConfig, brute_force_optimal, johnson_sequence
from flowshop.bench import (
    CSV_HEADER,
    ExperimentPlan,
    ResultRow,
    ResultTable,
    aggregate,
    buffer_label,
    cell_seed,
    emit_report,
    generate_instance,
    plan_cells,
    run_experiment,
)
from flowshop.gbml import GbmlConfig
from flowshop.model import TimelineBuilder, ValidationError, makespan, with_buffers


def timeline_makespan(instance, sequence):
    builder = TimelineBuilder(instance)
    for job in sequence:
        builder.append(job)
    return builder.build().makespan


# ---------------------------------------------------------------------------
# Instance generation


def test_generate_degenerate_range_gives_all_ones():
    inst = generate_instance(2, 2, lo=1, hi=1, seed=0)
    assert inst.p == ((1, 1), (1, 1))


def test_generate_shape_and_value_range():
    inst = generate_instance(12, 3, lo=2, hi=7, seed=5)
    assert inst.n == 12 and inst.m == 3
    assert len(inst.p) == 12 and all(len(row) == 3 for row in inst.p)
    assert all(2 <= v <= 7 for row in inst.p for v in row)
    assert inst.seed == 5
    assert inst.buffers == (None, None)


def test_generate_same_seed_identical_different_seed_differs():
    a = generate_instance(20, 2, seed=11)
    b = generate_instance(20, 2, seed=11)
    c = generate_instance(20, 2, seed=12)
    assert a.p == b.p and a.id == b.id
    assert a.p != c.p


def test_generate_buffers_passed_through():
    inst = generate_instance(4, 3, seed=1, buffers=[2, 0])
    assert inst.buffers == (2, 0)


@pytest.mark.parametrize("lo,hi", [(0, 5), (3, 2), (-1, -1)])
def test_generate_rejects_bad_time_range(lo, hi):
    with pytest.raises(ValidationError):
        generate_instance(3, 2, lo=lo, hi=hi, seed=0)


# ---------------------------------------------------------------------------
# Per-cell seeds


def test_cell_seed_frozen_values():
    # Independently computed: first 8 bytes, big-endian, of the SHA-256 of
    # "master:example:buffer:algorithm:trial".
    assert cell_seed(7, 0, "inf", "johnson", 0) == 13964076664463519028
    assert cell_seed(20260817, 3, "1", "gbml", 9) == 2587967361946842943


def test_cell_seed_distinct_across_each_coordinate():
    base = cell_seed(1, 2, "3", "sa", 4)
    assert cell_seed(9, 2, "3", "sa", 4) != base
    assert cell_seed(1, 9, "3", "sa", 4) != base
    assert cell_seed(1, 2, "9", "sa", 4) != base
    assert cell_seed(1, 2, "3", "gbml", 4) != base
    assert cell_seed(1, 2, "3", "sa", 9) != base


def test_buffer_label():
    assert buffer_label(None) == "inf"
    assert buffer_label(3) == "3"
    assert buffer_label(0) == "0"


# ---------------------------------------------------------------------------
# Plans


def test_plan_defaults():
    plan = ExperimentPlan()
    assert plan.n_examples == 10 and plan.n == 50 and plan.m == 2
    assert plan.buffers == (1, 3, 5, None)
    assert plan.trials == 10
    assert plan.algorithms == ("gbml", "johnson", "sa")
    assert plan.sa_at_unbounded is False


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_examples": 0},
        {"trials": 0},
        {"time_lo": 0},
        {"time_lo": 5, "time_hi": 4},
        {"algorithms": ()},
        {"algorithms": ("johnson", "tabu")},
        {"buffers": (1, -1)},
        {"buffers": ("big",)},
    ],
)
def test_plan_rejects_invalid_fields(kwargs):
    with pytest.raises(ValidationError):
        ExperimentPlan(**kwargs)


def test_plan_document_round_trip():
    plan = ExperimentPlan(
        n_examples=3,
        n=8,
        trials=2,
        buffers=(0, 2, None),
        algorithms=("johnson", "sa"),
        master_seed=99,
        sa_at_unbounded=True,
        gbml=GbmlConfig(population_size=6, generations=2),
        sa=SaConfig(iterations=25, neighborhood="insert"),
    )
    doc = plan.to_document()
    # The document must survive a JSON round trip (None becomes null and back).
    doc = json.loads(json.dumps(doc))
    back = ExperimentPlan.from_document(doc)
    assert back == plan
    assert back.buffers == (0, 2, None)
    assert back.gbml.population_size == 6
    assert back.sa.neighborhood == "insert"


def test_plan_from_document_rejects_non_object():
    with pytest.raises(ValidationError):
        ExperimentPlan.from_document([1, 2])


def test_example_instances_deterministic_and_distinct():
    plan = ExperimentPlan(master_seed=42)
    a = plan.example_instance(0)
    assert a == plan.example_instance(0)
    assert a.p != plan.example_instance(1).p
    # A different master seed reshuffles the examples.
    assert a.p != ExperimentPlan(master_seed=43).example_instance(0).p


def test_default_scale_examples_land_in_expected_makespan_band():
    # n=50 jobs with unit times 1..10 should put the two-machine optimum-ish
    # Johnson makespan in a narrow band around 50 * 5.5.
    plan = ExperimentPlan()
    for example in range(plan.n_examples):
        inst = plan.example_instance(example)
        value = timeline_makespan(inst, johnson_sequence(inst))
        assert 240 <= value <= 360


def test_plan_cells_skips_sa_at_unbounded_by_default():
    plan = ExperimentPlan(n_examples=2, trials=3, buffers=(1, None))
    cells = plan_cells(plan)
    assert ("sa" in {c[2] for c in cells})
    assert not [c for c in cells if c[2] == "sa" and c[1] is None]
    # 2 examples * (2 buffers * 3 algorithms - 1 skipped combo) * 3 trials
    assert len(cells) == 2 * (2 * 3 - 1) * 3

    full = plan_cells(ExperimentPlan(n_examples=2, trials=3, buffers=(1, None), sa_at_unbounded=True))
    assert [c for c in full if c[2] == "sa" and c[1] is None]
    assert len(full) == 2 * 2 * 3 * 3


# ---------------------------------------------------------------------------
# End-to-end runs (kept tiny; the full-scale run lives in the acceptance suite)


def tiny_plan(**overrides):
    kwargs = dict(
        n_examples=2,
        n=6,
        trials=2,
        buffers=(1, None),
        algorithms=("gbml", "johnson", "sa"),
        master_seed=7,
        gbml=GbmlConfig(population_size=8, generations=4),
        sa=SaConfig(iterations=40),
    )
    kwargs.update(overrides)
    return ExperimentPlan(**kwargs)


@pytest.fixture(scope="module")
def tiny_table():
    return run_experiment(tiny_plan())


def test_run_shape_and_row_lookup(tiny_table):
    assert tiny_table.trials == 2
    assert len(tiny_table.rows) == 4
    assert tiny_table.row(0, 1).example == 0
    assert tiny_table.row(1, None).buffer is None
    with pytest.raises(KeyError):
        tiny_table.row(0, 9)


def test_run_is_deterministic(tiny_table):
    again = run_experiment(tiny_plan())
    assert emit_report(again) == emit_report(tiny_table)
    assert again.to_document() == tiny_table.to_document()


def test_johnson_mean_is_trial_invariant_and_matches_direct_call(tiny_table):
    plan = tiny_plan()
    for example in range(plan.n_examples):
        base = plan.example_instance(example)
        for buffer in plan.buffers:
            inst = base if buffer is None else with_buffers(base, [buffer])
            expected = makespan(inst, johnson_sequence(inst))
            row = tiny_table.row(example, buffer)
            assert row.means["johnson"] == expected
            lo, hi = row.spreads["johnson"]
            assert lo == hi == expected


def test_heuristic_means_bounded_below_by_exhaustive_optimum(tiny_table):
    plan = tiny_plan()
    for row in tiny_table.rows:
        base = plan.example_instance(row.example)
        inst = base if row.buffer is None else with_buffers(base, [row.buffer])
        optimum = brute_force_optimal(inst)[1]
        for algorithm in ("gbml", "johnson", "sa"):
            if row.means[algorithm] is not None:
                assert row.means[algorithm] >= optimum


def test_sa_column_blank_at_unbounded_capacity(tiny_table):
    row = tiny_table.row(0, None)
    assert row.means["sa"] is None
    assert row.ratios["I_III"] is None and row.ratios["II_III"] is None
    assert row.means["gbml"] is not None and row.means["johnson"] is not None
    assert row.ratios["I_II"] is not None


def test_ratio_identity_where_all_three_present(tiny_table):
    for example in (0, 1):
        row = tiny_table.row(example, 1)
        assert row.ratios["I_III"] / row.ratios["II_III"] == pytest.approx(
            row.ratios["I_II"]
        )


def test_table_document_is_json_serializable(tiny_table):
    doc = json.loads(json.dumps(tiny_table.to_document()))
    assert doc["trials"] == 2
    assert len(doc["rows"]) == 4
    row = doc["rows"][0]
    assert set(row) == {"example", "buffer", "means", "ratios", "spreads", "errors"}
    assert doc["rows"][1]["buffer"] == "inf"


def test_resume_skips_completed_cells_and_reproduces_table(tiny_table, tmp_path):
    plan = tiny_plan()
    path = tmp_path / "cells.jsonl"
    seen = []
    table = run_experiment(plan, results_path=path, progress=seen.append)
    total = len(plan_cells(plan))
    assert len(seen) == total
    lines = path.read_text().strip().splitlines()
    assert len(lines) == total
    assert all("makespan" in json.loads(line) for line in lines)
    assert emit_report(table) == emit_report(tiny_table)

    # Drop the tail of the results file: only the missing cells re-run.
    keep = total // 2
    path.write_text("\n".join(lines[:keep]) + "\n")
    resumed_cells = []
    resumed = run_experiment(plan, results_path=path, progress=resumed_cells.append)
    assert len(resumed_cells) == total - keep
    assert emit_report(resumed) == emit_report(tiny_table)
    assert len(path.read_text().strip().splitlines()) == total

    # A complete file means nothing re-runs at all.
    untouched = []
    final = run_experiment(plan, results_path=path, progress=untouched.append)
    assert untouched == []
    assert emit_report(final) == emit_report(tiny_table)


def test_parallel_workers_match_serial_results():
    plan = tiny_plan(
        n_examples=1,
        algorithms=("johnson", "sa"),
        sa=SaConfig(iterations=20),
    )
    serial = run_experiment(plan, workers=1)
    parallel = run_experiment(plan, workers=2)
    assert emit_report(parallel) == emit_report(serial)


def test_cell_failures_are_recorded_and_run_continues():
    # Exhaustive search refuses 12 jobs, so every one of its cells fails while
    # the heuristic columns still fill in.
    plan = ExperimentPlan(
        n_examples=1,
        n=12,
        trials=2,
        buffers=(None,),
        algorithms=("johnson", "brute"),
        master_seed=3,
    )
    table = run_experiment(plan)
    row = table.row(0, None)
    assert row.means["johnson"] is not None
    assert row.means["brute"] is None
    assert len(row.errors) == 2
    assert all("exhaustive search" in err for err in row.errors)


def test_exhaustive_column_lower_bounds_johnson():
    plan = ExperimentPlan(
        n_examples=1,
        n=5,
        trials=1,
        buffers=(None, 1),
        algorithms=("johnson", "brute"),
        master_seed=13,
    )
    table = run_experiment(plan)
    for buffer in (None, 1):
        row = table.row(0, buffer)
        assert row.means["brute"] <= row.means["johnson"]
    # Two machines with unlimited space between them is exactly the regime
    # where the pairwise ordering rule is optimal.
    assert table.row(0, None).means["brute"] == table.row(0, None).means["johnson"]


# ---------------------------------------------------------------------------
# Aggregation edge cases (fed with handcrafted cell rows)


def small_plan(**overrides):
    kwargs = dict(n_examples=1, n=4, trials=2, buffers=(None,), master_seed=0)
    kwargs.update(overrides)
    return ExperimentPlan(**kwargs)


def test_aggregate_requires_full_trial_count_for_a_mean():
    plan = small_plan(algorithms=("johnson",))
    rows = [
        {"example": 0, "buffer": "inf", "algorithm": "johnson", "trial": 0, "makespan": 10},
    ]
    table = aggregate(plan, rows)
    assert table.row(0, None).means["johnson"] is None

    rows.append({"example": 0, "buffer": "inf", "algorithm": "johnson", "trial": 1, "makespan": 11})
    table = aggregate(plan, rows)
    assert table.row(0, None).means["johnson"] == 10.5
    assert table.row(0, None).spreads["johnson"] == (10, 11)


def test_aggregate_zero_denominator_leaves_ratio_blank():
    plan = small_plan(trials=1, algorithms=("gbml", "johnson", "sa"), sa_at_unbounded=True)
    rows = [
        {"example": 0, "buffer": "inf", "algorithm": "gbml", "trial": 0, "makespan": 5},
        {"example": 0, "buffer": "inf", "algorithm": "johnson", "trial": 0, "makespan": 5},
        {"example": 0, "buffer": "inf", "algorithm": "sa", "trial": 0, "makespan": 0},
    ]
    row = aggregate(plan, rows).row(0, None)
    assert row.ratios["I_II"] == 1.0
    assert row.ratios["I_III"] is None and row.ratios["II_III"] is None


def test_aggregate_counts_errors_per_row():
    plan = small_plan(trials=1, algorithms=("johnson",))
    rows = [
        {"example": 0, "buffer": "inf", "algorithm": "johnson", "trial": 0, "error": "ValueError: boom"},
    ]
    row = aggregate(plan, rows).row(0, None)
    assert row.means["johnson"] is None
    assert row.errors == ("ValueError: boom",)


# ---------------------------------------------------------------------------
# Reports


def row_for_report(**overrides):
    kwargs = dict(
        example=1,
        buffer=None,
        means={"gbml": 243.0, "johnson": 243.0, "sa": None},
        ratios={"I_II": 1.0, "I_III": None, "II_III": None},
        spreads={"gbml": (243, 243), "johnson": (243, 243)},
        errors=(),
    )
    kwargs.update(overrides)
    return ResultRow(**kwargs)


def test_csv_line_format_exact():
    table = ResultTable(rows=(row_for_report(),), trials=10)
    assert emit_report(table, "csv") == CSV_HEADER + "\n" + "1,inf,243,243,,1.000,,\n"


def test_csv_header_is_stable():
    assert CSV_HEADER == (
        "example,buffer,mean_gbml,mean_johnson,mean_sa,"
        "ratio_I_II,ratio_I_III,ratio_II_III"
    )


def test_csv_empty_table_is_header_only():
    assert emit_report(ResultTable(rows=(), trials=1), "csv") == CSV_HEADER + "\n"


def test_csv_fractional_mean_and_ratio_formatting():
    row = row_for_report(
        buffer=2,
        means={"gbml": 250.5, "johnson": 243.0, "sa": 248.25},
        ratios={"I_II": 250.5 / 243.0, "I_III": 1.2, "II_III": 0.97531},
    )
    line = emit_report(ResultTable(rows=(row,), trials=10), "csv").splitlines()[1]
    assert line == "1,2,250.5,243,248.25,1.031,1.200,0.975"


def test_markdown_report_shape(tiny_table):
    text = emit_report(tiny_table, "markdown")
    lines = text.strip().splitlines()
    assert len(lines) == len(tiny_table.rows) + 2
    assert lines[0].startswith("| example | buffer |")
    assert set(lines[1]) <= {"|", "-"}
    assert all(line.startswith("| ") and line.endswith(" |") for line in lines[2:])


def test_json_report_round_trips(tiny_table):
    doc = json.loads(emit_report(tiny_table, "json"))
    assert doc == tiny_table.to_document()


def test_unknown_report_format_rejected(tiny_table):
    with pytest.raises(ValidationError):
        emit_report(tiny_table, "xml")
