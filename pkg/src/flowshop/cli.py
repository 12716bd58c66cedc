"""Command-line front end: instance generation, sequence evaluation,
single-algorithm runs, and full experiment plans.

Every payload printed here goes through the same canonical serializers the
HTTP service uses, so a run with the same inputs and seed produces the same
bytes through either front end.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .baselines import SaConfig, simulated_annealing
from .bench import ExperimentPlan, emit_report, generate_instance, run_experiment
from .gbml import GbmlConfig, evolve
from .model import (
    Instance,
    ValidationError,
    canonical_json,
    evaluate_timeline,
    validate_instance,
    validate_sequence,
    with_buffers,
)
from .results import gbml_result_document, johnson_result_document, sa_result_document


def _parse_buffers(text: str, m: int) -> list:
    tokens = [t.strip() for t in text.split(",")]
    out = []
    for t in tokens:
        if t.lower() in ("inf", "null", "none", ""):
            out.append(None)
        else:
            try:
                out.append(int(t))
            except ValueError:
                raise ValidationError(f"invalid buffer capacity '{t}'")
    if len(out) == 1 and m > 2:
        out = out * (m - 1)
    return out


def _load_instance(path: str, buffers_arg: str | None) -> Instance:
    with open(path) as fh:
        inst = validate_instance(json.load(fh))
    if buffers_arg is not None:
        inst = with_buffers(inst, _parse_buffers(buffers_arg, inst.m))
    return inst


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_gen(args) -> int:
    buffers = _parse_buffers(args.buffers, args.m) if args.buffers else None
    inst = generate_instance(args.n, args.m, args.lo, args.hi, seed=args.seed, buffers=buffers)
    _emit(canonical_json(inst.to_document()) + "\n", args.out)
    return 0


def _cmd_eval(args) -> int:
    inst = _load_instance(args.instance, args.buffers)
    if args.sequence_file:
        with open(args.sequence_file) as fh:
            seq = json.load(fh)
    else:
        seq = [int(t) for t in args.sequence.split(",")]
    validate_sequence(inst, seq)
    tl = evaluate_timeline(inst, seq)
    _emit(canonical_json(tl.to_document()) + "\n", args.out)
    return 0


def _cmd_johnson(args) -> int:
    inst = _load_instance(args.instance, args.buffers)
    _emit(canonical_json(johnson_result_document(inst)) + "\n", args.out)
    return 0


def _cmd_sa(args) -> int:
    inst = _load_instance(args.instance, args.buffers)
    cfg = SaConfig()
    if args.config:
        with open(args.config) as fh:
            cfg = SaConfig.from_document(json.load(fh))
    result = simulated_annealing(inst, cfg, seed=args.seed)
    _emit(canonical_json(sa_result_document(inst, result, args.seed)) + "\n", args.out)
    return 0


def _cmd_gbml(args) -> int:
    instances = [_load_instance(path, args.buffers) for path in args.instance]
    cfg = GbmlConfig()
    if args.config:
        with open(args.config) as fh:
            cfg = GbmlConfig.from_document(json.load(fh))
    result = evolve(instances, cfg, seed=args.seed)
    _emit(canonical_json(gbml_result_document(instances, result, args.seed)) + "\n", args.out)
    return 0


def _cmd_run(args) -> int:
    with open(args.plan) as fh:
        plan = ExperimentPlan.from_document(json.load(fh))
    table = run_experiment(plan, results_path=args.results, workers=args.workers)
    _emit(emit_report(table, args.format), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(args.data, workers=args.workers),
                host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowshop",
        description="Flow-shop scheduling: evaluation, rule learning, baselines, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--n", type=int, required=True, help="job count")
    p.add_argument("--m", type=int, default=2, help="machine count")
    p.add_argument("--lo", type=int, default=1, help="minimum processing time")
    p.add_argument("--hi", type=int, default=10, help="maximum processing time")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--buffers", help="comma-separated capacities, 'inf' for unbounded")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("eval", help="evaluate a sequence on an instance")
    p.add_argument("--instance", required=True, help="instance JSON file")
    p.add_argument("--sequence", help="comma-separated job indices")
    p.add_argument("--sequence-file", help="JSON file holding the sequence")
    p.add_argument("--buffers", help="override buffer capacities")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("johnson", help="two-machine ordering rule")
    p.add_argument("--instance", required=True)
    p.add_argument("--buffers")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_johnson)

    p = sub.add_parser("sa", help="simulated annealing")
    p.add_argument("--instance", required=True)
    p.add_argument("--buffers")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", help="JSON file with annealing settings")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sa)

    p = sub.add_parser("gbml", help="evolve a rule-set")
    p.add_argument("--instance", required=True, action="append",
                   help="instance JSON file (repeat for a multi-instance training set)")
    p.add_argument("--buffers")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", help="JSON file with learner settings")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gbml)

    p = sub.add_parser("run", help="run a full experiment plan")
    p.add_argument("--plan", required=True, help="experiment plan JSON file")
    p.add_argument("--format", default="csv", choices=["csv", "json", "markdown"])
    p.add_argument("--results", help="JSON-lines cell results file (enables resume)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--data", default="./flowshop-data", help="document store directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--workers", type=int, default=None, help="concurrent runs (default: cores)")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "eval" and not (args.sequence or args.sequence_file):
        parser.error("eval needs --sequence or --sequence-file")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
