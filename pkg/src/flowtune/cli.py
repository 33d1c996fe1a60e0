"""Command line entry point: ``flowtune <command> ...``.

Exit codes: 0 success, 2 infeasible SLO, 3 invalid workflow or config.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from .baselines import BoParams, MaffParams
from .configurator import TunerParams
from .cost import PricingParams
from .errors import ConfigOutOfBounds, InfeasibleSlo, ValidationError
from .graph import validate_dag
from .harness import (
    METHODS,
    MethodParams,
    evaluate_config,
    input_aware_optimize,
    optimize,
    parse_classes,
    run_experiment,
    summary_table,
)
from .templates import TEMPLATE_NAMES, generate_workload, load_template
from .trace import summarize, write_trace
from .workflow_io import configs_to_dict, load_configs, load_workflow, save_configs, save_workflow

EXIT_INFEASIBLE = 2
EXIT_INVALID = 3


def parse_seeds(text: str) -> list[int]:
    """``"1..10"`` (inclusive) or ``"1,4,9"``."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s.strip()]


def _add_tuning_flags(p: argparse.ArgumentParser) -> None:
    d = TunerParams()
    p.add_argument("--func-trial", type=int, default=d.func_trial)
    p.add_argument("--max-trail", type=int, default=d.max_trail)
    p.add_argument("--step0-cpu", type=float, default=d.step0_cpu)
    p.add_argument("--step0-mem", type=int, default=d.step0_mem)
    p.add_argument("--bo-budget", type=int, default=BoParams().budget)
    p.add_argument("--maff-step", type=int, default=MaffParams().mem_step)
    p.add_argument("--mu0", type=float, help="price per vCPU-second")
    p.add_argument("--mu1", type=float, help="price per GB-second")
    p.add_argument("--mu2", type=float, help="price per request")


def _method_params(args, dag) -> MethodParams:
    pricing = None
    if any(v is not None for v in (args.mu0, args.mu1, args.mu2)):
        base = dag.pricing or PricingParams()
        pricing = PricingParams(
            base.mu0 if args.mu0 is None else args.mu0,
            base.mu1 if args.mu1 is None else args.mu1,
            base.mu2 if args.mu2 is None else args.mu2,
        )
    tuner = TunerParams(
        func_trial=args.func_trial, max_trail=args.max_trail, step0_cpu=args.step0_cpu, step0_mem=args.step0_mem
    )
    bo = BoParams(budget=args.bo_budget, init_random=min(BoParams().init_random, args.bo_budget))
    return MethodParams(tuner=tuner, bo=bo, maff=MaffParams(mem_step=args.maff_step), pricing=pricing)


def cmd_gen(args) -> int:
    t = load_template(args.template, args.fan_out)
    dag = generate_workload(t, args.seed, noise_sigma=args.noise, slo=args.slo)
    save_workflow(dag, args.out)
    print(f"wrote {args.out}: {len(dag.nodes)} nodes, {len(dag.edges)} edges, slo {dag.slo:g}s")
    return 0


def cmd_optimize(args) -> int:
    dag = load_workflow(args.workflow)
    params = _method_params(args, dag)
    res = optimize(dag, args.method, args.slo, args.seed, params)
    save_configs(res.configs, args.out)
    if args.trace:
        write_trace(res.trace, args.trace)
    print(json.dumps({"method": args.method, "seed": args.seed, **summarize(res.trace)}))
    return 0


def cmd_evaluate(args) -> int:
    dag = load_workflow(args.workflow)
    configs = load_configs(args.config)
    for c in configs.values():
        if not c.in_bounds():
            raise ConfigOutOfBounds(f"config {c} outside the allowed range")
    ev = evaluate_config(dag, configs, args.runs, args.seed, slo=args.slo)
    print(json.dumps(ev.to_dict()))
    return 0


def cmd_compare(args) -> int:
    dag = load_workflow(args.workflow)
    validate_dag(dag)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise SystemExit(f"unknown methods: {', '.join(sorted(unknown))}")
    out = Path(args.out)
    out_dir = out.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = out.stem
    params = _method_params(args, dag)
    reports = run_experiment(
        dag, methods, parse_seeds(args.seeds), params, args.eval_runs, trace_dir=out_dir / f"{stem}_traces", slo=args.slo
    )
    rows = summary_table(reports)
    out.write_text(json.dumps({"summary": rows, "runs": [r.to_dict() for r in reports]}, indent=2) + "\n")
    if not args.no_figures:
        from .plotting import plot_search_curves, plot_summary

        plot_search_curves(reports, out_dir / f"{stem}_curves.png")
        plot_summary(rows, out_dir / f"{stem}_summary.png")

    cols = sorted({k for r in rows for k in r}, key=lambda k: (k != "method", k))
    w = csv.DictWriter(sys.stdout, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if reports and all(not r.ok and (r.error or "").startswith("InfeasibleSlo") for r in reports):
        print(reports[0].error, file=sys.stderr)
        return EXIT_INFEASIBLE
    return 0


def cmd_input_aware(args) -> int:
    t = load_template(args.template, args.fan_out)
    dag = generate_workload(t, args.seed, noise_sigma=args.noise)
    tuner = TunerParams(max_trail=args.max_trail)
    table = input_aware_optimize(dag, parse_classes(args.classes), args.slo, tuner, seed=args.seed)
    doc = {label: configs_to_dict(cfg) for label, cfg in table.items()}
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    print(json.dumps(doc, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flowtune", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a workflow file from a template")
    p.add_argument("--template", required=True, choices=TEMPLATE_NAMES)
    p.add_argument("--fan-out", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, help="override every profile's noise_sigma")
    p.add_argument("--slo", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("optimize", help="search a configuration with one method")
    p.add_argument("--workflow", required=True)
    p.add_argument("--slo", type=float)
    p.add_argument("--method", choices=METHODS, default="aarc")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="config file to write")
    p.add_argument("--trace", help="trace file to write")
    _add_tuning_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="run a configuration repeatedly")
    p.add_argument("--workflow", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--slo", type=float)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="run several methods over several seeds")
    p.add_argument("--workflow", required=True)
    p.add_argument("--slo", type=float)
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--seeds", default="1..10")
    p.add_argument("--eval-runs", type=int, default=100)
    p.add_argument("--out", required=True, help="report file; traces and figures go next to it")
    p.add_argument("--no-figures", action="store_true")
    _add_tuning_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("input-aware", help="one configuration per input class")
    p.add_argument("--template", required=True, choices=TEMPLATE_NAMES)
    p.add_argument("--classes", required=True, help="e.g. light:0.3,middle:1.0,heavy:3.0")
    p.add_argument("--slo", type=float)
    p.add_argument("--fan-out", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float)
    p.add_argument("--max-trail", type=int, default=TunerParams().max_trail)
    p.add_argument("--out")
    p.set_defaults(func=cmd_input_aware)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InfeasibleSlo as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValidationError, ConfigOutOfBounds) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
