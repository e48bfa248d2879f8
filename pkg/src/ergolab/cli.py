"""Batch experiment driver.

    ergolab run <config.json> [--render]
    ergolab plot <report.csv>
    ergolab list

One experiment per invocation.  ``run`` writes ``<output>.csv``, a JSON
summary with the pass/fail status of every invariant the experiment
exercised, and a standalone plot script; ``--render`` (or ``"render":
true`` in the config) also renders the figures immediately.  Exit codes:
0 success, 2 validation failure, 3 a numerical check failed, 4
margin/domain errors.  ``ERGOLAB_WORKERS`` overrides the worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import (
    BoundaryUncertaintyError,
    ConfigError,
    CriterionInapplicableError,
    DegenerateWindowError,
    ErgolabError,
    ExhaustedFiltrationError,
    IntegrationDomainError,
    MarginError,
    ModelMismatchError,
    NestingViolationError,
    NonsingularityError,
    NumericCheckError,
    ParameterError,
    PositivityError,
    PreconditionError,
    SamplerInapplicableError,
)
from .experiments import REGISTRY, run_experiment
from .report import emit_plot_script, render_figures, write_csv, write_json

VALIDATION_ERRORS = (
    ConfigError,
    ParameterError,
    PreconditionError,
    CriterionInapplicableError,
    SamplerInapplicableError,
    ModelMismatchError,
    NestingViolationError,
    json.JSONDecodeError,
)
DOMAIN_ERRORS = (
    MarginError,
    BoundaryUncertaintyError,
    IntegrationDomainError,
    DegenerateWindowError,
    NonsingularityError,
    PositivityError,
    ExhaustedFiltrationError,
)


def _diagnostic(exc, code):
    info = {"error": type(exc).__name__, "message": str(exc), "exit": code}
    if isinstance(exc, ConfigError) and exc.key:
        info["key"] = exc.key
    print(json.dumps(info, sort_keys=True), file=sys.stderr)
    return code


def cmd_run(args):
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        return _diagnostic(exc, 2)
    except json.JSONDecodeError as exc:
        return _diagnostic(exc, 2)
    try:
        rows, columns, summary = run_experiment(cfg)
    except VALIDATION_ERRORS as exc:
        return _diagnostic(exc, 2)
    except DOMAIN_ERRORS as exc:
        return _diagnostic(exc, 4)
    except NumericCheckError as exc:
        return _diagnostic(exc, 3)
    base = cfg.get("output")
    if not base:
        base = os.path.splitext(args.config)[0]
    os.makedirs(os.path.dirname(os.path.abspath(base)), exist_ok=True)
    csv_path = write_csv(base + ".csv", rows, columns)
    summary_out = {"experiment": cfg["experiment"], "rows": len(rows), **summary}
    write_json(base + ".json", summary_out)
    script = emit_plot_script(csv_path)
    if args.render or cfg.get("render"):
        render_figures(csv_path)
    print(json.dumps({"csv": csv_path, "summary": base + ".json", "plot_script": script},
                     sort_keys=True))
    checks = summary.get("checks", {})
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        print(json.dumps({"failed_checks": failed, "exit": 3}, sort_keys=True),
              file=sys.stderr)
        return 3
    return 0


def cmd_plot(args):
    try:
        paths = render_figures(args.report)
    except ErgolabError as exc:
        return _diagnostic(exc, 4)
    print(json.dumps({"figures": paths}, sort_keys=True))
    return 0


def cmd_list(_args):
    for name in sorted(REGISTRY):
        print(f"{name}: {REGISTRY[name][1]}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="ergolab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--render", action="store_true", help="render figures now")
    p_run.set_defaults(func=cmd_run)
    p_plot = sub.add_parser("plot", help="render figures for an existing report")
    p_plot.add_argument("report")
    p_plot.set_defaults(func=cmd_plot)
    p_list = sub.add_parser("list", help="print the experiment catalog")
    p_list.set_defaults(func=cmd_list)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
