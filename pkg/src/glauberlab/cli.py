"""Command-line front end.

Exit status: 0 every requested check passed, 1 some check failed,
2 malformed model/function spec or arguments, 3 a size cap was exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import shipped_model_names, shipped_spec
from .coalition import CoalitionError, greedy_coalition
from .commutators import CommutatorError, default_T, verify_intertwining
from .constants import check_hypercontractivity, log_sobolev_constant, poincare_constant
from .glauber import DenseCapError
from .inequalities import (kkl_extract, talagrand_functional, technical_check,
                           variance_decomposition_check)
from .influences import NotBooleanError, influence_report, sandwich_check
from .modelfile import ModelSpecError, dump_model_spec, load_model_spec
from .models import ModelError, dobrushin_matrix, verify_markov_property
from .observables import FunctionSpecError, parse_function_spec
from .statespace import DEFAULT_MAX_STATES, CapExceededError

EXIT_OK, EXIT_FAIL, EXIT_SPEC, EXIT_CAP = 0, 1, 2, 3
VERIFY_CHECKS = ("talagrand", "kkl", "technical", "intertwine", "sandwich", "dervar")
RECORD_FIELDS = ("check", "model_id", "function_id", "lhs", "rhs", "implied_constant", "passed",
                 "parameters", "seed", "version")


class Reporter:
    """Collects one record per check and renders them in the requested format."""

    def __init__(self, args, model_id: str, function_id: str = ""):
        self.args = args
        self.model_id = model_id
        self.function_id = function_id
        self.records: list[dict] = []
        self.text: list[str] = []
        self.csv_override: str | None = None

    def record(self, check: str, lhs, rhs, implied, passed: bool, **params):
        rec = {
            "check": check, "model_id": self.model_id, "function_id": self.function_id,
            "lhs": _num(lhs), "rhs": _num(rhs), "implied_constant": _num(implied),
            "passed": bool(passed), "parameters": {k: _num(v) for k, v in params.items()},
            "seed": self.args.seed, "version": __version__,
        }
        self.records.append(rec)
        status = "PASS" if passed else "FAIL"
        extras = " ".join(f"{k}={_fmt(v)}" for k, v in params.items())
        self.text.append(f"[{status}] {check}: lhs={_fmt(lhs)} rhs={_fmt(rhs)} "
                         f"implied={_fmt(implied)} {extras}".rstrip())

    def note(self, line: str):
        self.text.append(line)

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.records)

    def render(self) -> str:
        fmt = self.args.format
        if fmt == "records":
            return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)
        if fmt == "csv":
            if self.csv_override is not None:
                return self.csv_override
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(RECORD_FIELDS)
            for r in self.records:
                w.writerow([json.dumps(r[k], sort_keys=True) if k == "parameters" else r[k] for k in RECORD_FIELDS])
            return buf.getvalue()
        head = f"# model={self.model_id} function={self.function_id or '-'} seed={self.args.seed} version={__version__}"
        return "\n".join([head, *self.text]) + "\n"


def _num(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


def _load(args):
    if not Path(args.model).exists() and args.model in shipped_model_names():
        spec = shipped_spec(args.model)
    else:
        spec = load_model_spec(args.model)
    measure = spec.build(max_states=args.max_states)
    return spec, measure


def _function(args, measure):
    if not args.function:
        raise FunctionSpecError("this command needs --function")
    return parse_function_spec(args.function, measure.space)


def cmd_model(args, out):
    spec, measure = _load(args)
    rep = Reporter(args, spec.name)
    if args.action == "show":
        out.write(dump_model_spec(spec))
        return EXIT_OK
    tol = args.tol if args.tol is not None else 1e-10
    ok, worst = verify_markov_property(measure, tol=tol)
    A = dobrushin_matrix(measure)
    rep.record("markov-property", worst, tol, None, ok, Delta=measure.max_degree)
    rep.record("model-constants", measure.b, A.op_norm, None, True, b=measure.b, Delta=measure.max_degree,
               dobrushin_op_norm=A.op_norm, n=measure.n, q=measure.q)
    out.write(rep.render())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_constants(args, out):
    spec, measure = _load(args)
    rep = Reporter(args, spec.name)
    pc = poincare_constant(measure)
    ls = log_sobolev_constant(measure, seed=args.seed)
    hc = check_hypercontractivity(measure, ls.rho, trials=args.trials, seed=args.seed)
    tol = args.tol if args.tol is not None else 1e-8
    rep.record("poincare", pc.lam, pc.ratio, None, abs(pc.ratio - pc.lam) <= tol * max(1.0, pc.lam),
               witness_ratio=pc.ratio)
    rep.record("log-sobolev", ls.rho, pc.lam, ls.rho / pc.lam, ls.rho <= pc.lam + tol and ls.rho > 0,
               rho_is_upper_bound=ls.is_upper_bound, witness_ratio=ls.witness_ratio,
               limited_by_poincare=ls.limited_by_poincare, starts=ls.starts)
    rep.record("hypercontractivity", hc.worst_margin, 0.0, None, hc.passed, trials=hc.trials,
               worst_time=hc.worst_time, rho=ls.rho)
    for note in ls.notes:
        rep.note(f"note: {note}")
    out.write(rep.render())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_influences(args, out):
    spec, measure = _load(args)
    f = _function(args, measure)
    rep = Reporter(args, spec.name, f.name)
    report = influence_report(measure, f.values)
    for i, I, e, n1, n2 in report.rows():
        rep.record(f"influence[{i}]", float(I), float(n1), None, True, coordinate=i,
                   effect=float(e) if e else None, norm2=float(n2))
    rep.note(f"max influence {report.max_influence:.10g} at coordinate {report.argmax}; "
             f"total {report.total_influence:.10g}")
    rep.csv_override = report.to_csv()
    out.write(rep.render())
    return EXIT_OK


def cmd_verify(args, out):
    spec, measure = _load(args)
    f = _function(args, measure)
    rep = Reporter(args, spec.name, f.name)
    check = args.check
    if check in ("talagrand", "technical"):
        rho = log_sobolev_constant(measure, seed=args.seed).rho
        if check == "talagrand":
            r = talagrand_functional(measure, f.values, rho)
            rhs = r.rhs_functional * measure.q**4 * measure.b**4 * r.parameters["Delta"] ** 2 / rho
            rep.record("talagrand", r.lhs, rhs, r.implied_constant, math.isfinite(r.implied_constant),
                       rho=rho, b=measure.b, Delta=r.parameters["Delta"], q=measure.q)
        else:
            T = args.T if args.T is not None else default_T(measure)
            r = technical_check(measure, f.values, T, rho)
            rep.record("technical", r.lhs, r.rhs_functional, r.implied_constant, math.isfinite(r.implied_constant),
                       rho=rho, T=T, b=measure.b, q=measure.q)
    elif check == "kkl":
        r = kkl_extract(measure, f.values)
        rep.record("kkl", r.max_influence, r.bound_functional, r.alpha,
                   r.degenerate or (r.alpha is not None and r.alpha > 0),
                   coordinate=r.coordinate, variance=r.variance, degenerate=r.degenerate)
    elif check == "intertwine":
        T = args.T if args.T is not None else default_T(measure)
        tol = args.tol if args.tol is not None else 1e-6
        for i in range(measure.n):
            r = verify_intertwining(measure, i, T, args.K, tol)
            rep.record(f"intertwine[{i}]", r.residual_fro, tol, None, r.passed, T=T, K=args.K,
                       residual_op=r.residual_op)
    elif check == "sandwich":
        for p in (1.0, 2.0):
            r = sandwich_check(measure, f.values, p)
            rep.record(f"sandwich[p={p:g}]", r.min_slack, 0.0, None, r.passed, p=p, b=measure.b)
    elif check == "dervar":
        T = args.T if args.T is not None else 1.0
        tol = args.tol if args.tol is not None else 1e-8
        r = variance_decomposition_check(measure, f.values, T)
        rep.record("dervar", r.lhs, r.rhs, None, r.relative_residual <= tol, T=T,
                   integral=r.integral, relative_residual=r.relative_residual)
    out.write(rep.render())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_coalition(args, out):
    spec, measure = _load(args)
    f = _function(args, measure)
    rep = Reporter(args, spec.name, f.name)
    if args.epsilon is None:
        raise FunctionSpecError("coalition needs --epsilon")
    r = greedy_coalition(measure, f.values, args.epsilon)
    budget = r.budget_bound
    within = budget is None or len(r.S) <= budget
    rep.record("coalition", len(r.S), budget, r.alpha,
               r.succeeded and r.monotone_trajectory and r.gains_hold and within,
               epsilon=args.epsilon, b=measure.b, final_p=r.trajectory[-1],
               coalition=" ".join(map(str, r.S)))
    rep.csv_override = r.to_csv()
    out.write(rep.render())
    return EXIT_OK if rep.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model-spec file (YAML/JSON) or the name of a shipped model")
    common.add_argument("--function", help="observable spec, e.g. 'majority', 'dictator 0', 'table f.txt'")
    common.add_argument("--epsilon", type=float)
    common.add_argument("--T", type=float, help="semigroup time")
    common.add_argument("--K", type=int, default=12, help="commutator-series truncation order")
    common.add_argument("--tol", type=float, help="pass threshold (check-specific default)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=1000, help="random probes for hypercontractivity")
    common.add_argument("--format", choices=("text", "records", "csv"), default="text")
    common.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    common.add_argument("--output", help="also write the report to this file")

    parser = argparse.ArgumentParser(prog="glauberlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    m = sub.add_parser("model", parents=[common], help="inspect a model")
    m.add_argument("action", choices=("check", "show"))
    m.set_defaults(func=cmd_model)
    sub.add_parser("constants", parents=[common], help="Poincare and log-Sobolev constants").set_defaults(func=cmd_constants)
    sub.add_parser("influences", parents=[common], help="per-coordinate influences").set_defaults(func=cmd_influences)
    v = sub.add_parser("verify", parents=[common], help="evaluate an inequality")
    v.add_argument("check", choices=VERIFY_CHECKS)
    v.set_defaults(func=cmd_verify)
    sub.add_parser("coalition", parents=[common], help="greedy coalition").set_defaults(func=cmd_coalition)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        status = args.func(args, buf)
    except (CapExceededError, DenseCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ModelSpecError, FunctionSpecError, ModelError, NotBooleanError, CoalitionError,
            CommutatorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    text = buf.getvalue()
    out.write(text)
    if args.output:
        Path(args.output).write_text(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
