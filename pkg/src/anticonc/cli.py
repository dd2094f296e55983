"""Command-line front end.

Exit codes: 0 ok, 1 verification failure, 2 input error, 3 enumeration cap
exceeded, 4 V <= G violated.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import warnings
from pathlib import Path

from . import bounds, exact, verify
from .charfn import QuadratureSpec, QuadratureWarning
from .core import (AnticoncError, ContractError, DiscreteDist1D, DomainError, ResourceError,
                   Scenario, WeightMatrix, load_scenario, restrict_and_normalize, symmetrize)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_CAP, EXIT_CONTRACT = 0, 1, 2, 3, 4

SWEEP_AXES = ("tau", "epsilon", "lambda_exp", "n")


class CliError(Exception):
    def __init__(self, msg, code):
        super().__init__(msg)
        self.code = code


def _load(path) -> Scenario:
    try:
        return load_scenario(path)
    except FileNotFoundError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_INPUT)
    except (DomainError, ValueError) as exc:
        raise CliError(str(exc) if str(path) in str(exc) else f"{path}: {exc}", EXIT_INPUT)


def _fmt(x) -> str:
    return repr(float(x))


def cmd_q(args) -> int:
    s = _load(args.scenario)
    if args.seed is not None:
        s = s.replace(seed=args.seed)
    if args.samples is not None:
        s = s.replace(mc_samples=args.samples)
    if math.isinf(s.tau):
        print(f"q: {_fmt(1.0)}\nmethod: definition")
        return EXIT_OK
    if not args.mc:
        try:
            q, _, method = bounds.concentration(s, mc_ok=False)
        except ResourceError as exc:
            raise CliError(f"{exc} (pass --mc)", EXIT_CAP)
        print(f"q: {_fmt(q)}\nmethod: {method}")
        return EXIT_OK
    batch = exact.sample_weighted_sum(s.weights, s.law_x, s.mc_samples, s.seed)
    est, se = exact.q_monte_carlo(batch, s.tau)
    print(f"q: {_fmt(est)}\nmethod: monte-carlo\nstderr: {_fmt(se)}\n"
          f"samples: {s.mc_samples}\nseed: {s.seed}")
    return EXIT_OK


def _load_v(path) -> DiscreteDist1D:
    try:
        data = json.loads(Path(path).read_text())
        masses = data["masses"]
        return DiscreteDist1D(data["atoms"], masses, total=data.get("total", sum(masses)))
    except (OSError, KeyError, TypeError, json.JSONDecodeError, DomainError) as exc:
        raise CliError(f"cannot load V from {path}: {exc}", EXIT_INPUT)


def cmd_bound(args) -> int:
    s = _load(args.scenario)
    which = bounds.BOUND_NAMES if args.which == "all" else {
        "esseen": ("esseen",), "thm1": (), "cor1": ("cor1",), "cor2": ("cor2",)}[args.which]
    v_choice = {"tail": "tail", "floor": "floor", "file": "custom"}[args.v]
    custom = None
    if v_choice == "custom":
        if not args.v_file:
            raise CliError("--v file needs --v-file PATH", EXIT_INPUT)
        custom = _load_v(args.v_file)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QuadratureWarning)
        try:
            rep = bounds.build_report(s, v_choice=v_choice, custom_v=custom, which=which,
                                      compute_q=not args.no_q)
        except ContractError as exc:
            raise CliError(f"V is not dominated by G: {exc}", EXIT_CONTRACT)
    if args.format == "csv":
        sys.stdout.write(bounds.reports_to_csv([(0, rep)]))
    else:
        print(rep.to_json())
    return EXIT_OK


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n")


def _junit(results: dict) -> str:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<testsuites>"]
    for name, recs in results.items():
        fails = sum(not r.passed for r in recs)
        lines.append(f'  <testsuite name="{name}" tests="{len(recs)}" failures="{fails}">')
        for r in recs:
            lines.append(f'    <testcase classname="{name}" name="instance_{r.instance}">')
            if not r.passed:
                lines.append('      <failure message="inequality violated or unresolved"/>')
            lines.append("    </testcase>")
        lines.append("  </testsuite>")
    lines.append("</testsuites>")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suites = ("holder", "jensen", "cf", "constants") if args.suite == "all" else (args.suite,)
    results = {}
    estimates = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QuadratureWarning)
        kw = {} if args.count is None else {"count": args.count}
        if "holder" in suites:
            results["holder"] = verify.run_holder(args.seed, **kw)
        if "jensen" in suites:
            results["jensen"] = verify.run_jensen(args.seed, **kw)
        if "cf" in suites:
            results["cf"] = verify.run_cf(args.seed, **({} if args.count is None
                                                        else {"scenarios": args.count}))
        if "constants" in suites:
            recs, estimates = verify.run_frozen_constants(args.seed)
            results["constants"] = recs
    report = {"seed": args.seed, "quadrature": QuadratureSpec.from_env().to_dict(),
              "suites": {}}
    failed = []
    for name, recs in results.items():
        bad = [r for r in recs if not r.passed]
        failed += [f"{name}[{r.instance}]" for r in bad]
        entry = {"instances": len(recs), "failures": len(bad),
                 "failing": [{"instance": r.instance, **r.detail} for r in bad]}
        if name == "cf":
            entry["max_violation"] = max(r.detail["max_violation"] for r in recs)
        report["suites"][name] = entry
    _write_json(out / "verify_report.json", report)
    (out / "verify_report.xml").write_text(_junit(results))
    if estimates:
        (out / "constants.csv").write_text(verify.constants_csv(estimates))
    for name, entry in report["suites"].items():
        line = f"{name}: {entry['instances'] - entry['failures']}/{entry['instances']} passed"
        if "max_violation" in entry:
            line += f", max violation {entry['max_violation']:.3e}"
        print(line)
    if failed:
        print("FAILED: " + ", ".join(failed[:50]) + (" ..." if len(failed) > 50 else ""))
        return EXIT_VERIFY
    return EXIT_OK


def load_sweep(path):
    try:
        data = json.loads(Path(path).read_text())
        base = Scenario.from_dict(data["base"])
        axis = data["axis"]
        values = list(data["values"])
    except FileNotFoundError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_INPUT)
    except (KeyError, TypeError, ValueError, DomainError) as exc:
        raise CliError(f"{path}: malformed sweep: {exc}", EXIT_INPUT)
    if axis not in SWEEP_AXES:
        raise CliError(f"unknown sweep axis {axis!r}", EXIT_INPUT)
    if not values or list(values) != sorted(values):
        raise CliError("sweep values must be nonempty and sorted", EXIT_INPUT)
    family = data.get("family")
    family = verify.FamilySpec.from_dict(family) if family else None
    return base, axis, values, family


def sweep_reports(base: Scenario, axis: str, values, family=None):
    """Yield (row_id, BoundReport) for every axis value; failures become flagged rows."""
    for i, v in enumerate(values):
        custom = None
        try:
            if axis == "tau":
                s = base.replace(tau=float(v))
            elif axis == "epsilon":
                s = base.replace(epsilon=float(v))
            elif axis == "n":
                if family is not None:
                    a = verify.generate_family(dataclasses.replace(family, n=int(v)))
                else:
                    a = WeightMatrix(base.weights.rows[: int(v)])
                s = base.replace(weights=a)
            else:
                s = base
                G = symmetrize(s.law_x)
                p1, G1 = restrict_and_normalize(G, s.tau / s.epsilon)
                if G1 is None:
                    raise DomainError("empty tail: no V of positive mass with this shape")
                custom = DiscreteDist1D(G1.atoms, G1.masses * float(v), total=float(v))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", QuadratureWarning)
                rep = bounds.build_report(s)
                if custom is not None:
                    rep.flags = [f for f in rep.flags if not f.startswith("thm1_tail:")]
                if custom is not None:
                    rep.flags.append(f"thm1_tail:lambda={float(v)!r}")
                    try:
                        rep.thm1_tail = bounds.theorem1_rhs(s.weights, custom, s.tau,
                                                            s.quadrature, G=G)
                        if rep.thm1_tail >= 1:
                            rep.flags.append("thm1_tail:vacuous")
                    except ContractError as exc:
                        rep.thm1_tail = None
                        rep.flags.append(f"thm1_tail:V_not_dominated({exc})")
        except (AnticoncError, ValueError) as exc:
            sc = base.to_dict()
            if axis in ("tau", "epsilon"):
                sc[axis] = v
            rep = bounds.BoundReport(scenario=sc, flags=[f"error:{exc}"])
        yield i, rep


def cmd_sweep(args) -> int:
    base, axis, values, family = load_sweep(args.sweep)
    sys.stdout.write(",".join(bounds.CSV_COLUMNS) + "\n")
    w = csv.writer(sys.stdout, lineterminator="\n")
    for i, rep in sweep_reports(base, axis, values, family):
        w.writerow(rep.csv_row(i))
        sys.stdout.flush()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anticonc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("q", help="concentration function of S_a")
    q.add_argument("scenario")
    q.add_argument("--mc", action="store_true", help="use Monte Carlo instead of enumeration")
    q.add_argument("--seed", type=int)
    q.add_argument("--samples", type=int)
    q.set_defaults(func=cmd_q)

    b = sub.add_parser("bound", help="bound report for one scenario")
    b.add_argument("scenario")
    b.add_argument("--which", choices=("esseen", "thm1", "cor1", "cor2", "all"), default="all")
    b.add_argument("--v", choices=("tail", "floor", "file"), default="tail")
    b.add_argument("--v-file")
    b.add_argument("--format", choices=("json", "csv"), default="json")
    b.add_argument("--no-q", action="store_true", help="skip computing Q(F_a, tau)")
    b.set_defaults(func=cmd_bound)

    v = sub.add_parser("verify", help="run the inequality verification suites")
    v.add_argument("--suite", choices=("holder", "jensen", "cf", "constants", "all"),
                   default="all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default="verify_out")
    v.add_argument("--count", type=int, help="instances per proof-chain suite (default: full size)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="CSV of bound reports along one axis")
    s.add_argument("sweep")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
