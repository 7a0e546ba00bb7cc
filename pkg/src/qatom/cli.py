"""Command-line interface.

Exit codes: 0 success, 1 validation or equivalence failure (including files
that do not describe a valid scenario), 2 usage error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bundled, linalg
from .diagram import ascii_diagram, svg_diagram
from .dynamics import (
    EXPLICIT,
    POLICIES,
    DynamicsError,
    Dynamics,
    enumerate_tie_orders,
    make_schedule,
    schedule_from_overrides,
    schedule_warnings,
)
from .linalg import DensityOperator, LinalgError
from .measure import Measure, MeasureError
from .model import WHOLE, ModelError, PartialSystem, format_rational, partial, rational, validate_system
from .scenario import Scenario, ScenarioError, dumps, load, save
from .transform import (
    EquivalenceConfig,
    Isomorphism,
    PreconditionError,
    TransformError,
    atomize,
    equivalence_check,
)

OK, FAILED, USAGE = 0, 1, 2
DISPLAY_ZERO = 1e-12


class UsageError(Exception):
    pass


def _scenario(arg: str) -> Scenario:
    path = Path(arg)
    if not path.exists() and arg in bundled.NAMES:
        return bundled.load_bundled(arg)
    if not path.exists():
        raise UsageError(f"no such file or bundled scenario: {arg}")
    return load(path)


def _anchors(sc: Scenario, spec: str | None) -> PartialSystem:
    s = sc.system
    if not spec:
        return PartialSystem.whole(s)
    mapping = {}
    for item in spec.split(","):
        if "=" not in item:
            raise UsageError(f"anchor {item!r} is not of the form PROCESS=ACTION")
        proc, aid = (x.strip() for x in item.split("=", 1))
        mapping[proc] = WHOLE if aid == "*" else aid
    try:
        return partial(s, mapping)
    except ModelError as exc:
        raise UsageError(str(exc)) from None


def _state(sc: Scenario, spec: str | None) -> DensityOperator:
    q = sc.system.qubits
    if spec is None:
        if sc.initial_state is not None:
            return sc.initial_state.reorder(q)
        return DensityOperator.basis(q, "0" * len(q))
    try:
        if spec.startswith("random:"):
            return linalg.random_pure_state(q, np.random.default_rng(int(spec.split(":", 1)[1])))
        return DensityOperator.basis(q, spec)
    except (ValueError, LinalgError) as exc:
        raise UsageError(f"bad --state {spec!r}: {exc}") from None


def _schedule(sc: Scenario, policy: str | None):
    s = sc.system
    chosen = policy or sc.policy or "completion"
    try:
        if chosen == EXPLICIT:
            return make_schedule(s, EXPLICIT, sc.tau)
        return schedule_from_overrides(s, chosen, sc.tau if policy is None else None)
    except DynamicsError as exc:
        raise UsageError(str(exc)) from None


def _fmt_matrix(m: np.ndarray) -> str:
    m = np.where(np.abs(m) < DISPLAY_ZERO, 0, m)
    rows = []
    for row in m:
        cells = []
        for z in row:
            re, im = float(np.real(z)), float(np.imag(z))
            re = 0.0 if abs(re) < DISPLAY_ZERO else re
            im = 0.0 if abs(im) < DISPLAY_ZERO else im
            cells.append(f"{re:+.6f}{im:+.6f}j")
        rows.append("  ".join(cells))
    return "\n".join(rows)


def _write_json(path: str | None, data) -> None:
    if path:
        Path(path).write_text(json.dumps(data, indent=1) + "\n")


def cmd_validate(args) -> int:
    sc = _scenario(args.file)
    report = validate_system(sc.system)
    for flag, value in report.flags().items():
        print(f"{flag:24s} {'pass' if value else 'FAIL'}")
    for r in report.processes:
        for msg in r.issues:
            print(f"  {r.name}: {msg}")
    for msg in report.issues:
        print(f"  {msg}")
    _write_json(args.json, {"file": args.file, "ok": report.ok, "flags": report.flags()})
    return OK if report.ok else FAILED


def cmd_simulate(args) -> int:
    sc = _scenario(args.file)
    s = sc.system
    c = _anchors(sc, args.anchors)
    rho = _state(sc, args.state)
    sched = _schedule(sc, args.schedule)
    try:
        t = rational(args.time) if args.time is not None else s.max_time()
    except ModelError as exc:
        raise UsageError(str(exc)) from None
    if t < 0:
        raise UsageError("time must be non-negative")
    result = Dynamics().evolve(c, sched, t, rho)
    warnings = list(result.warnings) + schedule_warnings(s, sched)
    print(f"scenario {s.name}  partial {c!r}  t = {t}  schedule {sched.policy}")
    print(f"register {' '.join(result.state.register)}")
    print(_fmt_matrix(result.state.matrix))
    print(f"trace {result.trace:.12f}")
    print("applied " + (", ".join(f"{aid}@{tau}" for aid, tau in result.applied) or "(none)"))
    for w in warnings:
        print(f"warning: {w}")
        print(f"warning: {w}", file=sys.stderr)
    summary = {
        "scenario": s.name,
        "time": format_rational(t),
        "schedule": sched.policy,
        "trace": result.trace,
        "applied": [[aid, format_rational(tau)] for aid, tau in result.applied],
        "warnings": warnings,
        "register": list(result.state.register),
        "state": [[[float(z.real), float(z.imag)] for z in row] for row in result.state.matrix],
    }
    if args.enumerate_ties:
        ties = enumerate_tie_orders(c, sched, t, rho)
        print(f"tie-break orders {ties.orders}  divergence {ties.divergence:.6g}")
        summary["tie_orders"] = ties.orders
        summary["divergence"] = ties.divergence
    _write_json(args.json, summary)
    return OK


def _leaf_events(s) -> list[PartialSystem]:
    per = [p.leaves() for p in s.processes]
    return [PartialSystem(s, combo) for combo in itertools.product(*per)]


def cmd_measure(args) -> int:
    sc = _scenario(args.file)
    s = sc.system
    sched = _schedule(sc, args.schedule)
    states = [_state(sc, args.state)]
    rng = np.random.default_rng(args.seed)
    states += [linalg.random_pure_state(s.qubits, rng) for _ in range(args.states)]
    if args.anchors:
        events = [_anchors(sc, spec) for spec in args.anchors]
    else:
        events = [PartialSystem.whole(s)] + _leaf_events(s)
    for w in schedule_warnings(s, sched):
        print(f"warning: {w}", file=sys.stderr)
    try:
        m = Measure(s, sched, states)
    except MeasureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILED
    header = "event".ljust(40) + "".join(f"state{k}".rjust(14) for k in range(len(states)))
    print(header)
    rows = []
    for c in events:
        values = m(c)
        label = ",".join(f"{k}={v}" for k, v in c.describe().items())
        print(label.ljust(40) + "".join(f"{v:14.10f}" for v in values))
        rows.append({"event": c.describe(), "probability": [float(v) for v in values]})
    if not args.anchors:
        total = sum(m.raw(c) for c in events[1:])
        print("sum over leaf events".ljust(40) + "".join(f"{v:14.10f}" for v in total))
    _write_json(args.json, {"scenario": s.name, "schedule": sched.policy, "events": rows})
    return OK


def cmd_atomize(args) -> int:
    sc = _scenario(args.file)
    try:
        out = atomize(sc.system, name=sc.system.name + "-atomized")
    except PreconditionError as exc:
        for msg in exc.problems:
            print(f"precondition: {msg}", file=sys.stderr)
        return FAILED
    result = Scenario(out.system, sc.initial_state, None, {}, sc.seed, sc.description)
    if args.output:
        save(result, args.output)
        map_path = args.map or str(Path(args.output).with_suffix("")) + ".map.json"
        Path(map_path).write_text(json.dumps(out.gamma.to_json(), indent=1) + "\n")
        print(f"wrote {args.output} and {map_path}")
    else:
        sys.stdout.write(dumps(result))
    for aid, t in sorted(out.instants.items()):
        print(f"{aid} -> {{{t}}}", file=sys.stderr)
    return OK


def cmd_equiv(args) -> int:
    a, b = _scenario(args.file1), _scenario(args.file2)
    if args.map:
        try:
            gamma = Isomorphism.from_json(json.loads(Path(args.map).read_text()))
        except (OSError, json.JSONDecodeError, TransformError) as exc:
            raise UsageError(f"cannot read mapping {args.map}: {exc}") from None
    else:
        gamma = Isomorphism.identity(a.system)
    cfg = EquivalenceConfig(depth=args.depth, states=args.states, tol=args.tol, seed=args.seed)
    try:
        report = equivalence_check(a.system, b.system, gamma, cfg)
    except (TransformError, MeasureError) as exc:
        print(f"equivalence check failed: {exc}")
        _write_json(args.json, {"ok": False, "error": str(exc)})
        return FAILED
    print(f"partials {report.partials}  states {report.states}  comparisons {report.checked}")
    print(f"max deviation {report.max_deviation:.3e}  tolerance {cfg.tol:g}")
    for msg in report.failures[:20]:
        print(f"  {msg}")
    print("PASS" if report.ok else "FAIL")
    _write_json(
        args.json,
        {
            "ok": report.ok,
            "max_deviation": report.max_deviation,
            "tolerance": cfg.tol,
            "comparisons": report.checked,
            "failures": list(report.failures),
            "probabilities": [list(row) for row in report.probabilities],
        },
    )
    return OK if report.ok else FAILED


def cmd_diagram(args) -> int:
    sc = _scenario(args.file)
    text = svg_diagram(sc.system) if args.format == "svg" else ascii_diagram(sc.system, args.width)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return OK


def cmd_export(args) -> int:
    names = bundled.NAMES if args.name == "all" else [args.name]
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for name in names:
        if name not in bundled.NAMES:
            raise UsageError(f"unknown bundled scenario {name!r}")
        sc = bundled.build(name) if args.regenerate else bundled.load_bundled(name)
        save(sc, out / f"{name}.json")
        print(out / f"{name}.json")
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qatom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    file_help = "scenario file, or the name of a bundled scenario"

    p = sub.add_parser("validate", help="check structural conditions")
    p.add_argument("file", help=file_help)
    p.add_argument("--json", help="write a machine-readable summary")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="evolve a state")
    p.add_argument("file", help=file_help)
    p.add_argument("--time", help="evaluation time (default: after the last action)")
    p.add_argument("--schedule", choices=POLICIES + (EXPLICIT,))
    p.add_argument("--anchors", help="PROCESS=ACTION[,PROCESS=ACTION...]; * for a whole process")
    p.add_argument("--state", help="basis bitstring or random:SEED (default: the file's initial state)")
    p.add_argument("--enumerate-ties", action="store_true", help="run every order of same-instant actions")
    p.add_argument("--json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("measure", help="probabilities of outcome events")
    p.add_argument("file", help=file_help)
    p.add_argument("--anchors", action="append", help="one event per use; default: whole system and all leaf events")
    p.add_argument("--state", help="basis bitstring or random:SEED")
    p.add_argument("--states", type=int, default=0, help="additional seeded random pure states")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schedule", choices=POLICIES + (EXPLICIT,))
    p.add_argument("--json")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("atomize", help="make every local action instantaneous and atomic")
    p.add_argument("file", help=file_help)
    p.add_argument("-o", "--output")
    p.add_argument("--map", help="where to write the action mapping (default: OUTPUT.map.json)")
    p.set_defaults(func=cmd_atomize)

    p = sub.add_parser("equiv", help="check observable equivalence of two scenarios")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--map", help="mapping file (default: identity on ids and process order)")
    p.add_argument("--depth", type=int)
    p.add_argument("--states", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("diagram", help="render a space-time diagram")
    p.add_argument("file", help=file_help)
    p.add_argument("--format", choices=("ascii", "svg"), default="ascii")
    p.add_argument("--width", type=int, default=72)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("export", help="write bundled scenarios to a directory")
    p.add_argument("name", help="scenario name or 'all'")
    p.add_argument("-o", "--output", default=".")
    p.add_argument("--regenerate", action="store_true", help="rebuild from seeds instead of copying")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE
    except ScenarioError as exc:
        print(f"error: {args_file(args)}: {exc}", file=sys.stderr)
        return FAILED
    except (ModelError, LinalgError, DynamicsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILED


def args_file(args) -> str:
    return getattr(args, "file", None) or getattr(args, "file1", "")


if __name__ == "__main__":
    sys.exit(main())
