"""Isomorphisms, the instantaneous and atomizing transformations, and equivalence checking."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .dynamics import POLICIES, make_schedule
from .linalg import DensityOperator
from .measure import Measure
from .model import (
    PartialSystem,
    System,
    TimeInterval,
    all_partials,
    is_atomic,
    is_local,
    local_actions,
    rational,
    validate_system,
)


class TransformError(ValueError):
    pass


class PreconditionError(TransformError):
    def __init__(self, problems: Sequence[str]):
        self.problems = tuple(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class Isomorphism:
    """gamma: action ids of one system to another, with process i of the first mapped to process_map[i]."""

    process_map: tuple[int, ...]
    pairs: Mapping[str, str]

    def __call__(self, aid: str) -> str:
        return self.pairs[aid]

    @classmethod
    def identity(cls, s: System) -> Isomorphism:
        return cls(tuple(range(len(s.processes))), {aid: aid for aid in s.action_ids()})

    def apply(self, c: PartialSystem, target: System) -> PartialSystem:
        anchors = [None] * len(target.processes)
        for i in range(len(c.anchors)):
            anchors[self.process_map[i]] = self.pairs[c.anchor(i)]
        return PartialSystem(target, anchors)

    def to_json(self) -> dict:
        return {"process_map": list(self.process_map), "pairs": [[a, b] for a, b in self.pairs.items()]}

    @classmethod
    def from_json(cls, data: dict) -> Isomorphism:
        try:
            pm = tuple(int(i) for i in data["process_map"])
            raw = data["pairs"]
        except (KeyError, TypeError, ValueError) as exc:
            raise TransformError(f"malformed mapping: {exc}") from exc
        pairs = {}
        for entry in raw:
            if len(entry) != 2:
                raise TransformError(f"mapping entry {entry!r} is not an (id, id) pair")
            a, b = entry
            if a in pairs:
                raise TransformError(f"mapping is not a function: {a} appears twice")
            pairs[a] = b
        return cls(pm, pairs)


@dataclass(frozen=True)
class IsomorphismReport:
    ok: bool
    violation: str | None = None


def check_isomorphism(s1: System, s2: System, m: Isomorphism) -> IsomorphismReport:
    """Check that gamma preserves the successor relation, registers and operations.

    Timing and environments are free. A mapping that is not a bijection is an error.
    """
    n = len(s1.processes)
    if len(s2.processes) != n or sorted(m.process_map) != list(range(n)):
        raise TransformError("process correspondence is not a bijection")
    ids1, ids2 = set(s1.action_ids()), set(s2.action_ids())
    if set(m.pairs) != ids1:
        missing = sorted(ids1 - set(m.pairs))
        extra = sorted(set(m.pairs) - ids1)
        raise TransformError(f"mapping is not total on the first system (missing {missing}, unknown {extra})")
    image = list(m.pairs.values())
    if len(set(image)) != len(image) or set(image) != ids2:
        raise TransformError("mapping is not a bijection onto the second system's actions")

    for i, p in enumerate(s1.processes):
        q = s2.processes[m.process_map[i]]
        for aid in p.actions:
            if m(aid) not in q:
                return IsomorphismReport(False, f"{aid} maps to {m(aid)}, outside process {q.name}")
        if m(p.root) != q.root:
            return IsomorphismReport(False, f"root {p.root} of {p.name} maps to {m(p.root)}, not the root {q.root}")
        for aid in p.actions:
            mapped = sorted(m(c) for c in p.children[aid])
            if mapped != sorted(q.children[m(aid)]):
                return IsomorphismReport(False, f"successors of {aid} are not preserved by the mapping")
        for a in p:
            b = q[m(a.id)]
            if a.register != b.register:
                return IsomorphismReport(False, f"{a.id} acts on {list(a.register)} but {b.id} on {list(b.register)}")
            if not linalg.operations_close(a.operation, b.operation, 1e-12):
                return IsomorphismReport(False, f"operations of {a.id} and {b.id} differ")
    return IsomorphismReport(True)


@dataclass(frozen=True)
class Transformed:
    system: System
    gamma: Isomorphism
    instants: Mapping[str, Fraction] = field(default_factory=dict)


def _common_instant(intervals: Sequence[TimeInterval]) -> Fraction:
    lo = max(iv.lo for iv in intervals)
    hi = min(iv.hi for iv in intervals)
    if lo > hi:
        raise TransformError("sibling intervals have no common instant")
    return (lo + hi) / 2


def make_instantaneous(s: System, targets: Sequence[str], instants: Mapping[str, object] | None = None, name: str | None = None) -> Transformed:
    """Shrink each local target to a single instant inside its interval and clear its environment.

    The default instant is the midpoint; siblings that are all targeted share
    the midpoint of their common window.
    """
    instants = {k: rational(v) for k, v in (instants or {}).items()}
    problems = []
    targets = list(dict.fromkeys(targets))
    for aid in targets:
        try:
            if not is_local(aid, s):
                problems.append(f"{aid} is not local")
        except Exception as exc:
            problems.append(str(exc))
    for aid, t in instants.items():
        if aid not in targets:
            problems.append(f"instant given for non-target {aid}")
        elif not s.action(aid).interval.contains(t):
            problems.append(f"instant {t} for {aid} lies outside {s.action(aid).interval}")
    if problems:
        raise PreconditionError(problems)

    chosen: dict[str, Fraction] = {}
    target_set = set(targets)
    for aid in targets:
        if aid in chosen:
            continue
        p = s.process_of(aid)
        group = [g for g in p.siblings(aid)]
        if len(group) > 1 and target_set.issuperset(group):
            given = {instants[g] for g in group if g in instants}
            if len(given) > 1:
                raise PreconditionError([f"siblings {group} were given different instants"])
            t = given.pop() if given else _common_instant([p[g].interval for g in group])
            for g in group:
                chosen[g] = t
        else:
            chosen[aid] = instants.get(aid, s.action(aid).interval.midpoint)

    updates = {aid: s.action(aid).with_timing(TimeInterval.instant(t), ()) for aid, t in chosen.items()}
    out = s.replace_actions(updates, name if name is not None else (s.name + "-instantaneous" if s.name else ""))
    return Transformed(out, Isomorphism.identity(s), chosen)


def atomize_preconditions(s: System) -> list[str]:
    problems = []
    report = validate_system(s)
    if not report.ok:
        problems.extend(report.issues)
        for r in report.processes:
            problems.extend(f"{r.name}: {msg}" for msg in r.issues)
    for r in report.processes:
        if not r.trace_preserving:
            problems.append(f"process {r.name} is not trace-preserving")
        if not r.aligned:
            problems.append(f"process {r.name} is not aligned")
    for a in s:
        if a.interval.length <= 0:
            problems.append(f"action {a.id} has an instantaneous interval {a.interval}")
    return problems


def atomize(s: System, name: str | None = None) -> Transformed:
    """Give every local action its own instant so local actions become pairwise atomic.

    Local actions are visited in process order, breadth first. Each gets the
    smallest free point of an even grid over its interval that avoids instants
    already given to local actions of other processes; local siblings share one.
    """
    problems = atomize_preconditions(s)
    if problems:
        raise PreconditionError(problems)
    locals_ = local_actions(s)
    local_set = set(locals_)
    assigned: dict[str, Fraction] = {}
    for aid in locals_:
        if aid in assigned:
            continue
        i = s.process_index(aid)
        p = s.processes[i]
        group = list(p.siblings(aid))
        mixed = [g for g in group if g not in local_set]
        if mixed:
            raise PreconditionError(
                [f"siblings {group} mix local and non-local actions ({mixed}); alignment cannot be kept"]
            )
        lo = max(p[g].interval.lo for g in group)
        hi = min(p[g].interval.hi for g in group)
        window = TimeInterval(lo, hi)
        excluded = {t for other, t in assigned.items() if s.process_index(other) != i and window.contains(t)}
        k_max = 1 + len(excluded)
        step = (hi - lo) / (k_max + 1)
        t = next(lo + k * step for k in range(1, k_max + 1) if lo + k * step not in excluded)
        for g in group:
            assigned[g] = t
    out = make_instantaneous(s, locals_, assigned, name if name is not None else (s.name + "-atomized" if s.name else ""))
    if not is_atomic(local_actions(out.system), out.system):
        raise TransformError("atomize produced a non-atomic local action set")
    return out


@dataclass(frozen=True)
class EquivalenceConfig:
    depth: int | None = None
    states: int = 4
    tol: float = 1e-9
    policies: tuple[str, ...] = POLICIES
    seed: int = 0


@dataclass(frozen=True)
class EquivalenceReport:
    ok: bool
    max_deviation: float
    checked: int
    partials: int
    states: int
    failures: tuple[str, ...] = ()
    probabilities: tuple[tuple[str, str, float, float], ...] = ()


def probe_states(qubits: Sequence[str], random_states: int, seed: int) -> list[DensityOperator]:
    """Every computational basis state, then seeded random pure states."""
    rng = np.random.default_rng(seed)
    basis = [DensityOperator.basis(qubits, i) for i in range(2 ** len(qubits))]
    return basis + [linalg.random_pure_state(qubits, rng) for _ in range(random_states)]


def equivalence_check(s1: System, s2: System, m: Isomorphism, cfg: EquivalenceConfig = EquivalenceConfig()) -> EquivalenceReport:
    """Compare mu on every partial system of s1 with ell <= depth against its image in s2."""
    iso = check_isomorphism(s1, s2, m)
    if not iso.ok:
        raise TransformError(f"isomorphism check failed: {iso.violation}")
    if set(s1.qubits) != set(s2.qubits):
        raise TransformError("systems act on different qubits")
    depth = cfg.depth if cfg.depth is not None else max(p.height() for p in s1.processes)
    partials = all_partials(s1, depth)
    images = [m.apply(c, s2) for c in partials]
    states = probe_states(s1.qubits, cfg.states, cfg.seed)
    worst = 0.0
    failures = []
    table = []
    checked = 0
    for policy in cfg.policies:
        m1 = Measure(s1, make_schedule(s1, policy), states)
        m2 = Measure(s2, make_schedule(s2, policy), [r.reorder(s2.qubits) for r in states])
        for c, d in zip(partials, images):
            a, b = m1.raw(c), m2.raw(d)
            dev = np.abs(a - b)
            checked += len(dev)
            worst = max(worst, float(dev.max()))
            if policy == cfg.policies[0]:
                table.append((repr(c), policy, float(a[0]), float(b[0])))
            for k in np.nonzero(dev > cfg.tol)[0]:
                failures.append(f"{policy}: {c!r} on state {k}: {a[k]:.12g} vs {b[k]:.12g}")
    return EquivalenceReport(not failures, worst, checked, len(partials), len(states), tuple(failures), tuple(table))


def policy_invariance(s: System, states: Sequence[DensityOperator], policies: Sequence[str] = POLICIES, depth: int | None = None) -> float:
    """Largest difference of mu between schedule policies over all partial systems."""
    partials = all_partials(s, depth)
    values = []
    for policy in policies:
        m = Measure(s, make_schedule(s, policy), states)
        values.append(np.stack([m.raw(c) for c in partials]))
    return max(float(np.max(np.abs(v - values[0]))) for v in values)
