"""Atomic-application system dynamics.

Every action takes its whole effect at one instant tau(a) inside its interval.
The state of a partial system at time t is obtained by splitting it into
branch-free pieces (one chosen outcome per resolved measurement) and applying,
in ascending tau, the operations of each piece's committed paths.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import linalg
from .linalg import DensityOperator
from .model import (
    PartialSystem,
    System,
    TimeInterval,
    all_partials,
    is_local,
    is_trace_preserving_after,
    rational,
    validate_process,
)

COMPLETION = "completion"
START = "start"
MIDPOINT = "midpoint"
EXPLICIT = "explicit"
POLICIES = (COMPLETION, START, MIDPOINT)

MAX_TIE_ORDERS = 5040


class DynamicsError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    tau: Mapping[str, Fraction]
    policy: str

    def __getitem__(self, aid: str) -> Fraction:
        try:
            return self.tau[aid]
        except KeyError:
            raise DynamicsError(f"schedule has no instant for action {aid}") from None

    def instants(self) -> list[Fraction]:
        return sorted(set(self.tau.values()))


def _policy_instant(interval: TimeInterval, policy: str) -> Fraction:
    if policy == COMPLETION:
        return interval.hi
    if policy == START:
        return interval.lo
    if policy == MIDPOINT:
        return interval.midpoint
    raise DynamicsError(f"unknown schedule policy {policy!r}")


def _group_instant(group: Sequence[TimeInterval], policy: str) -> Fraction | None:
    """A common instant for siblings, or None when their intervals share no point."""
    lo = max(iv.lo for iv in group)
    hi = min(iv.hi for iv in group)
    if lo > hi:
        return None
    return hi if policy == COMPLETION else lo


def make_schedule(s: System, policy: str = COMPLETION, tau: Mapping[str, object] | None = None) -> Schedule:
    """Assign an application instant to every action.

    Measurement siblings share one instant whenever their intervals overlap:
    the start of the common window under start/midpoint, its end under
    completion. For aligned processes that is the common start, or the
    earliest sibling end.
    """
    if policy == EXPLICIT:
        if tau is None:
            raise DynamicsError("explicit schedule requires a full tau map")
        exact = {aid: rational(v) for aid, v in tau.items()}
        missing = [aid for aid in s.action_ids() if aid not in exact]
        if missing:
            raise DynamicsError(f"explicit schedule misses actions {missing}")
        extra = set(exact) - set(s.action_ids())
        if extra:
            raise DynamicsError(f"explicit schedule names unknown actions {sorted(extra)}")
        for a in s:
            if not a.interval.contains(exact[a.id]):
                raise DynamicsError(f"tau({a.id}) = {exact[a.id]} lies outside {a.interval}")
        for p in s.processes:
            if not validate_process(p).aligned:
                continue
            for parent, group in p.sibling_groups():
                if len({exact[c] for c in group}) > 1:
                    raise DynamicsError(f"siblings {list(group)} of aligned process {p.name} need a common instant")
        return Schedule(exact, EXPLICIT)

    if policy not in POLICIES:
        raise DynamicsError(f"unknown schedule policy {policy!r}")
    out = {a.id: _policy_instant(a.interval, policy) for a in s}
    for p in s.processes:
        for _, group in p.sibling_groups():
            if len(group) < 2:
                continue
            t = _group_instant([p[c].interval for c in group], policy)
            if t is None:
                continue
            for c in group:
                out[c] = t
    return Schedule(out, policy)


def schedule_warnings(s: System, sched: Schedule) -> list[str]:
    """Sibling groups applied at different instants; their branch sums need not preserve trace."""
    out = []
    for p in s.processes:
        for _, group in p.sibling_groups():
            if len({sched[c] for c in group}) > 1:
                out.append(f"siblings {list(group)} of {p.name} are applied at different instants")
    return out


def schedule_from_overrides(s: System, policy: str, overrides: Mapping[str, object] | None) -> Schedule:
    """A policy schedule with some instants replaced, re-checked as an explicit schedule."""
    base = make_schedule(s, policy)
    if not overrides:
        return base
    tau = dict(base.tau)
    tau.update({k: rational(v) for k, v in overrides.items()})
    return make_schedule(s, EXPLICIT, tau)


@dataclass(frozen=True)
class EvolutionResult:
    state: DensityOperator
    applied: tuple[tuple[str, Fraction], ...]
    warnings: tuple[str, ...] = ()
    branches: tuple[PartialSystem, ...] = ()

    @property
    def trace(self) -> float:
        return self.state.trace()


def _descend(p, sched: Schedule | None, anchor: str, t: Fraction) -> list[str]:
    """Final anchors below `anchor` once every branching resolved by time t is expanded."""
    kids = p.children[anchor]
    if not kids:
        return [anchor]
    if sched is None:
        due = any(p[k].interval.lo <= t for k in kids)
    else:
        due = t > 0 and max(sched[k] for k in kids) <= t
    if not due:
        return [anchor]
    out = []
    for k in kids:
        out.extend(_descend(p, sched, k, t))
    return out


def branch_free_prefix_decomposition(c: PartialSystem, t, sched: Schedule | None = None) -> list[PartialSystem]:
    """Expand c into partial systems that do not branch up to time t.

    Without a schedule the expansion is structural: an anchor is replaced by its
    children as soon as one of them starts by t. With a schedule a sibling
    group is expanded only once all its members have been applied.
    """
    t = rational(t)
    s = c.system
    per_process = [_descend(p, sched, c.anchor(i), t) for i, p in enumerate(s.processes)]
    return [PartialSystem(s, combo) for combo in itertools.product(*per_process)]


def _register_of(s: System, rho: DensityOperator) -> DensityOperator:
    if tuple(rho.register) == s.qubits:
        return rho
    if set(rho.register) != set(s.qubits):
        raise DynamicsError(f"state register {list(rho.register)} does not match system qubits {list(s.qubits)}")
    return rho.reorder(s.qubits)


class Dynamics:
    """The atomic-application backend. `skip` drops actions (used only as a negative control)."""

    def __init__(self, skip: Iterable[str] = ()):
        self.skip = frozenset(skip)

    def committed(self, d: PartialSystem, sched: Schedule, t, strict: bool = False) -> tuple[list[str], list[str]]:
        """Applied action ids of a branch-free partial in application order, plus tie warnings."""
        t = rational(t)
        s = d.system
        events = []
        for i, p in enumerate(s.processes):
            finals = _descend(p, sched, d.anchor(i), t)
            if len(finals) != 1:
                raise DynamicsError(f"{d!r} branches in process {p.name} before time {t}")
            if t <= 0:
                continue
            for aid in p.path_to(finals[0]):
                tau = sched[aid]
                if (tau < t if strict else tau <= t) and aid not in self.skip:
                    events.append((tau, i, aid))
        events.sort()
        return [aid for _, _, aid in events], _tie_warnings(s, sched, events)

    def evolve_branch_free(self, d: PartialSystem, sched: Schedule, t, rho: DensityOperator, strict: bool = False) -> EvolutionResult:
        rho = _register_of(d.system, rho)
        order, warnings = self.committed(d, sched, t, strict)
        matrix = rho.matrix
        for aid in order:
            matrix = linalg.apply_stack(d.system.action(aid).operation.embedded(rho.register), matrix[None])[0]
        applied = tuple((aid, sched[aid]) for aid in order)
        return EvolutionResult(DensityOperator(rho.register, matrix), applied, tuple(warnings), (d,))

    def evolve(self, c: PartialSystem, sched: Schedule, t, rho: DensityOperator, strict: bool = False) -> EvolutionResult:
        t = rational(t)
        rho = _register_of(c.system, rho)
        pieces = branch_free_prefix_decomposition(c, t, sched)
        total = np.zeros_like(rho.matrix)
        log: dict[str, Fraction] = {}
        warnings: list[str] = []
        for d in pieces:
            r = self.evolve_branch_free(d, sched, t, rho, strict)
            total = total + r.state.matrix
            for aid, tau in r.applied:
                log.setdefault(aid, tau)
            warnings.extend(w for w in r.warnings if w not in warnings)
        applied = tuple(sorted(log.items(), key=lambda kv: (kv[1], c.system.process_index(kv[0]), kv[0])))
        return EvolutionResult(DensityOperator(rho.register, total), applied, tuple(warnings), tuple(pieces))


def _tie_warnings(s: System, sched: Schedule, events: list[tuple[Fraction, int, str]]) -> list[str]:
    warnings = []
    for _, group in itertools.groupby(events, key=lambda e: e[0]):
        group = list(group)
        for x, y in itertools.combinations(group, 2):
            a, b = s.action(x[2]), s.action(y[2])
            if x[1] != y[1] and a.qubits & b.qubits:
                warnings.append(
                    f"actions {a.id} and {b.id} are applied at the same instant {x[0]} on shared qubits "
                    f"{sorted(a.qubits & b.qubits)}; applied in process order"
                )
    return warnings


DEFAULT = Dynamics()


def evolve_branch_free(d: PartialSystem, sched: Schedule, t, rho: DensityOperator) -> EvolutionResult:
    return DEFAULT.evolve_branch_free(d, sched, t, rho)


def evolve(c: PartialSystem, sched: Schedule, t, rho: DensityOperator) -> EvolutionResult:
    return DEFAULT.evolve(c, sched, t, rho)


class Evaluator:
    """Batched, memoized evolution of many partial systems of one system and schedule.

    Branch-free pieces are evaluated on a stack of input states at once, and
    applied-action prefixes are shared between pieces.
    """

    def __init__(self, s: System, sched: Schedule, states: Sequence[DensityOperator], dynamics: Dynamics = DEFAULT):
        self.system = s
        self.sched = sched
        self.dynamics = dynamics
        self.states = np.stack([_register_of(s, r).matrix for r in states])
        self._prefix: dict[tuple[str, ...], np.ndarray] = {(): self.states}
        self._pieces: dict[tuple, np.ndarray] = {}

    def _run(self, order: Sequence[str]) -> np.ndarray:
        order = tuple(order)
        k = len(order)
        while order[:k] not in self._prefix:
            k -= 1
        out = self._prefix[order[:k]]
        for j in range(k, len(order)):
            op = self.system.action(order[j]).operation
            out = linalg.apply_stack(op.embedded(self.system.qubits), out)
            self._prefix[order[: j + 1]] = out
        return out

    def piece(self, d: PartialSystem, t: Fraction, strict: bool = False) -> np.ndarray:
        key = (tuple(d.anchor(i) for i in range(len(d.anchors))), t, strict)
        cached = self._pieces.get(key)
        if cached is None:
            order, _ = self.dynamics.committed(d, self.sched, t, strict)
            cached = self._run(order)
            self._pieces[key] = cached
        return cached

    def states_at(self, c: PartialSystem, t, strict: bool = False) -> np.ndarray:
        t = rational(t)
        pieces = branch_free_prefix_decomposition(c, t, self.sched)
        return sum(self.piece(d, t, strict) for d in pieces)

    def traces_at(self, c: PartialSystem, t) -> np.ndarray:
        return np.real(np.trace(self.states_at(c, t), axis1=1, axis2=2))


@dataclass(frozen=True)
class TieReport:
    orders: int
    divergence: float
    warnings: tuple[str, ...]
    states: tuple[DensityOperator, ...] = field(repr=False, default=())


def enumerate_tie_orders(c: PartialSystem, sched: Schedule, t, rho: DensityOperator, limit: int = MAX_TIE_ORDERS) -> TieReport:
    """Evolve under every ordering of same-instant actions and report the largest state difference."""
    t = rational(t)
    s = c.system
    rho = _register_of(s, rho)
    pieces = branch_free_prefix_decomposition(c, t, sched)
    per_piece = []
    warnings: list[str] = []
    for d in pieces:
        order, w = DEFAULT.committed(d, sched, t)
        warnings.extend(x for x in w if x not in warnings)
        groups = [list(g) for _, g in itertools.groupby(order, key=lambda aid: sched[aid])]
        per_piece.append(groups)
    choices = []
    for groups in per_piece:
        choices.append([list(itertools.permutations(g)) for g in groups])
    count = 1
    for ch in choices:
        for perms in ch:
            count *= len(perms)
    if count > limit:
        raise DynamicsError(f"{count} tie-break orders exceed the limit {limit}")

    # the same permutation index applies to a tie group in every piece it occurs in
    tie_groups = sorted({tuple(g) for groups in per_piece for g in groups if len(g) > 1})
    states = []
    for picks in itertools.product(*[list(itertools.permutations(g)) for g in tie_groups]):
        chosen = dict(zip(tie_groups, picks))
        total = np.zeros_like(rho.matrix)
        for groups in per_piece:
            m = rho.matrix
            for g in groups:
                for aid in chosen.get(tuple(g), g):
                    m = linalg.apply_stack(s.action(aid).operation.embedded(rho.register), m[None])[0]
            total = total + m
        states.append(DensityOperator(rho.register, total))
    divergence = max((linalg.max_abs(x.matrix - states[0].matrix) for x in states), default=0.0)
    return TieReport(len(states), divergence, tuple(warnings), tuple(states))


@dataclass(frozen=True)
class AxiomReport:
    initial: bool
    branching: bool
    evolution: bool
    trace: bool
    dijkstra_lamport_instances: int = 0
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.initial and self.branching and self.evolution and self.trace


def time_grid(s: System, sched: Schedule) -> list[Fraction]:
    """0, every instant and end point, each also shifted by a small rational epsilon."""
    points = sorted({Fraction(0)} | set(sched.tau.values()) | {a.interval.hi for a in s} | {a.interval.lo for a in s})
    gaps = [b - a for a, b in zip(points, points[1:]) if b > a]
    eps = (min(gaps) if gaps else Fraction(1)) / 1000
    grid = set(points)
    for x in points:
        grid.add(x + eps)
        if x - eps > 0:
            grid.add(x - eps)
    grid.add(points[-1] + 1)
    return sorted(grid)


def _ops_in(s: System, ids: Iterable[str], register: tuple[str, ...]) -> list[np.ndarray]:
    return [s.action(aid).operation.embedded(register) for aid in ids]


def _apply_all(stacks: list[np.ndarray], states: np.ndarray) -> np.ndarray:
    for k in stacks:
        states = linalg.apply_stack(k, states)
    return states


def check_dynamics_axioms(
    s: System,
    sched: Schedule,
    samples: int = 8,
    seed: int = 0,
    dynamics: Dynamics = DEFAULT,
    tol: float = linalg.EQUALITY_TOL,
) -> AxiomReport:
    """Property-check the four dynamics conditions on sampled partials, times and states."""
    rng = np.random.default_rng(seed)
    reg = s.qubits
    failures: list[str] = []
    partials = all_partials(s)
    picks = [partials[0]] + [partials[i] for i in rng.choice(len(partials), size=min(samples, len(partials)), replace=False)]
    states = [linalg.random_density(reg, rng) for _ in range(3)] + [linalg.random_pure_state(reg, rng)]
    stack = np.stack([r.matrix for r in states])
    grid = time_grid(s, sched)

    random_eval = Evaluator(s, sched, states, dynamics)

    def run(c, t, strict=False):
        return random_eval.states_at(c, t, strict)

    initial = True
    for c in picks:
        if linalg.max_abs(run(c, 0) - stack) > tol:
            initial = False
            failures.append(f"initial: {c!r} changes the state at t=0")

    branching = True
    for c in picks:
        for i, p in enumerate(s.processes):
            a = p.realizers(c.anchor(i))[-1]
            kids = p.children[a]
            if not kids:
                continue
            t = max(p[k].interval.hi for k in kids)
            for tt in (t, grid[-1]):
                whole = run(c.with_anchor(i, a), tt)
                parts = sum(run(c.with_anchor(i, b), tt) for b in kids)
                if linalg.max_abs(whole - parts) > tol:
                    branching = False
                    failures.append(f"branching: {c!r} at {a}, t={tt}")

    evolution = True
    dl = 0
    spanning_eval = Evaluator(s, sched, linalg.spanning_states(reg), dynamics)
    seen = set()
    for c in picks:
        for x, y in _sample_intervals(grid, rng, 4):
            for d in branch_free_prefix_decomposition(c, y, sched):
                ok, msg = _check_factorization(s, sched, random_eval, d, x, y, tol)
                if not ok:
                    evolution = False
                    failures.append(msg)
        for d in branch_free_prefix_decomposition(c, grid[-1], sched):
            for i, p in enumerate(s.processes):
                path = p.path_to(dynamics_final(d, i, sched, grid[-1]))
                for aid in path:
                    a = p[aid]
                    key = (tuple(dynamics_final(d, k, sched, grid[-1]) for k in range(len(s.processes))), aid)
                    if key in seen or not is_local(aid, s):
                        continue
                    seen.add(key)
                    if [b for b in path if p[b].interval.intersects(a.interval)] != [aid]:
                        continue
                    iv = a.interval
                    ok, msg = _check_factorization(
                        s, sched, spanning_eval, d, iv.lo, iv.hi, tol, dl_process=i, dl_action=aid
                    )
                    dl += 1
                    if not ok:
                        evolution = False
                        failures.append(msg)

    trace = True
    for c in picks:
        traces = np.array([np.real(np.trace(run(c, t), axis1=1, axis2=2)) for t in grid])
        if np.any(np.diff(traces, axis=0) > tol):
            trace = False
            failures.append(f"trace: {c!r} increases over time")
        after = [k for k, t in enumerate(grid) if is_trace_preserving_after(c, t)]
        if after:
            k0 = after[0]
            if np.max(np.abs(traces[k0:] - traces[k0])) > tol:
                trace = False
                failures.append(f"trace: {c!r} changes after time {grid[k0]}")

    return AxiomReport(initial, branching, evolution, trace, dl, tuple(failures))


def dynamics_final(d: PartialSystem, i: int, sched: Schedule, t: Fraction) -> str:
    finals = _descend(d.system.processes[i], sched, d.anchor(i), t)
    return finals[0]


def _sample_intervals(grid: list[Fraction], rng: np.random.Generator, n: int) -> list[tuple[Fraction, Fraction]]:
    positive = [g for g in grid if g > 0]
    out = []
    for _ in range(n):
        i, j = sorted(rng.choice(len(positive), size=2))
        out.append((positive[i], positive[j]))
    return out


def _check_factorization(s, sched, evaluator, d, x, y, tol, dl_process=None, dl_action=None):
    """evolve(d, y) = (F_A (x) F_B)(evolve(d, x-)) with A = one process, B = the rest."""
    reg = s.qubits
    order, _ = DEFAULT.committed(d, sched, y)
    window = [aid for aid in order if x <= sched[aid] <= y]
    region = TimeInterval(x, y)
    groups = range(len(s.processes)) if dl_process is None else [dl_process]
    results = [(True, "")]
    before = evaluator.states_at(d, x, strict=True)
    after = evaluator.states_at(d, y)
    for j in groups:
        a_acts = [aid for aid in d.actions_of(j) if s.action(aid).interval.intersects(region)]
        b_acts = [
            aid for i in range(len(s.processes)) if i != j for aid in d.actions_of(i) if s.action(aid).interval.intersects(region)
        ]
        qa = frozenset().union(*(s.action(aid).qubits for aid in a_acts))
        qb = frozenset().union(*(s.action(aid).qubits for aid in b_acts))
        if qa & qb:
            continue
        f_b = [aid for aid in window if s.process_index(aid) != j]
        if dl_action is not None:
            f_a_stacks = [s.action(dl_action).operation.embedded(reg)]
        else:
            f_a_stacks = _ops_in(s, [aid for aid in window if s.process_index(aid) == j], reg)
        expected = _apply_all(_ops_in(s, f_b, reg), _apply_all(f_a_stacks, before))
        if linalg.max_abs(after - expected) > tol:
            label = f"Dijkstra-Lamport for {dl_action}" if dl_action else f"factorization for process {s.processes[j].name}"
            results.append((False, f"evolution: {label} fails on {d!r} over [{x}, {y}]"))
    bad = [r for r in results if not r[0]]
    return (False, bad[0][1]) if bad else (True, "")
