"""Observable dynamics: maximal paths, generator events and the measure mu.

An event is represented by partial systems: omega(C) is the set of maximal
paths through every anchor of C. Finite unions are kept as lists of pairwise
disjoint partial systems, which is enough to close the generator class under
intersection and difference.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .dynamics import DEFAULT, Dynamics, Evaluator, Schedule
from .linalg import VALIDITY_TOL, DensityOperator
from .model import PartialSystem, System, all_partials, ell, validate_system

MAX_PATHS = 100_000

MaximalPath = tuple[tuple[str, ...], ...]
"""One root-to-leaf action path per process, in process order."""


class MeasureError(ValueError):
    pass


def process_paths(p, anchor: str | None = None) -> list[tuple[str, ...]]:
    """Root-to-leaf paths of a process that pass through `anchor` (all paths when None)."""
    start = p.root if anchor is None else anchor
    below = [start] + p.descendants(start)
    return [tuple(p.path_to(leaf)) for leaf in below if not p.children[leaf]]


def maximal_paths(s: System, limit: int = MAX_PATHS) -> list[MaximalPath]:
    per = [process_paths(p) for p in s.processes]
    total = int(np.prod([len(x) for x in per]))
    if total > limit:
        raise MeasureError(f"{total} maximal paths exceed the limit {limit}")
    return list(itertools.product(*per))


def paths_of(c: PartialSystem) -> frozenset[MaximalPath]:
    """omega(C) by enumeration."""
    per = [process_paths(p, c.anchor(i)) for i, p in enumerate(c.system.processes)]
    return frozenset(itertools.product(*per))


def path_distance(p: Sequence[str], q: Sequence[str]) -> float:
    """2^-|p cap q| for two maximal paths of one process, 0 when they coincide."""
    if p[0] != q[0]:
        raise MeasureError("paths start at different roots; they belong to different processes")
    if tuple(p) == tuple(q):
        return 0.0
    return 2.0 ** -len(set(p) & set(q))


def comparable(c: PartialSystem, d: PartialSystem) -> bool:
    """omega(C) and omega(D) intersect iff per process one anchor lies above the other."""
    for p, a, b in zip(c.system.processes, c.key, d.key):
        if not (p.precedes(a, b) or p.precedes(b, a)):
            return False
    return True


@dataclass(frozen=True)
class EventSet:
    parts: tuple[PartialSystem, ...] = ()

    @classmethod
    def of(cls, *parts: PartialSystem) -> EventSet:
        return cls(tuple(parts))

    def is_empty(self) -> bool:
        return not self.parts

    def paths(self) -> frozenset[MaximalPath]:
        return frozenset().union(*(paths_of(c) for c in self.parts))

    def is_disjoint_family(self) -> bool:
        return all(not comparable(x, y) for x, y in itertools.combinations(self.parts, 2))


EMPTY = EventSet()


@dataclass(frozen=True)
class Intersection:
    refinement_x: tuple[PartialSystem, ...]
    refinement_y: tuple[PartialSystem, ...]
    common: PartialSystem | None

    @property
    def empty(self) -> bool:
        return self.common is None


def _check_same_system(c: PartialSystem, d: PartialSystem):
    if c.system is not d.system:
        raise MeasureError("partial systems of different systems")


def _step(x: PartialSystem, y: PartialSystem) -> list[PartialSystem] | None:
    """Expand x one level towards y in the first process where x's anchor lies strictly above y's."""
    s = x.system
    for i, p in enumerate(s.processes):
        a, b = x.key[i], y.key[i]
        if a != b and p.precedes(a, b):
            bottom = p.realizers(a)[-1]
            return [x.with_anchor(i, k) for k in p.children[bottom]]
    return None


def intersect(c: PartialSystem, d: PartialSystem) -> Intersection:
    """Refine {C} and {D} until the intersecting members coincide.

    Returns refinements X of C and Y of D sharing the element E with
    omega(E) = omega(C) cap omega(D), or no common element when they are disjoint.
    """
    _check_same_system(c, d)
    if not comparable(c, d):
        return Intersection((c,), (d,), None)
    xs, ys = [c], [d]
    while True:
        pair = next(((x, y) for x in xs for y in ys if comparable(x, y)), None)
        x, y = pair
        if x == y:
            return Intersection(tuple(xs), tuple(ys), x)
        grown = _step(x, y)
        if grown is not None:
            xs = [z for z in xs if z is not x] + grown
            continue
        grown = _step(y, x)
        ys = [z for z in ys if z is not y] + grown


def intersection(x: EventSet, y: EventSet) -> EventSet:
    parts = []
    for c in x.parts:
        for d in y.parts:
            r = intersect(c, d)
            if r.common is not None:
                parts.append(r.common)
    return EventSet(tuple(parts))


def difference(x: EventSet, y: EventSet) -> EventSet:
    """Disjoint descriptors covering omega(x) minus omega(y)."""
    out = []
    for c in x.parts:
        remaining = [c]
        for d in y.parts:
            nxt = []
            for r in remaining:
                cut = intersect(r, d)
                if cut.common is None:
                    nxt.append(r)
                else:
                    nxt.extend(z for z in cut.refinement_x if z != cut.common)
            remaining = nxt
        out.extend(remaining)
    return EventSet(tuple(out))


def expand_random(c: PartialSystem, rng: np.random.Generator, steps: int) -> list[PartialSystem]:
    """A random sequence of elementary expansions starting from {c}."""
    family = [c]
    for _ in range(steps):
        options = []
        for k, x in enumerate(family):
            for i, p in enumerate(x.system.processes):
                if p.children[p.realizers(x.anchor(i))[-1]]:
                    options.append((k, i))
        if not options:
            break
        k, i = options[rng.integers(len(options))]
        x = family.pop(k)
        p = x.system.processes[i]
        bottom = p.realizers(x.anchor(i))[-1]
        family.extend(x.with_anchor(i, b) for b in p.children[bottom])
    return family


def common_refinement(x: Sequence[PartialSystem], y: Sequence[PartialSystem], debug: bool = False) -> list[PartialSystem]:
    """A family Z reachable from both x and y by expansions; both must cover the same paths."""
    if debug:
        px = frozenset().union(*(paths_of(c) for c in x))
        py = frozenset().union(*(paths_of(c) for c in y))
        if px != py:
            raise MeasureError("common_refinement needs families covering the same paths")
    w, z = list(x), list(y)
    while True:
        pair = next(((c, d) for c in w for d in z if c != d and comparable(c, d)), None)
        if pair is None:
            break
        c, d = pair
        r = intersect(c, d)
        w = [e for e in w if e != c] + list(r.refinement_x)
        z = [e for e in z if e != d] + list(r.refinement_y)
    if set(w) != set(z):
        raise MeasureError("families do not cover the same paths")
    return w


def max_ell(family: Iterable[PartialSystem]) -> int:
    return max(ell(c) for c in family)


class Measure:
    """mu for one system, schedule and batch of initial states, with shared caches."""

    def __init__(self, s: System, sched: Schedule, states: Sequence[DensityOperator], dynamics: Dynamics = DEFAULT):
        report = validate_system(s)
        if not report.ok or not report.trace_preserving:
            raise MeasureError(f"mu needs a valid trace-preserving system ({s.name or 'unnamed'})")
        for r in states:
            if abs(r.trace() - 1) > VALIDITY_TOL:
                raise MeasureError(f"initial state has trace {r.trace():.12g}, expected 1")
        self.system = s
        self.horizon: Fraction = s.max_time()
        self._eval = Evaluator(s, sched, states, dynamics)
        self._cache: dict[tuple[str, ...], np.ndarray] = {}

    def raw(self, c: PartialSystem) -> np.ndarray:
        """Unclamped tr(evolve(c, t_C)(rho)) per state."""
        if c.system is not self.system:
            raise MeasureError("partial system of a different system")
        got = self._cache.get(c.key)
        if got is None:
            got = self._eval.traces_at(c, self.horizon)
            self._cache[c.key] = got
        return got

    def __call__(self, c: PartialSystem) -> np.ndarray:
        return np.clip(self.raw(c), 0.0, 1.0)

    def event(self, e: EventSet) -> np.ndarray:
        total = np.zeros(len(self._eval.states))
        for c in e.parts:
            total = total + self.raw(c)
        return np.clip(total, 0.0, 1.0)


def mu(rho: DensityOperator, c: PartialSystem, sched: Schedule) -> float:
    return float(Measure(c.system, sched, [rho])(c)[0])


def mu_raw(rho: DensityOperator, c: PartialSystem, sched: Schedule) -> float:
    return float(Measure(c.system, sched, [rho]).raw(c)[0])


@dataclass(frozen=True)
class AdditivityReport:
    nodes_checked: int
    families_checked: int
    max_deviation: float
    total: float
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures


def mu_additivity_check(
    s: System,
    rho: DensityOperator,
    sched: Schedule,
    samples: int = 100,
    seed: int = 0,
    tol: float = 1e-9,
) -> AdditivityReport:
    """Branching additivity on sampled nodes plus sum preservation over random expansion families."""
    rng = np.random.default_rng(seed)
    m = Measure(s, sched, [rho])
    failures = []
    worst = 0.0
    whole = PartialSystem.whole(s)
    total = float(m.raw(whole)[0])
    if abs(total - 1) > tol:
        failures.append(f"mu(omega(S)) = {total!r}")
    partials = all_partials(s)
    branchy = []
    for c in partials:
        for i, p in enumerate(s.processes):
            if p.children[p.realizers(c.anchor(i))[-1]]:
                branchy.append((c, i))
    nodes = 0
    for k in range(samples if branchy else 0):
        c, i = branchy[rng.integers(len(branchy))]
        p = s.processes[i]
        bottom = p.realizers(c.anchor(i))[-1]
        parts = sum(float(m.raw(c.with_anchor(i, b))[0]) for b in p.children[bottom])
        dev = abs(float(m.raw(c)[0]) - parts)
        worst = max(worst, dev)
        nodes += 1
        if dev > tol:
            failures.append(f"additivity at {c!r}, process {p.name}: deviation {dev:.3g}")
    families = 0
    for k in range(samples):
        c = partials[rng.integers(len(partials))]
        fam = expand_random(c, rng, int(rng.integers(1, 5)))
        dev = abs(float(m.raw(c)[0]) - sum(float(m.raw(x)[0]) for x in fam))
        worst = max(worst, dev)
        families += 1
        if dev > tol:
            failures.append(f"family from {c!r}: deviation {dev:.3g}")
    return AdditivityReport(nodes, families, worst, total, tuple(failures))
