"""Timed actions, branching processes, distributed systems and partial systems.

Times are exact :class:`fractions.Fraction` values throughout. A process is a
finite rooted tree of actions; siblings are the alternative outcomes of one
measurement. A partial system fixes one anchor per process and stands for the
rooted path to the anchor together with the subtree below it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import linalg
from .linalg import QuantumOperation

WHOLE = None
"""Anchor sentinel meaning "the whole process" (a partial process of itself)."""

MAX_UNFOLD_DEPTH = 64


class ModelError(ValueError):
    """Malformed action, process, system or partial-system data."""


def rational(value) -> Fraction:
    """Exact rational from an int, Fraction, Decimal, or an "a/b" / decimal string."""
    if isinstance(value, bool):
        raise ModelError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction, Decimal)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"not a rational literal: {value!r}") from exc
    raise ModelError(f"times must be exact (int, 'a/b' or decimal string), got {type(value).__name__} {value!r}")


def format_rational(value: Fraction) -> int | str:
    value = Fraction(value)
    return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True, order=True)
class TimeInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = rational(self.lo), rational(self.hi)
        if lo < 0:
            raise ModelError(f"interval starts before time 0: {lo}")
        if lo > hi:
            raise ModelError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def instant(cls, t) -> TimeInterval:
        return cls(t, t)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_instant(self) -> bool:
        return self.lo == self.hi

    def contains(self, t) -> bool:
        return self.lo <= t <= self.hi

    def intersects(self, other: TimeInterval) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def before(self, other: TimeInterval) -> bool:
        """Every instant of self is strictly earlier than every instant of other."""
        return self.hi < other.lo

    def within(self, other: TimeInterval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class Region:
    """An interval of the time axis whose ends may be open; `hi=None` means unbounded."""

    lo: Fraction
    hi: Fraction | None
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lo", rational(self.lo))
        if self.hi is not None:
            object.__setattr__(self, "hi", rational(self.hi))

    @classmethod
    def closed(cls, lo, hi) -> Region:
        return cls(lo, hi)

    @classmethod
    def half_open(cls, lo, hi) -> Region:
        return cls(lo, hi, True, False)

    def is_empty(self) -> bool:
        if self.hi is None:
            return False
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    def meets(self, interval: TimeInterval) -> bool:
        if self.is_empty():
            return False
        # interval is closed, so only the region's own ends can be open
        above_lo = interval.hi >= self.lo if self.lo_closed else interval.hi > self.lo
        if self.hi is None:
            return above_lo
        below_hi = interval.lo <= self.hi if self.hi_closed else interval.lo < self.hi
        return above_lo and below_hi


@dataclass(frozen=True)
class Action:
    id: str
    interval: TimeInterval
    operation: QuantumOperation
    environment: frozenset[str] = frozenset()

    def __post_init__(self):
        if not isinstance(self.interval, TimeInterval):
            object.__setattr__(self, "interval", TimeInterval(*self.interval))
        object.__setattr__(self, "environment", frozenset(self.environment))
        if self.operation.kind == linalg.UNITARY and self.environment:
            raise ModelError(f"unitary action {self.id} must not introduce an environment")

    @property
    def register(self) -> tuple[str, ...]:
        return self.operation.register

    @property
    def qubits(self) -> frozenset[str]:
        return frozenset(self.operation.register)

    def with_timing(self, interval: TimeInterval, environment: Iterable[str] | None = None) -> Action:
        env = self.environment if environment is None else frozenset(environment)
        return Action(self.id, interval, self.operation, env)


def restrict(actions: Iterable[Action], region: Region | TimeInterval | Sequence) -> list[Action]:
    """Actions whose interval meets the region (one Region/TimeInterval or a union of them)."""
    if isinstance(region, (Region, TimeInterval)):
        parts = [region]
    else:
        parts = list(region)
    regions = [Region(p.lo, p.hi) if isinstance(p, TimeInterval) else p for p in parts]
    return [a for a in actions if any(r.meets(a.interval) for r in regions)]


class Process:
    """A rooted tree of actions.

    Construction only checks that edges reference known actions; the tree
    shape itself is judged by :func:`validate_process`, and the tree helpers
    below assume it holds.
    """

    def __init__(self, name: str, actions: Iterable[Action], edges: Iterable[tuple[str, str]] = (), root: str | None = None):
        self.name = name
        self.actions: dict[str, Action] = {}
        self.duplicate_ids: list[str] = []
        for a in actions:
            if a.id in self.actions:
                self.duplicate_ids.append(a.id)
            else:
                self.actions[a.id] = a
        if not self.actions:
            raise ModelError(f"process {name} has no actions")
        self.children: dict[str, tuple[str, ...]] = {aid: () for aid in self.actions}
        self.parents: dict[str, list[str]] = {aid: [] for aid in self.actions}
        self.edges: tuple[tuple[str, str], ...] = tuple(edges)
        for parent, child in self.edges:
            for aid in (parent, child):
                if aid not in self.actions:
                    raise ModelError(f"process {name}: edge {parent}->{child} references unknown action {aid}")
            self.children[parent] = self.children[parent] + (child,)
            self.parents[child].append(parent)
        if root is None:
            roots = [aid for aid, ps in self.parents.items() if not ps]
            root = roots[0] if len(roots) == 1 else None
        elif root not in self.actions:
            raise ModelError(f"process {name}: root {root} is not an action")
        self.root = root
        self._depth: dict[str, int] | None = None

    @classmethod
    def chain(cls, name: str, actions: Sequence[Action]) -> Process:
        edges = [(a.id, b.id) for a, b in zip(actions, actions[1:])]
        return cls(name, actions, edges, actions[0].id)

    def __len__(self):
        return len(self.actions)

    def __iter__(self) -> Iterator[Action]:
        return iter(self.actions.values())

    def __contains__(self, aid: str) -> bool:
        return aid in self.actions

    def __getitem__(self, aid: str) -> Action:
        return self.actions[aid]

    def __eq__(self, other):
        if not isinstance(other, Process):
            return NotImplemented
        return (
            self.name == other.name
            and self.root == other.root
            and self.actions == other.actions
            and self.children == other.children
        )

    def __repr__(self):
        return f"Process({self.name!r}, {len(self.actions)} actions, root={self.root!r})"

    def parent(self, aid: str) -> str | None:
        ps = self.parents[aid]
        return ps[0] if ps else None

    def is_tree(self) -> bool:
        if self.root is None or self.parents[self.root]:
            return False
        if any(len(ps) != 1 for aid, ps in self.parents.items() if aid != self.root):
            return False
        seen = set()
        queue = deque([self.root])
        while queue:
            aid = queue.popleft()
            if aid in seen:
                return False
            seen.add(aid)
            queue.extend(self.children[aid])
        return len(seen) == len(self.actions)

    def _require_tree(self):
        if not self.is_tree():
            raise ModelError(f"process {self.name} is not a rooted tree")

    def depth(self, aid: str) -> int:
        if self._depth is None:
            self._require_tree()
            depth = {self.root: 0}
            for node in self.bfs():
                for c in self.children[node]:
                    depth[c] = depth[node] + 1
            self._depth = depth
        return self._depth[aid]

    def height(self) -> int:
        return max(self.depth(aid) for aid in self.actions)

    def bfs(self) -> list[str]:
        order, queue = [], deque([self.root])
        while queue:
            aid = queue.popleft()
            order.append(aid)
            queue.extend(self.children[aid])
        return order

    def path_to(self, aid: str) -> list[str]:
        """Rooted path ending at `aid`, root first."""
        path = [aid]
        while (p := self.parent(path[-1])) is not None:
            path.append(p)
        return path[::-1]

    def descendants(self, aid: str) -> list[str]:
        """Strict descendants in breadth-first order."""
        out, queue = [], deque(self.children[aid])
        while queue:
            x = queue.popleft()
            out.append(x)
            queue.extend(self.children[x])
        return out

    def precedes(self, a: str, b: str) -> bool:
        """a ->* b."""
        return a in self.path_to(b)

    def leaves(self) -> list[str]:
        return [aid for aid in self.bfs() if not self.children[aid]]

    def sibling_groups(self) -> list[tuple[str, tuple[str, ...]]]:
        """(parent, children) for every action with at least one child."""
        return [(aid, self.children[aid]) for aid in self.bfs() if self.children[aid]]

    def siblings(self, aid: str) -> tuple[str, ...]:
        p = self.parent(aid)
        return (aid,) if p is None else self.children[p]

    def canonical(self, aid: str) -> str:
        """Shallowest anchor inducing the same partial process as `aid`."""
        while (p := self.parent(aid)) is not None and len(self.children[p]) == 1:
            aid = p
        return aid

    def realizers(self, aid: str) -> list[str]:
        """All anchors b with A/b equal to A/aid, shallowest first."""
        top = self.canonical(aid)
        out = [top]
        while len(self.children[out[-1]]) == 1:
            out.append(self.children[out[-1]][0])
        return out

    def induced(self, aid: str) -> frozenset[str]:
        """Action set of the partial process A/aid."""
        return frozenset(self.path_to(aid)) | frozenset(self.descendants(aid))

    def max_time(self) -> Fraction:
        return max(a.interval.hi for a in self)


@dataclass(frozen=True)
class ProcessReport:
    name: str
    rooted_tree: bool
    sequentiality: bool
    branching: bool
    trace_preserving: bool
    aligned: bool
    finite_in_finite_time: bool = True
    issues: tuple[str, ...] = ()

    @property
    def structural_ok(self) -> bool:
        return self.rooted_tree and self.sequentiality and self.branching and self.finite_in_finite_time


def _sibling_sum(process: Process, group: Sequence[str]) -> QuantumOperation:
    return linalg.kraus_concat([process[c].operation for c in group])


def validate_process(p: Process) -> ProcessReport:
    """Evaluate every process condition independently.

    The root is treated as a one-element sibling group for trace preservation,
    so a whole process is trace-preserving after time 0 only when its root is.
    """
    issues: list[str] = []
    rooted = p.is_tree() and not p.duplicate_ids
    if p.duplicate_ids:
        issues.append(f"duplicate action ids {p.duplicate_ids}")
    if not p.is_tree():
        issues.append("actions and edges do not form a rooted tree")

    sequential = True
    for parent, child in p.edges:
        if not p[parent].interval.before(p[child].interval):
            sequential = False
            issues.append(f"{parent}->{child}: {p[parent].interval} is not before {p[child].interval}")

    branching = True
    trace_preserving = True
    aligned = True
    groups = [list(ch) for _, ch in sorted(((k, v) for k, v in p.children.items() if v), key=lambda kv: kv[0])]
    if p.root is not None:
        groups.append([p.root])
    for group in groups:
        registers = {p[c].qubits for c in group}
        if len(registers) > 1:
            branching = False
            trace_preserving = False
            issues.append(f"siblings {group} act on different registers")
            continue
        report = linalg.check_validity(_sibling_sum(p, group))
        if not report.ok:
            branching = False
            issues.append(f"sum of operations of {group} is not a quantum operation")
        if not report.trace_preserving:
            trace_preserving = False
        if len({p[c].interval.lo for c in group}) > 1 or len({p[c].environment for c in group}) > 1:
            aligned = False
    return ProcessReport(p.name, rooted, sequential, branching, trace_preserving and branching, aligned, True, tuple(issues))


class System:
    """Parallel composition of processes over an ordered qubit universe."""

    def __init__(self, processes: Sequence[Process], qubits: Sequence[str] | None = None, name: str = ""):
        self.processes: tuple[Process, ...] = tuple(processes)
        if not self.processes:
            raise ModelError("a system needs at least one process")
        self.name = name
        used = sorted({q for p in self.processes for a in p for q in a.register})
        self.qubits: tuple[str, ...] = tuple(qubits) if qubits is not None else tuple(used)
        missing = set(used) - set(self.qubits)
        if missing:
            raise ModelError(f"actions use qubits {sorted(missing)} outside the declared register {list(self.qubits)}")
        self._where: dict[str, int] = {}
        self.duplicate_ids: list[str] = []
        for i, p in enumerate(self.processes):
            for aid in p.actions:
                if aid in self._where:
                    self.duplicate_ids.append(aid)
                else:
                    self._where[aid] = i
        self._local: dict[str, bool] = {}
        self._process_tp: dict[int, bool] = {}

    def __iter__(self) -> Iterator[Action]:
        for p in self.processes:
            yield from p

    def __len__(self):
        return len(self.processes)

    def __eq__(self, other):
        if not isinstance(other, System):
            return NotImplemented
        return self.qubits == other.qubits and self.processes == other.processes

    def __repr__(self):
        names = ", ".join(p.name for p in self.processes)
        return f"System({self.name or '?'}: {names}; qubits={list(self.qubits)})"

    def action(self, aid: str) -> Action:
        return self.processes[self.process_index(aid)][aid]

    def process_index(self, aid: str) -> int:
        try:
            return self._where[aid]
        except KeyError:
            raise ModelError(f"action {aid} is not in the system") from None

    def process_of(self, aid: str) -> Process:
        return self.processes[self.process_index(aid)]

    def action_ids(self) -> list[str]:
        return [a.id for a in self]

    def environment(self, i: int) -> frozenset[str]:
        return frozenset().union(*(a.environment for a in self.processes[i]))

    def max_time(self) -> Fraction:
        return max(p.max_time() for p in self.processes)

    def replace_actions(self, updates: Mapping[str, Action], name: str | None = None) -> System:
        procs = [
            Process(p.name, [updates.get(a.id, a) for a in p], p.edges, p.root)
            for p in self.processes
        ]
        return System(procs, self.qubits, self.name if name is None else name)


@dataclass(frozen=True)
class SystemReport:
    processes: tuple[ProcessReport, ...]
    environment_disjoint: bool
    ids_unique: bool
    issues: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        """All structural checks pass (trace preservation and alignment are reported, not required)."""
        return self.environment_disjoint and self.ids_unique and all(r.structural_ok for r in self.processes)

    @property
    def trace_preserving(self) -> bool:
        return all(r.trace_preserving for r in self.processes)

    @property
    def aligned(self) -> bool:
        return all(r.aligned and r.branching for r in self.processes)

    def flags(self) -> dict[str, bool]:
        return {
            "rooted_tree": all(r.rooted_tree for r in self.processes),
            "sequentiality": all(r.sequentiality for r in self.processes),
            "branching": all(r.branching for r in self.processes),
            "finite_in_finite_time": all(r.finite_in_finite_time for r in self.processes),
            "environment_disjoint": self.environment_disjoint,
            "ids_unique": self.ids_unique,
            "trace_preserving": self.trace_preserving,
            "aligned": self.aligned,
        }


def validate_system(s: System) -> SystemReport:
    reports = tuple(validate_process(p) for p in s.processes)
    issues = []
    disjoint = True
    for i in range(len(s.processes)):
        for j in range(i + 1, len(s.processes)):
            shared = s.environment(i) & s.environment(j)
            if shared:
                disjoint = False
                issues.append(
                    f"processes {s.processes[i].name} and {s.processes[j].name} share environment {sorted(shared)}"
                )
    unique = not s.duplicate_ids and not any(p.duplicate_ids for p in s.processes)
    if not unique:
        issues.append(f"duplicate action ids {sorted(set(s.duplicate_ids))}")
    return SystemReport(reports, disjoint, unique, tuple(issues))


def is_local(aid: str, s: System) -> bool:
    """True iff the action is register- or time-disjoint from every action of every other process."""
    cached = s._local.get(aid)
    if cached is not None:
        return cached
    a = s.action(aid)
    home = s.process_index(aid)
    result = True
    for j, p in enumerate(s.processes):
        if j == home:
            continue
        for b in p:
            if a.qubits & b.qubits and a.interval.intersects(b.interval):
                result = False
                break
        if not result:
            break
    s._local[aid] = result
    return result


def local_actions(s: System) -> list[str]:
    """Local action ids in process order, breadth-first within each process."""
    return [aid for p in s.processes for aid in p.bfs() if is_local(aid, s)]


def is_atomic(ids: Iterable[str], s: System) -> bool:
    """Every pair from different processes has strictly ordered intervals."""
    ids = list(ids)
    where = {aid: s.process_index(aid) for aid in ids}
    for x in range(len(ids)):
        a = s.action(ids[x])
        for y in range(x + 1, len(ids)):
            if where[ids[x]] == where[ids[y]]:
                continue
            b = s.action(ids[y])
            if not (a.interval.before(b.interval) or b.interval.before(a.interval)):
                return False
    return True


class PartialSystem:
    """A system with one anchor per process (``WHOLE`` for the full process).

    Two partial systems are equal when they induce the same action sets, which
    happens for different anchors along a chain of single-child actions.
    """

    __slots__ = ("system", "anchors", "_key")

    def __init__(self, system: System, anchors: Sequence[str | None]):
        anchors = tuple(anchors)
        if len(anchors) != len(system.processes):
            raise ModelError(f"{len(anchors)} anchors for {len(system.processes)} processes")
        key = []
        for p, a in zip(system.processes, anchors):
            if a is WHOLE:
                key.append(p.root)
                continue
            if a not in p:
                raise ModelError(f"anchor {a} is not an action of process {p.name}")
            key.append(p.canonical(a))
        self.system = system
        self.anchors = anchors
        self._key = tuple(key)

    @classmethod
    def whole(cls, system: System) -> PartialSystem:
        return cls(system, (WHOLE,) * len(system.processes))

    @property
    def key(self) -> tuple[str, ...]:
        """Canonical (shallowest) anchor per process."""
        return self._key

    def anchor(self, i: int) -> str:
        """Effective anchor of process i (the root when WHOLE)."""
        a = self.anchors[i]
        return self.system.processes[i].root if a is WHOLE else a

    def actions_of(self, i: int) -> frozenset[str]:
        return self.system.processes[i].induced(self.anchor(i))

    def action_ids(self) -> frozenset[str]:
        return frozenset().union(*(self.actions_of(i) for i in range(len(self.anchors))))

    def with_anchor(self, i: int, anchor: str | None) -> PartialSystem:
        anchors = list(self.anchors)
        anchors[i] = anchor
        return PartialSystem(self.system, anchors)

    def __eq__(self, other):
        if not isinstance(other, PartialSystem):
            return NotImplemented
        return self.system is other.system and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        parts = []
        for p, a in zip(self.system.processes, self.anchors):
            parts.append(f"{p.name}/{'*' if a is WHOLE else a}")
        return "PartialSystem(" + " || ".join(parts) + ")"

    def describe(self) -> dict[str, str]:
        return {p.name: ("*" if a is WHOLE else a) for p, a in zip(self.system.processes, self.anchors)}


def partial(s: System, anchors: Sequence[str | None] | Mapping[str, str | None]) -> PartialSystem:
    """Partial system from a per-process anchor list or a {process name: anchor} map."""
    if isinstance(anchors, Mapping):
        names = [p.name for p in s.processes]
        unknown = set(anchors) - set(names)
        if unknown:
            raise ModelError(f"unknown processes {sorted(unknown)}")
        anchors = [anchors.get(n, WHOLE) for n in names]
    return PartialSystem(s, anchors)


def children_expansion(c: PartialSystem, i: int, at: str | None = None) -> list[PartialSystem]:
    """One elementary refinement step: replace process i's anchor a by each child of a."""
    p = c.system.processes[i]
    a = c.anchor(i) if at is None else at
    if a not in p.realizers(c.anchor(i)):
        raise ModelError(f"{a} does not induce the partial process {p.name}/{c.anchor(i)}")
    kids = p.children[a]
    if not kids:
        raise ModelError(f"cannot expand at leaf {a} of process {p.name}")
    return [c.with_anchor(i, b) for b in kids]


def ell(c: PartialSystem) -> int:
    """Max over processes of the shortest rooted path length to an inducing anchor."""
    return max(p.depth(k) for p, k in zip(c.system.processes, c.key))


def is_trace_preserving_after(c: PartialSystem, t) -> bool:
    """Only defined for trace-preserving processes; any other process makes the answer False."""
    t = rational(t)
    s = c.system
    for i, p in enumerate(s.processes):
        if i not in s._process_tp:
            s._process_tp[i] = validate_process(p).trace_preserving
        if not s._process_tp[i]:
            return False
        members = c.actions_of(i)
        ok = False
        for a in p.realizers(c.anchor(i)):
            end = p[a].interval.hi
            if t >= end:
                ok = True
                break
            window = [b for b in restrict((p[x] for x in members), Region.closed(t, end))]
            if all(linalg.check_validity(b.operation).trace_preserving for b in window):
                ok = True
                break
        if not ok:
            return False
    return True


def all_partials(s: System, max_ell: int | None = None) -> list[PartialSystem]:
    """Every distinct partial system, optionally limited to ell <= max_ell."""
    per_process = []
    for p in s.processes:
        anchors = [a for a in p.bfs() if p.canonical(a) == a]
        if max_ell is not None:
            anchors = [a for a in anchors if p.depth(a) <= max_ell]
        per_process.append(anchors)
    out = []

    def rec(i, chosen):
        if i == len(per_process):
            out.append(PartialSystem(s, chosen))
            return
        for a in per_process[i]:
            rec(i + 1, chosen + [a])

    rec(0, [])
    return out


@dataclass(frozen=True)
class ProcessTemplate:
    """A repeat-until rule: root action, then a measurement whose `recurse_on` outcome repeats.

    Level k (k >= 1) starts at ``start + k * period`` and lasts `duration`.
    Every level's outcomes share the environment label ``{name}.dev{k}``.
    """

    name: str
    root_op: QuantumOperation
    branches: tuple[tuple[str, QuantumOperation], ...]
    recurse_on: str
    period: Fraction
    duration: Fraction
    start: Fraction = Fraction(1)

    def __post_init__(self):
        for attr in ("period", "duration", "start"):
            object.__setattr__(self, attr, rational(getattr(self, attr)))
        if self.recurse_on not in {label for label, _ in self.branches}:
            raise ModelError(f"recurse_on {self.recurse_on!r} is not a branch label")


def unfold(template: ProcessTemplate, depth: int, max_depth: int = MAX_UNFOLD_DEPTH) -> Process:
    """Finite truncation of a repeat template with `depth` branchings on the recursive arm."""
    if template.period <= 0:
        raise ModelError("template period must be positive")
    if depth < 0:
        raise ModelError("depth must be non-negative")
    if depth > max_depth:
        raise ModelError(f"depth {depth} exceeds the configured limit {max_depth}")
    name = template.name

    def window(k):
        lo = template.start + k * template.period
        return TimeInterval(lo, lo + template.duration)

    root = Action(f"{name}.0", window(0), template.root_op)
    actions, edges = [root], []
    parent = root.id
    for k in range(1, depth + 1):
        next_parent = None
        for label, op in template.branches:
            env = () if op.kind == linalg.UNITARY else (f"{name}.dev{k}",)
            a = Action(f"{name}.{k}.{label}", window(k), op, env)
            actions.append(a)
            edges.append((parent, a.id))
            if label == template.recurse_on:
                next_parent = a.id
        parent = next_parent
    return Process(name, actions, edges, root.id)


def interval_of(obj) -> TimeInterval:
    if isinstance(obj, TimeInterval):
        return obj
    lo, hi = obj
    return TimeInterval(lo, hi)


def sorted_instants(s: System) -> list[Fraction]:
    return sorted({t for a in s for t in (a.interval.lo, a.interval.hi)})


def eye_like(register: Sequence[str]) -> np.ndarray:
    return np.eye(2 ** len(tuple(register)))
