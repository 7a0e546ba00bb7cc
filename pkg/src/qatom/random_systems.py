"""Seeded random systems for property tests and acceptance runs."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .linalg import QuantumOperation
from .model import Action, Process, System, TimeInterval


@dataclass(frozen=True)
class RandomSpec:
    processes: tuple[int, int] = (2, 3)
    qubits: int = 3
    max_depth: int = 3
    max_paths: int = 32
    local_only: bool = True
    aligned: bool = True
    sibling_overlap: bool = True
    trace_preserving: bool = True
    max_register: int = 2
    branch_prob: float = 0.45
    leaf_prob: float = 0.2


def _unitary_op(register, rng) -> QuantumOperation:
    u = linalg.haar_unitary(2 ** len(register), rng)
    return QuantumOperation(tuple(register), (u,), linalg.UNITARY)


def _measurement_ops(register, outcomes, rng, tp) -> list[QuantumOperation]:
    kraus = linalg.random_measurement(register, rng, outcomes)
    if not tp:
        kraus = [k * 0.9 for k in kraus]
    return [QuantumOperation(tuple(register), (k,), linalg.PARTIAL_MEASUREMENT) for k in kraus]


def _pick_register(qubits, rng, max_register):
    size = int(rng.integers(1, min(max_register, len(qubits)) + 1))
    return tuple(sorted(rng.choice(qubits, size=size, replace=False).tolist()))


def _shape(spec: RandomSpec, rng) -> list[list[int]]:
    """children lists for node ids 0..n-1 (0 is the root) of one process."""
    children: list[list[int]] = [[]]
    depth = [0]
    frontier = [0]
    leaves = 1
    budget = max(1, spec.max_paths)
    while frontier:
        node = frontier.pop(0)
        if depth[node] >= spec.max_depth:
            continue
        u = rng.random()
        if node != 0 and u < spec.leaf_prob:
            continue
        n_kids = 1
        if u > 1 - spec.branch_prob:
            n_kids = int(rng.integers(2, 4))
            if leaves - 1 + n_kids > budget:
                n_kids = 1
        leaves += n_kids - 1
        for _ in range(n_kids):
            children.append([])
            depth.append(depth[node] + 1)
            children[node].append(len(children) - 1)
            frontier.append(len(children) - 1)
    return children


def random_system(seed: int, spec: RandomSpec = RandomSpec()) -> System:
    """A valid random system.

    With `local_only` every action is placed at the earliest time at which it
    does not overlap, on a shared qubit, any already placed action of another process.
    """
    rng = np.random.default_rng(seed)
    qubits = [f"q{i}" for i in range(spec.qubits)]
    n_proc = int(rng.integers(spec.processes[0], spec.processes[1] + 1))
    per_paths = max(2, int(round(spec.max_paths ** (1 / n_proc))))
    shapes = [_shape(RandomSpec(**{**spec.__dict__, "max_paths": per_paths}), rng) for _ in range(n_proc)]

    placed: list[tuple[int, frozenset, TimeInterval]] = []
    actions: list[dict[int, Action]] = [dict() for _ in range(n_proc)]

    def clashes(i, reg, iv):
        return any(j != i and reg & r and iv.intersects(w) for j, r, w in placed)

    # visit sibling groups in random interleaving across processes
    queues = [[(None, [0])] for _ in range(n_proc)]
    env_counter = 0
    while any(queues):
        i = int(rng.choice([k for k in range(n_proc) if queues[k]]))
        parent, group = queues[i].pop(0)
        name = f"P{i}"
        register = _pick_register(qubits, rng, spec.max_register)
        reg = frozenset(register)
        if parent is None:
            start = Fraction(int(rng.integers(1, 4)))
        else:
            start = actions[i][parent].interval.hi + Fraction(int(rng.integers(1, 3)), 2)
        lengths = [Fraction(int(rng.integers(1, 7)), 2) for _ in group]
        offsets = [Fraction(0)] * len(group)
        if not spec.aligned and len(group) > 1:
            offsets = [Fraction(int(rng.integers(0, 3)), 2) for _ in group]
            if spec.sibling_overlap:
                # stretch so the siblings keep a common window
                lengths = [max(ln, max(offsets) - o + Fraction(1, 2)) for o, ln in zip(offsets, lengths)]
        if spec.local_only:
            while any(clashes(i, reg, TimeInterval(start + o, start + o + ln)) for o, ln in zip(offsets, lengths)):
                start += Fraction(1, 2)
        if len(group) == 1:
            if parent is None or rng.random() < 0.8:
                ops = [_unitary_op(register, rng)]
                envs = [()]
            else:
                kraus = linalg.random_measurement(register, rng, 2)
                if not spec.trace_preserving:
                    kraus = [k * 0.9 for k in kraus]
                ops = [QuantumOperation(register, tuple(kraus), linalg.GENERAL)]
                envs = [(f"{name}.env{env_counter}",)]
                env_counter += 1
        else:
            ops = _measurement_ops(register, len(group), rng, spec.trace_preserving)
            label = f"{name}.env{env_counter}"
            env_counter += 1
            if spec.aligned:
                envs = [(label,)] * len(group)
            else:
                envs = [(f"{label}.{k}",) for k in range(len(group))]
        for node, op, ln, off, env in zip(group, ops, lengths, offsets, envs):
            iv = TimeInterval(start + off, start + off + ln)
            actions[i][node] = Action(f"{name}.a{node}", iv, op, env)
            placed.append((i, reg, iv))
            kids = shapes[i][node]
            if kids:
                queues[i].append((node, kids))

    processes = []
    for i in range(n_proc):
        acts = [actions[i][n] for n in sorted(actions[i])]
        edges = [(actions[i][n].id, actions[i][k].id) for n in sorted(actions[i]) for k in shapes[i][n]]
        processes.append(Process(f"P{i}", acts, edges, actions[i][0].id))
    return System(processes, qubits, name=f"random-{seed}")
