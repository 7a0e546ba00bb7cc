"""Bundled example scenarios.

s1..s4 come in a synchronous and an asynchronous variant with identical
structure and gates; only the timing differs. The abstract gates are Haar
random unitaries drawn from the recorded seed, and the generated files store
the matrices explicitly. `nonlocal` has two overlapping non-commuting actions
on one qubit in different processes.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from . import linalg
from .linalg import DensityOperator, QuantumOperation
from .model import Action, Process, System, TimeInterval
from .scenario import Scenario, load, loads, save

SEEDS = {"s1": 1001, "s2": 1002, "s3": 1003, "s4": 1003}

# action id -> (lo, hi) per variant
TIMING = {
    "s1": {
        "sync": {"A1": (4, 12), "B1": (4, 12), "A2": (15, 23)},
        "async": {"A1": (4, 12), "B1": (9, 17), "A2": (15, 23)},
    },
    "s2": {
        "sync": {"C1": (2, 4), "A1": (6, 12), "B1": (6, 12), "A2": (14, 20)},
        "async": {"C1": (2, 4), "A1": (6, 12), "B1": (10, 16), "A2": (14, 20)},
    },
    "s3": {
        "sync": {
            "B1": (2, 4), "A1": (6, 8), "C1": (6, 8), "C2": (10, 12),
            "B2": (10, 12), "A2": (14, 16), "C3": (14, 16), "B3": (18, 20),
        },
        "async": {
            "B1": (2, 5), "A1": (4, 11), "C1": (6, 8), "C2": (12, 14),
            "B2": (9, 17), "A2": (15, 23), "C3": (18, 20), "B3": (21, 24),
        },
    },
}
TIMING["s4"] = {
    "sync": {**TIMING["s3"]["sync"], **{k: (22, 24) for k in ("D0", "D1", "E0", "E1", "F0", "F1")}},
    "async": {
        **TIMING["s3"]["async"],
        "D0": (24, 27), "D1": (24, 27), "E0": (25, 28), "E1": (25, 28), "F0": (22, 26), "F1": (22, 26),
    },
}

NAMES = ("s1", "s1_async", "s2", "s2_async", "s3", "s3_async", "s4", "s4_async", "nonlocal")


def _gates(seed: int, names_regs) -> dict[str, QuantumOperation]:
    rng = np.random.default_rng(seed)
    out = {}
    for name, reg in names_regs:
        u = linalg.haar_unitary(2 ** len(reg), rng)
        out[name] = linalg.unitary(reg, u, name=name)
    return out


def _action(aid, timing, op, env=()):
    lo, hi = timing[aid]
    return Action(aid, TimeInterval(lo, hi), op, frozenset(env))


def _s1(variant: str) -> System:
    t = TIMING["s1"][variant]
    g = _gates(SEEDS["s1"], [("A1", ("a",)), ("A2", ("a",)), ("B1", ("b",))])
    a = Process.chain("A", [_action("A1", t, g["A1"]), _action("A2", t, g["A2"])])
    b = Process.chain("B", [_action("B1", t, g["B1"])])
    return System([a, b], ("a", "b"))


def _s2(variant: str) -> System:
    t = TIMING["s2"][variant]
    g = _gates(SEEDS["s2"], [("A1", ("a",)), ("A2", ("a",)), ("B1", ("b",))])
    c = Process.chain("C", [_action("C1", t, linalg.standard_op("EPR_PREP", ("a", "b")))])
    a = Process.chain("A", [_action("A1", t, g["A1"]), _action("A2", t, g["A2"])])
    b = Process.chain("B", [_action("B1", t, g["B1"])])
    return System([a, b, c], ("a", "b"))


def _s3_actions(key: str, variant: str):
    t = TIMING[key][variant]
    g = _gates(
        SEEDS[key],
        [("A1", ("a",)), ("A2", ("a",)), ("B1", ("b",)), ("B2", ("c",)), ("B3", ("b",))],
    )
    epr = lambda reg: linalg.standard_op("EPR_PREP", reg)  # noqa: E731
    acts = {name: _action(name, t, op) for name, op in g.items()}
    acts["C1"] = _action("C1", t, epr(("b", "c")))
    acts["C2"] = _action("C2", t, epr(("a", "b")))
    acts["C3"] = _action("C3", t, epr(("b", "c")))
    return acts, t


def _s3(variant: str) -> System:
    acts, _ = _s3_actions("s3", variant)
    a = Process.chain("A", [acts["A1"], acts["A2"]])
    b = Process.chain("B", [acts["B1"], acts["B2"], acts["B3"]])
    c = Process.chain("C", [acts["C1"], acts["C2"], acts["C3"]])
    return System([a, b, c], ("a", "b", "c"))


def _s4(variant: str) -> System:
    acts, t = _s3_actions("s4", variant)

    def measured(name, chain, qubit, label):
        extra = [
            _action(f"{label}{m}", t, linalg.standard_op("MEASURE_Z", (qubit,), [m]), (f"dev{label}",))
            for m in (0, 1)
        ]
        edges = [(x.id, y.id) for x, y in zip(chain, chain[1:])] + [(chain[-1].id, e.id) for e in extra]
        return Process(name, chain + extra, edges, chain[0].id)

    a = measured("A", [acts["A1"], acts["A2"]], "a", "D")
    b = measured("B", [acts["B1"], acts["B2"], acts["B3"]], "b", "E")
    c = measured("C", [acts["C1"], acts["C2"], acts["C3"]], "c", "F")
    return System([a, b, c], ("a", "b", "c"))


def _nonlocal() -> System:
    p = Process.chain("P", [Action("P1", TimeInterval(2, 6), linalg.standard_op("X", ("a",)))])
    q = Process.chain("Q", [Action("Q1", TimeInterval(2, 6), linalg.standard_op("H", ("a",)))])
    return System([p, q], ("a",))


DESCRIPTIONS = {
    "s1": "Two processes; B1 runs alongside A1 on a different qubit.",
    "s2": "A plan process prepares an EPR pair; A and B then act on their halves.",
    "s3": "Three processes passing entanglement through EPR preparations.",
    "s4": "s3 followed by Z measurements on every qubit.",
    "nonlocal": "Two processes apply X and H to the same qubit over the same interval.",
}


def build(name: str) -> Scenario:
    """Construct a bundled scenario from its seed."""
    if name == "nonlocal":
        s = _nonlocal()
        s.name = name
        return Scenario(s, DensityOperator.basis(s.qubits, "0"), None, {}, None, DESCRIPTIONS[name])
    key, _, suffix = name.partition("_")
    variant = "async" if suffix == "async" else "sync"
    builders = {"s1": _s1, "s2": _s2, "s3": _s3, "s4": _s4}
    if key not in builders or suffix not in ("", "async"):
        raise KeyError(f"unknown bundled scenario {name!r}; choose from {', '.join(NAMES)}")
    s = builders[key](variant)
    s.name = name
    state = DensityOperator.basis(s.qubits, "0" * len(s.qubits))
    return Scenario(s, state, None, {}, SEEDS[key], DESCRIPTIONS[key])


def scenario_dir() -> Path:
    return Path(str(resources.files("qatom") / "scenarios"))


def load_bundled(name: str) -> Scenario:
    if name not in NAMES:
        raise KeyError(f"unknown bundled scenario {name!r}; choose from {', '.join(NAMES)}")
    text = (resources.files("qatom") / "scenarios" / f"{name}.json").read_text()
    return loads(text, name)


def regenerate(directory: Path | None = None) -> list[Path]:
    directory = Path(directory) if directory is not None else scenario_dir()
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in NAMES:
        path = directory / f"{name}.json"
        save(build(name), path)
        paths.append(path)
    return paths


__all__ = ["NAMES", "build", "load", "load_bundled", "regenerate"]
