"""Scenario files: JSON descriptions of a system, an initial state and schedule overrides.

Layout::

    {
      "name": "s1",
      "qubits": ["a", "b"],
      "processes": [
        {"name": "A", "root": {"id": "A1", "interval": [4, 12], "register": ["a"],
                               "op": {"name": "H"}, "environment": [], "children": [...]}}
      ],
      "initial_state": {"basis": "00"},
      "schedule": {"policy": "completion", "tau": {"A1": "9/2"}}
    }

Times are integers, "a/b" strings or decimal literals and are read exactly.
An op is a standard name (with "outcomes" for MEASURE_Z), a single "matrix",
or a "kraus" list; matrices are nested lists of [re, im] pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import linalg
from .linalg import DensityOperator, LinalgError, QuantumOperation
from .model import Action, ModelError, Process, System, TimeInterval, format_rational, rational

STANDARD = {"I", "X", "Y", "Z", "H", "CNOT", "EPR_PREP"}


class ScenarioError(ValueError):
    """A scenario that cannot be parsed; `where` is a line:column or a JSON path."""

    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass
class Scenario:
    system: System
    initial_state: DensityOperator | None = None
    policy: str | None = None
    tau: Mapping[str, Fraction] = field(default_factory=dict)
    seed: int | None = None
    description: str = ""

    @property
    def name(self) -> str:
        return self.system.name


def _matrix(data, where: str) -> np.ndarray:
    try:
        rows = [[complex(float(e[0]), float(e[1])) for e in row] for row in data]
        m = np.array(rows, dtype=np.complex128)
    except (TypeError, ValueError, IndexError) as exc:
        raise ScenarioError(f"matrix entries must be [re, im] pairs ({exc})", where) from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ScenarioError(f"matrix must be square, got shape {m.shape}", where)
    return m


def _matrix_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=np.complex128)]


def _op(data: Mapping, register: tuple[str, ...], where: str) -> QuantumOperation:
    if not isinstance(data, Mapping):
        raise ScenarioError("op must be an object", where)
    kind = data.get("kind", linalg.GENERAL)
    label = data.get("label")
    try:
        if "name" in data:
            outcomes = data.get("outcomes")
            return linalg.standard_op(data["name"], register, [int(o) for o in outcomes] if outcomes is not None else None)
        if "matrix" in data:
            m = _matrix(data["matrix"], where + ".matrix")
            return linalg.import_operation(register, [m], data.get("kind", linalg.UNITARY), label)
        if "kraus" in data:
            ks = [_matrix(k, f"{where}.kraus[{n}]") for n, k in enumerate(data["kraus"])]
            return linalg.import_operation(register, ks, kind, label)
    except LinalgError as exc:
        raise ScenarioError(str(exc), where) from None
    raise ScenarioError("op needs one of 'name', 'matrix' or 'kraus'", where)


def _op_json(op: QuantumOperation) -> dict:
    name = op.name or ""
    if name in STANDARD:
        if op == linalg.standard_op(name, op.register):
            return {"name": name}
    if name.startswith("MEASURE_Z"):
        outcomes = [int(c) for c in name[len("MEASURE_Z"):]]
        if op == linalg.standard_op("MEASURE_Z", op.register, outcomes):
            return {"name": "MEASURE_Z", "outcomes": outcomes}
    out: dict[str, Any] = {"kind": op.kind}
    if op.name:
        out["label"] = op.name
    if op.kind == linalg.UNITARY:
        out["matrix"] = _matrix_json(op.kraus[0])
    else:
        out["kraus"] = [_matrix_json(k) for k in op.kraus]
    return out


def _time(value, where: str) -> Fraction:
    if isinstance(value, float):
        raise ScenarioError("times must be exact", where)
    try:
        return rational(value)
    except ModelError as exc:
        raise ScenarioError(str(exc), where) from None


def _interval(data, where: str) -> TimeInterval:
    if not isinstance(data, list) or len(data) != 2:
        raise ScenarioError("interval must be [lo, hi]", where)
    try:
        return TimeInterval(_time(data[0], where + "[0]"), _time(data[1], where + "[1]"))
    except ModelError as exc:
        raise ScenarioError(str(exc), where) from None


def _walk(node, where: str, actions: list, edges: list, parent: str | None):
    if not isinstance(node, Mapping):
        raise ScenarioError("action must be an object", where)
    for key in ("id", "interval", "register", "op"):
        if key not in node:
            raise ScenarioError(f"action is missing '{key}'", where)
    aid = str(node["id"])
    register = tuple(str(q) for q in node["register"])
    op = _op(node["op"], register, where + ".op")
    try:
        action = Action(aid, _interval(node["interval"], where + ".interval"), op, frozenset(node.get("environment", ())))
    except ModelError as exc:
        raise ScenarioError(str(exc), where) from None
    actions.append(action)
    if parent is not None:
        edges.append((parent, aid))
    for n, child in enumerate(node.get("children", ())):
        _walk(child, f"{where}.children[{n}]", actions, edges, aid)


def _state(data, qubits: tuple[str, ...], where: str) -> DensityOperator:
    try:
        if "basis" in data:
            return DensityOperator.basis(qubits, str(data["basis"]))
        if "amplitudes" in data:
            amps = np.array([complex(float(a[0]), float(a[1])) for a in data["amplitudes"]])
            if abs(np.linalg.norm(amps) - 1) > 1e-9:
                raise ScenarioError("amplitudes are not normalised", where)
            return DensityOperator.from_pure(qubits, amps)
        if "density" in data:
            rho = DensityOperator(qubits, _matrix(data["density"], where + ".density"))
            if not rho.is_valid():
                raise ScenarioError("density matrix is not a valid state", where)
            return rho
    except LinalgError as exc:
        raise ScenarioError(str(exc), where) from None
    raise ScenarioError("initial_state needs 'basis', 'amplitudes' or 'density'", where)


def from_json(data: Mapping, default_name: str = "") -> Scenario:
    if not isinstance(data, Mapping):
        raise ScenarioError("scenario must be a JSON object", "$")
    if "processes" not in data or not data["processes"]:
        raise ScenarioError("scenario needs a nonempty 'processes' list", "$")
    qubits = tuple(str(q) for q in data.get("qubits", ())) or None
    processes = []
    for n, pd in enumerate(data["processes"]):
        where = f"$.processes[{n}]"
        if "name" not in pd or "root" not in pd:
            raise ScenarioError("process needs 'name' and 'root'", where)
        actions, edges = [], []
        _walk(pd["root"], where + ".root", actions, edges, None)
        try:
            processes.append(Process(str(pd["name"]), actions, edges, actions[0].id))
        except ModelError as exc:
            raise ScenarioError(str(exc), where) from None
    try:
        system = System(processes, qubits, str(data.get("name", default_name)))
    except ModelError as exc:
        raise ScenarioError(str(exc), "$") from None
    state = None
    if "initial_state" in data:
        state = _state(data["initial_state"], system.qubits, "$.initial_state")
    policy, tau = None, {}
    if "schedule" in data:
        sd = data["schedule"]
        policy = sd.get("policy")
        tau = {str(k): _time(v, f"$.schedule.tau.{k}") for k, v in sd.get("tau", {}).items()}
    seed = data.get("seed")
    return Scenario(system, state, policy, tau, int(seed) if seed is not None else None, str(data.get("description", "")))


def loads(text: str, default_name: str = "") -> Scenario:
    try:
        data = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    return from_json(data, default_name)


def load(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, path.stem)


def _node_json(p: Process, aid: str) -> dict:
    a = p[aid]
    node = {
        "id": a.id,
        "interval": [format_rational(a.interval.lo), format_rational(a.interval.hi)],
        "register": list(a.register),
        "op": _op_json(a.operation),
    }
    if a.environment:
        node["environment"] = sorted(a.environment)
    kids = p.children[aid]
    if kids:
        node["children"] = [_node_json(p, k) for k in kids]
    return node


def _state_json(rho: DensityOperator) -> dict:
    m = rho.matrix
    if np.count_nonzero(m) == 1 and m[np.diag_indices_from(m)].real.max() == 1.0:
        index = int(np.argmax(np.real(np.diag(m))))
        return {"basis": format(index, f"0{len(rho.register)}b")}
    return {"density": _matrix_json(m)}


def to_json(sc: Scenario) -> dict:
    s = sc.system
    out: dict[str, Any] = {"name": s.name}
    if sc.description:
        out["description"] = sc.description
    if sc.seed is not None:
        out["seed"] = sc.seed
    out["qubits"] = list(s.qubits)
    out["processes"] = [{"name": p.name, "root": _node_json(p, p.root)} for p in s.processes]
    if sc.initial_state is not None:
        out["initial_state"] = _state_json(sc.initial_state)
    if sc.policy or sc.tau:
        sched: dict[str, Any] = {}
        if sc.policy:
            sched["policy"] = sc.policy
        if sc.tau:
            sched["tau"] = {k: format_rational(v) for k, v in sc.tau.items()}
        out["schedule"] = sched
    return out


def dumps(sc: Scenario) -> str:
    return json.dumps(to_json(sc), indent=1) + "\n"


def save(sc: Scenario, path) -> None:
    Path(path).write_text(dumps(sc))
