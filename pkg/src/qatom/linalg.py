"""Small dense complex linear algebra for multi-qubit registers.

States are density operators, operations are Kraus lists. Every object carries
the ordered register it lives on; matrix indices are big-endian over that
order, so the first listed qubit is the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

VALIDITY_TOL = 1e-9
EQUALITY_TOL = 1e-10
MAX_QUBITS = 12

UNITARY = "unitary"
PARTIAL_MEASUREMENT = "partial-measurement"
GENERAL = "general"
KINDS = (UNITARY, PARTIAL_MEASUREMENT, GENERAL)


class LinalgError(ValueError):
    """Register or dimension mismatch, or a malformed operator."""


def _frozen(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


def _check_register(register: Sequence[str]) -> tuple[str, ...]:
    register = tuple(register)
    if len(set(register)) != len(register):
        raise LinalgError(f"register has repeated qubits: {register}")
    if len(register) > MAX_QUBITS:
        raise LinalgError(f"register of {len(register)} qubits exceeds the {MAX_QUBITS}-qubit limit")
    return register


def max_abs(matrix: np.ndarray) -> float:
    """Max-entry norm; 0 for empty input."""
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


@dataclass(frozen=True, eq=False)
class DensityOperator:
    register: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        register = _check_register(self.register)
        matrix = _frozen(self.matrix)
        dim = 2 ** len(register)
        if matrix.shape != (dim, dim):
            raise LinalgError(f"density matrix shape {matrix.shape} does not match {len(register)} qubits")
        object.__setattr__(self, "register", register)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return trace(self)

    def is_valid(self, tol: float = VALIDITY_TOL) -> bool:
        """Hermitian, positive semi-definite and trace in [0, 1], all within `tol`."""
        rho = self.matrix
        if max_abs(rho - rho.conj().T) > tol:
            return False
        if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -tol:
            return False
        tr = self.trace()
        return -tol <= tr <= 1 + tol

    def reorder(self, register: Sequence[str]) -> DensityOperator:
        """The same state with its tensor factors listed in `register` order."""
        register = tuple(register)
        if sorted(register) != sorted(self.register):
            raise LinalgError(f"cannot reorder {self.register} as {register}")
        return DensityOperator(register, permute_operator(self.matrix, self.register, register))

    def close_to(self, other: DensityOperator, tol: float = EQUALITY_TOL) -> bool:
        other = other.reorder(self.register)
        return max_abs(self.matrix - other.matrix) <= tol

    @classmethod
    def from_pure(cls, register: Sequence[str], amplitudes) -> DensityOperator:
        psi = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        return cls(tuple(register), np.outer(psi, psi.conj()))

    @classmethod
    def basis(cls, register: Sequence[str], bits: str | int) -> DensityOperator:
        """Computational basis state; `bits` is a bitstring over `register` or its integer index."""
        register = tuple(register)
        dim = 2 ** len(register)
        index = int(bits, 2) if isinstance(bits, str) else int(bits)
        if isinstance(bits, str) and len(bits) != len(register):
            raise LinalgError(f"bitstring {bits!r} does not match {len(register)} qubits")
        if not 0 <= index < dim:
            raise LinalgError(f"basis index {index} out of range")
        psi = np.zeros(dim, dtype=np.complex128)
        psi[index] = 1.0
        return cls.from_pure(register, psi)

    @classmethod
    def zero(cls, register: Sequence[str]) -> DensityOperator:
        dim = 2 ** len(tuple(register))
        return cls(tuple(register), np.zeros((dim, dim)))


@dataclass(frozen=True, eq=False)
class QuantumOperation:
    """Completely positive, trace non-increasing map in Kraus form.

    Equality is exact (registers, kind and Kraus entries bit for bit); use
    :func:`operations_close` for tolerance comparisons.
    """

    register: tuple[str, ...]
    kraus: tuple[np.ndarray, ...]
    kind: str = GENERAL
    name: str | None = None
    _embed_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        register = _check_register(self.register)
        if not self.kraus:
            raise LinalgError("a quantum operation needs at least one Kraus matrix")
        dim = 2 ** len(register)
        kraus = tuple(_frozen(k) for k in self.kraus)
        for k in kraus:
            if k.shape != (dim, dim):
                raise LinalgError(f"Kraus matrix of shape {k.shape} on {len(register)} qubits")
        if self.kind not in KINDS:
            raise LinalgError(f"unknown operation kind {self.kind!r}")
        if self.kind == UNITARY:
            if len(kraus) != 1:
                raise LinalgError("a unitary operation has exactly one Kraus matrix")
            u = kraus[0]
            if max_abs(u.conj().T @ u - np.eye(dim)) > VALIDITY_TOL:
                raise LinalgError("matrix declared unitary is not unitary")
        object.__setattr__(self, "register", register)
        object.__setattr__(self, "kraus", kraus)

    @property
    def dim(self) -> int:
        return 2 ** len(self.register)

    def __eq__(self, other):
        if not isinstance(other, QuantumOperation):
            return NotImplemented
        return (
            self.register == other.register
            and self.kind == other.kind
            and len(self.kraus) == len(other.kraus)
            and all(np.array_equal(a, b) for a, b in zip(self.kraus, other.kraus))
        )

    def __hash__(self):
        return hash((self.register, self.kind, tuple(k.tobytes() for k in self.kraus)))

    def embedded(self, register: Sequence[str]) -> np.ndarray:
        """Kraus matrices extended by identity onto `register`, stacked as (k, d, d)."""
        register = tuple(register)
        cached = self._embed_cache.get(register)
        if cached is None:
            cached = np.stack([embed(k, self.register, register) for k in self.kraus])
            cached.flags.writeable = False
            self._embed_cache[register] = cached
        return cached

    def kraus_sum(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.kraus)

    def __repr__(self):
        label = self.name or self.kind
        return f"QuantumOperation({label}, register={list(self.register)}, kraus={len(self.kraus)})"


def operations_close(a: QuantumOperation, b: QuantumOperation, tol: float = 1e-12) -> bool:
    """Same register order and Kraus lists equal entrywise within `tol`, in the same order."""
    if a.register != b.register or len(a.kraus) != len(b.kraus):
        return False
    return all(max_abs(x - y) <= tol for x, y in zip(a.kraus, b.kraus))


def permute_operator(matrix: np.ndarray, register: Sequence[str], target: Sequence[str]) -> np.ndarray:
    """Relabel the tensor factors of an operator on `register` into `target` order."""
    register, target = tuple(register), tuple(target)
    if register == target:
        return np.asarray(matrix)
    n = len(register)
    perm = [register.index(q) for q in target]
    tensor = np.asarray(matrix).reshape([2] * (2 * n))
    return tensor.transpose(perm + [n + p for p in perm]).reshape(2**n, 2**n)


def embed(matrix: np.ndarray, register: Sequence[str], target: Sequence[str]) -> np.ndarray:
    """Extend an operator on `register` by identity to the larger register `target`."""
    register, target = tuple(register), tuple(target)
    missing = set(register) - set(target)
    if missing:
        raise LinalgError(f"qubits {sorted(missing)} are not in register {list(target)}")
    matrix = np.asarray(matrix)
    if matrix.shape != (2 ** len(register),) * 2:
        raise LinalgError(f"operator of shape {matrix.shape} does not act on {len(register)} qubits")
    rest = tuple(q for q in target if q not in register)
    full = np.kron(matrix, np.eye(2 ** len(rest)))
    return permute_operator(full, register + rest, target)


def trace(rho: DensityOperator) -> float:
    return float(np.real(np.trace(rho.matrix)))


def apply(op: QuantumOperation, rho: DensityOperator) -> DensityOperator:
    """rho -> sum_k E_k rho E_k^dagger with each E_k extended by identity onto rho's register."""
    kraus = op.embedded(rho.register)
    out = np.einsum("kij,jl,kml->im", kraus, rho.matrix, kraus.conj(), optimize=True)
    return DensityOperator(rho.register, out)


def apply_stack(kraus: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Apply pre-embedded Kraus matrices (k, d, d) to a stack of density matrices (n, d, d)."""
    out = np.zeros_like(states)
    for k in kraus:
        out += k @ states @ k.conj().T
    return out


def tensor(a: QuantumOperation, b: QuantumOperation) -> QuantumOperation:
    """Parallel composition on disjoint registers; register order is a's then b's."""
    overlap = set(a.register) & set(b.register)
    if overlap:
        raise LinalgError(f"tensor of operations sharing qubits {sorted(overlap)}")
    kraus = [np.kron(x, y) for x in a.kraus for y in b.kraus]
    if a.kind == UNITARY and b.kind == UNITARY:
        kind = UNITARY
    elif a.kind == GENERAL or b.kind == GENERAL:
        kind = GENERAL
    else:
        kind = PARTIAL_MEASUREMENT
    return QuantumOperation(a.register + b.register, tuple(kraus), kind)


def compose(second: QuantumOperation, first: QuantumOperation) -> QuantumOperation:
    """Apply `first`, then `second`; Kraus matrices are second_j @ first_k on the sorted union register."""
    register = tuple(sorted(set(first.register) | set(second.register)))
    outer = second.embedded(register)
    inner = first.embedded(register)
    kraus = [s @ f for s in outer for f in inner]
    kind = UNITARY if first.kind == UNITARY and second.kind == UNITARY else GENERAL
    return QuantumOperation(register, tuple(kraus), kind)


def identity(register: Sequence[str]) -> QuantumOperation:
    register = tuple(register)
    return QuantumOperation(register, (np.eye(2 ** len(register)),), UNITARY, name="I")


def unitary(register: Sequence[str], matrix, name: str | None = None) -> QuantumOperation:
    return QuantumOperation(tuple(register), (np.asarray(matrix),), UNITARY, name=name)


_S2 = 1 / np.sqrt(2)
GATES = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]]),
    "H": np.array([[_S2, _S2], [_S2, -_S2]]),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
}
# C|xy> = (|0,y> + (-1)^x |1,1-y>)/sqrt(2); the matrix product CNOT @ (H (x) I).
GATES["EPR_PREP"] = GATES["CNOT"] @ np.kron(GATES["H"], np.eye(2))


def standard_op(name: str, register: Sequence[str], outcomes: Iterable[int] | None = None) -> QuantumOperation:
    """Named operation on `register`.

    Gates: I, X, Y, Z, H (one qubit); CNOT, EPR_PREP (two qubits, first listed
    qubit is the control). ``MEASURE_Z`` keeps the outcomes in `outcomes`
    (default both) as projectors ``|m><m|``.
    """
    register = tuple(register)
    if name == "MEASURE_Z":
        if len(register) != 1:
            raise LinalgError(f"MEASURE_Z acts on one qubit, got {len(register)}")
        chosen = sorted(set(outcomes if outcomes is not None else (0, 1)))
        if not chosen or any(m not in (0, 1) for m in chosen):
            raise LinalgError(f"MEASURE_Z outcomes must be a nonempty subset of {{0, 1}}, got {chosen}")
        kraus = tuple(np.diag([1.0 if i == m else 0.0 for i in range(2)]) for m in chosen)
        label = "MEASURE_Z" + "".join(str(m) for m in chosen)
        return QuantumOperation(register, kraus, PARTIAL_MEASUREMENT, name=label)
    if name not in GATES:
        raise LinalgError(f"unknown standard operation {name!r}")
    matrix = GATES[name]
    arity = int(np.log2(matrix.shape[0]))
    if len(register) != arity:
        raise LinalgError(f"{name} acts on {arity} qubit(s), got register {list(register)}")
    return unitary(register, matrix, name=name)


def choi_matrix(op: QuantumOperation) -> np.ndarray:
    """Unnormalised Choi matrix sum_k |E_k>><<E_k| (row-major vectorisation)."""
    vecs = np.stack([k.reshape(-1) for k in op.kraus])
    return vecs.T @ vecs.conj()


@dataclass(frozen=True)
class ValidityReport:
    cp_ok: bool
    trace_nonincreasing_ok: bool
    trace_preserving: bool
    unitary: bool

    @property
    def ok(self) -> bool:
        return self.cp_ok and self.trace_nonincreasing_ok


def check_validity(op: QuantumOperation, tol: float = VALIDITY_TOL) -> ValidityReport:
    choi = choi_matrix(op)
    cp_ok = bool(np.linalg.eigvalsh((choi + choi.conj().T) / 2).min() >= -tol)
    total = op.kraus_sum()
    eigs = np.linalg.eigvalsh((total + total.conj().T) / 2)
    nonincreasing = bool(eigs.min() >= -tol and eigs.max() <= 1 + tol)
    preserving = max_abs(total - np.eye(op.dim)) <= tol
    is_unitary = len(op.kraus) == 1 and preserving
    return ValidityReport(cp_ok, nonincreasing, preserving, is_unitary)


def kraus_concat(ops: Sequence[QuantumOperation]) -> QuantumOperation:
    """The sum map of operations on one register set, as a single concatenated Kraus list."""
    if not ops:
        raise LinalgError("empty operation sum")
    register = ops[0].register
    kraus = []
    for op in ops:
        if set(op.register) != set(register):
            raise LinalgError(f"cannot sum operations on {op.register} and {register}")
        kraus.extend(permute_operator(k, op.register, register) for k in op.kraus)
    return QuantumOperation(register, tuple(kraus), GENERAL)


def import_operation(register: Sequence[str], kraus, kind: str = GENERAL, name: str | None = None) -> QuantumOperation:
    """Build an operation from user data and reject it unless it is CP and trace non-increasing."""
    op = QuantumOperation(tuple(register), tuple(np.asarray(k, dtype=np.complex128) for k in kraus), kind, name)
    report = check_validity(op)
    if not report.cp_ok:
        raise LinalgError(f"imported operation {name or ''} is not completely positive")
    if not report.trace_nonincreasing_ok:
        raise LinalgError(f"imported operation {name or ''} increases trace")
    return op


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_pure_state(register: Sequence[str], rng: np.random.Generator) -> DensityOperator:
    dim = 2 ** len(tuple(register))
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return DensityOperator.from_pure(register, psi / np.linalg.norm(psi))


def random_density(register: Sequence[str], rng: np.random.Generator, trace_value: float = 1.0) -> DensityOperator:
    dim = 2 ** len(tuple(register))
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return DensityOperator(tuple(register), trace_value * rho / np.trace(rho).real)


def random_measurement(register: Sequence[str], rng: np.random.Generator, outcomes: int = 2) -> list[np.ndarray]:
    """Kraus matrices of a random complete measurement, cut from a Haar isometry."""
    dim = 2 ** len(tuple(register))
    u = haar_unitary(dim * outcomes, rng)
    iso = u[:, :dim]
    return [iso[m * dim:(m + 1) * dim, :] for m in range(outcomes)]


def spanning_states(register: Sequence[str]) -> list[DensityOperator]:
    """d^2 pure states whose projectors span all d x d matrices."""
    register = tuple(register)
    dim = 2 ** len(register)
    states = []
    for i in range(dim):
        states.append(DensityOperator.basis(register, i))
    for i in range(dim):
        for j in range(i + 1, dim):
            for phase in (1.0, 1j):
                psi = np.zeros(dim, dtype=np.complex128)
                psi[i] = _S2
                psi[j] = phase * _S2
                states.append(DensityOperator.from_pure(register, psi))
    return states
