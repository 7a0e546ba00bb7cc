"""Brute-force reference evaluators, independent of qatom's embedding and evolution code.

Operators are applied by contracting tensor indices of the state directly,
and probabilities come from enumerating maximal paths one by one.
"""

from __future__ import annotations

import itertools
import string

import numpy as np


def apply_gate_to_vector(psi, qubits, gate, targets):
    """Apply `gate` (on `targets`, big-endian in that order) to a statevector over `qubits`."""
    n, k = len(qubits), len(targets)
    axes = [qubits.index(q) for q in targets]
    t = np.asarray(psi, dtype=complex).reshape([2] * n)
    g = np.asarray(gate, dtype=complex).reshape([2] * (2 * k))
    letters = string.ascii_letters
    state_idx = list(letters[:n])
    out_idx = list(state_idx)
    new = letters[n:n + k]
    for j, ax in enumerate(axes):
        out_idx[ax] = new[j]
    spec = f"{''.join(new)}{''.join(state_idx[ax] for ax in axes)},{''.join(state_idx)}->{''.join(out_idx)}"
    return np.einsum(spec, g, t).reshape(-1)


def apply_kraus_to_density(rho, qubits, kraus, targets):
    """sum_k K rho K^dagger for Kraus matrices acting on `targets`, via column-wise vector application."""
    d = rho.shape[0]
    out = np.zeros_like(rho, dtype=complex)
    for K in kraus:
        left = np.stack([apply_gate_to_vector(rho[:, j], qubits, K, targets) for j in range(d)], axis=1)
        both = np.stack([apply_gate_to_vector(left[i, :].conj(), qubits, K, targets).conj() for i in range(d)], axis=0)
        out += both
    return out


def straight_line(psi, qubits, steps):
    """Run a circuit given as [(matrix, targets), ...] on a statevector."""
    for gate, targets in steps:
        psi = apply_gate_to_vector(psi, qubits, gate, targets)
    return psi


def basis_vector(n, bits):
    v = np.zeros(2 ** n, dtype=complex)
    v[int(bits, 2)] = 1
    return v


def z_projector(m):
    return np.diag([1.0 if i == m else 0.0 for i in range(2)])


def branch_outcomes(psi, qubits, measured):
    """Unnormalised post-measurement vectors for every outcome string over `measured` qubits."""
    out = {}
    for bits in itertools.product((0, 1), repeat=len(measured)):
        v = psi
        for q, m in zip(measured, bits):
            v = apply_gate_to_vector(v, qubits, z_projector(m), [q])
        out[bits] = v
    return out


def path_probabilities(system, tau, rho):
    """Probability of each maximal path: apply its actions in (tau, process, id) order, take the trace.

    Reads only raw structure (children maps, registers, Kraus lists).
    """
    qubits = list(system.qubits)
    per_process = []
    for p in system.processes:
        paths = []

        def walk(node, acc):
            acc = acc + [node]
            kids = p.children[node]
            if not kids:
                paths.append(tuple(acc))
            for k in kids:
                walk(k, acc)

        walk(p.root, [])
        per_process.append(paths)
    result = {}
    for combo in itertools.product(*per_process):
        events = sorted((tau[a], i, a) for i, path in enumerate(combo) for a in path)
        state = np.array(rho, dtype=complex)
        for _, i, aid in events:
            action = system.processes[i].actions[aid]
            state = apply_kraus_to_density(state, qubits, action.operation.kraus, list(action.operation.register))
        result[combo] = float(np.real(np.trace(state)))
    return result


def mu_by_paths(system, tau, rho, anchors, probs=None):
    """Sum of path probabilities over maximal paths that pass through every anchor (None = whole process)."""
    if probs is None:
        probs = path_probabilities(system, tau, rho)
    total = 0.0
    for combo, pr in probs.items():
        if all(a is None or a in path for a, path in zip(anchors, combo)):
            total += pr
    return total
