from __future__ import annotations

import dataclasses
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qatom import bundled, linalg
from qatom.dynamics import POLICIES
from qatom.model import Action, Process, System, TimeInterval, is_atomic, is_local, local_actions, validate_system
from qatom.random_systems import RandomSpec, random_system
from qatom.transform import (
    EquivalenceConfig,
    Isomorphism,
    PreconditionError,
    TransformError,
    atomize,
    check_isomorphism,
    equivalence_check,
    make_instantaneous,
    policy_invariance,
    probe_states,
)


def test_identity_mapping_is_an_isomorphism():
    s = bundled.build("s1").system
    assert check_isomorphism(s, s, Isomorphism.identity(s)).ok


def test_timing_and_environment_are_free():
    s, t = bundled.build("s4").system, bundled.build("s4_async").system
    assert check_isomorphism(s, t, Isomorphism.identity(s)).ok


def test_swapping_different_gates_fails_on_operations():
    s = bundled.build("nonlocal").system
    swap = Isomorphism((1, 0), {"P1": "Q1", "Q1": "P1"})
    r = check_isomorphism(s, s, swap)
    assert not r.ok and "operations" in r.violation


def test_swapping_children_breaks_structure():
    s = bundled.build("s4").system
    pairs = {a: a for a in s.action_ids()}
    pairs["A2"], pairs["D0"] = "D0", "A2"
    r = check_isomorphism(s, s, Isomorphism((0, 1, 2), pairs))
    assert not r.ok and "successors" in r.violation


@pytest.mark.parametrize(
    "pairs, process_map",
    [
        ({"A1": "A1", "B1": "B1"}, (0, 1)),
        ({"A1": "A1", "B1": "A1", "A2": "A2"}, (0, 1)),
        ({"A1": "A1", "B1": "B1", "A2": "A2"}, (0, 0)),
    ],
)
def test_non_bijective_mappings_raise(pairs, process_map):
    s = bundled.build("s1").system
    with pytest.raises(TransformError):
        check_isomorphism(s, s, Isomorphism(process_map, pairs))


def test_mapping_json_roundtrip():
    s = bundled.build("s3").system
    m = Isomorphism.identity(s)
    assert Isomorphism.from_json(m.to_json()) == m
    with pytest.raises(TransformError):
        Isomorphism.from_json({"process_map": [0], "pairs": [["a", "b"], ["a", "c"]]})


def test_instantaneous_s1_async():
    s = bundled.build("s1_async").system
    out = make_instantaneous(s, ["A1", "B1", "A2"])
    for aid in ("A1", "B1", "A2"):
        new, old = out.system.action(aid).interval, s.action(aid).interval
        assert new.length == 0 and old.contains(new.lo)
    assert out.instants["B1"] == 13


def test_no_targets_leaves_system_alone():
    s = bundled.build("s2").system
    out = make_instantaneous(s, [])
    assert [a.interval for a in out.system] == [a.interval for a in s]
    assert out.gamma == Isomorphism.identity(s)


def test_instantaneous_target_keeps_interval_and_drops_environment():
    a = Action("x", TimeInterval(3, 3), linalg.standard_op("MEASURE_Z", ["a"]), frozenset(["lab"]))
    s = System([Process.chain("A", [a])])
    out = make_instantaneous(s, ["x"]).system.action("x")
    assert out.interval == TimeInterval(3, 3) and not out.environment


def test_instantaneous_preconditions():
    s = bundled.build("nonlocal").system
    with pytest.raises(PreconditionError):
        make_instantaneous(s, ["P1"])
    t = bundled.build("s1").system
    with pytest.raises(PreconditionError):
        make_instantaneous(t, ["A1"], {"A1": 20})
    assert make_instantaneous(t, ["A1"], {"A1": "9/2"}).system.action("A1").interval.lo == Fraction(9, 2)


def test_atomize_s3_async():
    s = bundled.build("s3_async").system
    out = atomize(s)
    assert len(out.instants) == 8
    assert all(out.system.action(a).interval.length == 0 for a in out.instants)
    assert is_atomic(local_actions(out.system), out.system)
    times = {}
    for aid, t in out.instants.items():
        times.setdefault(t, set()).add(s.process_index(aid))
    assert all(len(v) == 1 for v in times.values())


def test_atomize_single_process():
    s = System([bundled.build("s1").system.processes[0]])
    out = atomize(s)
    assert set(out.instants) == {"A1", "A2"} and is_atomic(local_actions(out.system), out.system)


def test_atomize_leaves_non_local_pair_alone():
    base = bundled.build("nonlocal").system
    r = Process.chain(
        "R",
        [
            Action("R1", TimeInterval(1, 5), linalg.standard_op("H", ["b"])),
            Action("R2", TimeInterval(6, 9), linalg.standard_op("X", ["b"])),
        ],
    )
    s = System(list(base.processes) + [r], ("a", "b"))
    out = atomize(s)
    assert set(out.instants) == {"R1", "R2"}
    assert out.system.action("P1").interval == TimeInterval(2, 6) == out.system.action("Q1").interval


def test_atomize_rejects_instantaneous_actions():
    s = System([Process.chain("A", [Action("x", TimeInterval(3, 3), linalg.standard_op("H", ["a"]))])])
    with pytest.raises(PreconditionError) as err:
        atomize(s)
    assert any("x" in p for p in err.value.problems)


def test_atomize_grid_choice():
    # two overlapping local actions on different qubits; the second avoids the first's midpoint
    p = Process.chain("P", [Action("p", TimeInterval(0, 4), linalg.standard_op("H", ["a"]))])
    q = Process.chain("Q", [Action("q", TimeInterval(0, 4), linalg.standard_op("H", ["b"]))])
    out = atomize(System([p, q]))
    assert out.instants == {"p": 2, "q": Fraction(4, 3)}


def test_probe_states_cover_the_basis():
    states = probe_states(("a", "b"), 3, 0)
    assert len(states) == 7 and all(abs(r.trace() - 1) < 1e-12 for r in states)


def test_equivalence_with_itself_has_no_deviation():
    s = bundled.build("s2").system
    r = equivalence_check(s, s, Isomorphism.identity(s))
    assert r.ok and r.max_deviation == 0


def test_s4_sync_async_equivalence():
    s, t = bundled.build("s4").system, bundled.build("s4_async").system
    r = equivalence_check(s, t, Isomorphism.identity(s), EquivalenceConfig(tol=1e-9))
    assert r.ok and r.partials > 1, r.failures


def test_equivalence_detects_a_different_gate():
    s = bundled.build("s4").system
    a1 = s.action("A1")
    t = s.replace_actions({"A1": dataclasses.replace(a1, operation=linalg.identity(a1.register))})
    with pytest.raises(TransformError):
        equivalence_check(s, t, Isomorphism.identity(s))


def test_equivalence_requires_trace_preservation():
    a = Action("x", TimeInterval(1, 2), linalg.standard_op("MEASURE_Z", ["a"], [0]))
    s = System([Process.chain("A", [a])])
    with pytest.raises(ValueError):
        equivalence_check(s, s, Isomorphism.identity(s))


# properties

ALIGNED_LOCAL = RandomSpec()
seeds = st.integers(0, 100_000)


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_atomize_keeps_flags_and_intervals(seed):
    s = random_system(seed, ALIGNED_LOCAL)
    out = atomize(s)
    rep = validate_system(out.system)
    assert rep.ok and rep.trace_preserving and rep.aligned
    assert is_atomic(local_actions(out.system), out.system)
    for a in s:
        assert a.interval.contains(out.system.action(a.id).interval.lo)
        assert is_local(a.id, out.system) == is_local(a.id, s)


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_atomized_local_systems_are_equivalent(seed):
    s = random_system(seed, ALIGNED_LOCAL)
    out = atomize(s)
    r = equivalence_check(s, out.system, out.gamma, EquivalenceConfig(states=2, seed=seed))
    assert r.ok, r.failures[:3]


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_local_systems_are_policy_invariant(seed):
    s = random_system(seed, ALIGNED_LOCAL)
    assert policy_invariance(s, probe_states(s.qubits, 2, seed), POLICIES) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=seeds, data=st.data())
def test_make_instantaneous_keeps_locality(seed, data):
    s = random_system(seed, RandomSpec(local_only=False))
    locals_ = local_actions(s)
    targets = data.draw(st.lists(st.sampled_from(locals_), unique=True)) if locals_ else []
    out = make_instantaneous(s, targets)
    for aid in locals_:
        assert is_local(aid, out.system)
    assert np.all([out.system.action(a).environment == frozenset() for a in out.instants])
