import math

import numpy as np
import pytest

from ftbqc.pauli import PauliOperator
from ftbqc.statevector import (
    MAX_QUBITS,
    GraphSpec,
    RegisterError,
    StateVector,
    apply_cz,
    apply_gate,
    apply_pauli,
    build_cluster,
    computational_probabilities,
    fidelity,
    gate_matrix,
    mdelta_probabilities,
    measure_computational,
    measure_mdelta,
    plus_state,
    plus_theta,
)

H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(v, normalize=True)


def embed(u, target, n):
    ops = [np.eye(2)] * n
    ops[target] = u
    out = np.ones((1, 1))
    for o in ops:
        out = np.kron(out, o)
    return out


def test_basis_and_labels():
    s = StateVector.basis("101", ["a", "b", "c"])
    assert s.vector[0b101] == 1
    assert s.position("c") == 2
    assert "b" in s and "z" not in s
    with pytest.raises(RegisterError):
        s.position("z")


def test_normalisation_check():
    with pytest.raises(ValueError):
        StateVector([1, 1])
    assert math.isclose(StateVector([1, 1], normalize=True).norm(), 1)


def test_qubit_cap():
    with pytest.raises(RegisterError):
        StateVector.zeros(MAX_QUBITS + 1)


def test_single_qubit_gate_matches_kron(rng):
    s = random_state(rng, 3)
    out = apply_gate(s, "H", [1])
    assert np.allclose(out.vector, embed(H, 1, 3) @ s.vector)


def test_cnot_control_first(rng):
    s = random_state(rng, 2)
    assert np.allclose(apply_gate(s, "CNOT", [0, 1]).vector, CNOT @ s.vector)


def test_rotations():
    a = 0.37
    assert np.allclose(gate_matrix("RZ", a), np.diag([1, np.exp(1j * a)]))
    assert np.allclose(gate_matrix("RX", a), H @ np.diag([1, np.exp(1j * a)]) @ H)


def test_cz_symmetric(rng):
    s = random_state(rng, 3)
    assert apply_cz(s, 0, 2).allclose(apply_cz(s, 2, 0))
    diag = np.array([(-1) ** ((i >> 2) & i & 1) for i in range(8)])
    assert np.allclose(apply_cz(s, 0, 2).vector, diag * s.vector)


def test_apply_pauli_matches_matrix(rng):
    s = random_state(rng, 3)
    p = PauliOperator.from_string("XYZ")
    assert np.allclose(apply_pauli(s, p).vector, p.to_matrix() @ s.vector)


def test_kron_and_reorder(rng):
    a, b = random_state(rng, 1).relabel(["a"]), random_state(rng, 2).relabel(["b", "c"])
    ab = a.kron(b)
    assert np.allclose(ab.vector, np.kron(a.vector, b.vector))
    back = ab.reorder(["c", "a", "b"]).reorder(["a", "b", "c"])
    assert back.allclose(ab)


def test_text_round_trip(rng):
    s = random_state(rng, 2)
    assert StateVector.from_text(s.to_text()).allclose(s)


def test_mdelta_law():
    for theta in np.arange(8) * math.pi / 4:
        for delta in np.arange(8) * math.pi / 4:
            p0, p1 = mdelta_probabilities(plus_theta(theta), 0, delta)
            assert math.isclose(p0, math.cos((theta - delta) / 2) ** 2, abs_tol=1e-12)
            assert math.isclose(p0 + p1, 1)


def test_measure_removes_qubit_and_collapses(rng):
    s = plus_state("a").kron(plus_state("b"))
    s = apply_cz(s, "a", "b")
    out, rest = measure_mdelta(s, "a", 0.0, force=0)
    assert rest.labels == ("b",)
    # X-measuring one end of a CZ pair leaves H|s> on the other
    assert fidelity(rest, StateVector([1, 0], ["b"])) > 1 - 1e-12
    s1, rest1 = measure_computational(StateVector.basis("10"), 0, rng)
    assert s1 == 1 and rest1.allclose(StateVector.basis("0"))


def test_forced_impossible_outcome():
    with pytest.raises(ValueError):
        measure_computational(StateVector.basis("0"), 0, force=1)


def test_cluster_stabilisers():
    g = GraphSpec((0, 1, 2), ((0, 1), (1, 2)))
    c = build_cluster(g)
    for v in g.nodes:
        k = "".join("X" if u == v else "Z" if u in g.neighbors(v) else "I" for u in g.nodes)
        stab = PauliOperator.from_string(k).to_matrix()
        assert np.allclose(stab @ c.vector, c.vector)


def test_graph_validation():
    with pytest.raises(ValueError):
        GraphSpec((0, 1), ((0, 0),))
    with pytest.raises(ValueError):
        GraphSpec((0, 1), ((0, 1), (1, 0)))
    with pytest.raises(ValueError):
        GraphSpec((0,), ((0, 5),))
    assert not GraphSpec((0, 1), ()).is_connected()


def test_computational_probabilities():
    s = StateVector([math.sqrt(0.3), math.sqrt(0.7)])
    assert np.allclose(computational_probabilities(s, 0), (0.3, 0.7))
