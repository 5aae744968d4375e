import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ftbqc.brickwork import (
    BrickworkError,
    CompiledBrickwork,
    brickwork_graph,
    brickwork_unitary,
    cell_unitary,
    compile_circuit,
    expand_swaps,
    flow_dependencies,
    pack_cells,
    parse_angle,
    parse_circuit,
    vertical_columns,
)
from ftbqc.statevector import build_cluster, measure_mdelta

H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def hn(n):
    out = np.ones((1, 1))
    for _ in range(n):
        out = np.kron(out, H)
    return out


def same_up_to_phase(a, b, tol=1e-8):
    k = np.argmax(np.abs(b))
    return np.allclose(a, a.flat[k] / b.flat[k] * b, atol=tol) and abs(abs(a.flat[k] / b.flat[k]) - 1) < 1e-6


def test_graph_shape_and_rungs():
    g = brickwork_graph(2, 9)
    assert g.n_nodes == 18
    assert vertical_columns(1, 9) == [3, 5]
    assert vertical_columns(2, 17) == [7, 9, 15, 17]
    assert len(g.edges) == 2 * 8 + 2
    assert brickwork_graph(4, 17).is_connected()


def test_strict_dimensions():
    with pytest.raises(BrickworkError):
        brickwork_graph(3, 9)
    with pytest.raises(BrickworkError):
        brickwork_graph(2, 10)
    assert brickwork_graph(1, 4, strict=False).n_nodes == 4


@pytest.mark.parametrize("n,m", [(2, 9), (4, 17), (3, 12)])
def test_flow_dependencies_follow_the_graph(n, m):
    g = brickwork_graph(n, m, strict=False)
    xd, zd = flow_dependencies(n, m)
    f = {(x, y): (x + 1, y) for (x, y) in g.nodes if x < m}
    for v in g.nodes:
        assert xd[v] == frozenset(u for u, fu in f.items() if fu == v)
        expect = frozenset(u for u, fu in f.items() if u != v and v in g.neighbors(fu))
        assert zd[v] == expect


def test_unitary_matches_graph_state_simulation(rng):
    """All-zero outcome branch of the real graph state equals the byproduct-free map."""
    n, m = 2, 9
    angles = {(x, y): float(rng.uniform(0, 2 * math.pi)) for x in range(1, m + 1) for y in (1, 2)}
    compiled = CompiledBrickwork(n, m, angles)
    state = build_cluster(brickwork_graph(n, m))
    for x in range(1, m):
        for y in (1, 2):
            _, state = measure_mdelta(state, (x, y), angles[(x, y)], force=0)
    got = state.reorder([(m, 1), (m, 2)]).vector
    want = brickwork_unitary(compiled) @ (np.ones(4) / 2)
    assert abs(np.vdot(got, want / np.linalg.norm(want))) ** 2 > 1 - 1e-10


CIRCUITS = {
    "bell": "H 0\nCNOT 1 0",
    "cnot_up": "qubits 2\nX 1\nCNOT 0 1",
    "cz": "H 0\nH 1\nCZ 1 0\nH 0",
    "rot": "qubits 2\nRZ 0 pi/4\nH 0\nRZ 1 0.3\nH 1",
    "three": "H 0\nCNOT 1 0\nCNOT 2 1\nRZ 2 3pi/4\nH 2",
    "deep": "H 0\nCNOT 1 0\nH 1\nCNOT 0 1\nRZ 0 0.2\nH 0\nCNOT 1 0",
}


@pytest.mark.parametrize("name", CIRCUITS)
def test_compiled_brickwork_reproduces_circuit(name):
    c = parse_circuit(CIRCUITS[name])
    comp = compile_circuit(c, verify=False)
    assert comp.m % 8 == 1
    target = hn(c.n_qubits) @ c.unitary() @ hn(c.n_qubits)
    assert same_up_to_phase(brickwork_unitary(comp), target)


def test_bell_size():
    comp = compile_circuit(parse_circuit(CIRCUITS["bell"]))
    assert (comp.n, comp.m) == (2, 25)


def test_angles_on_grid_for_clifford_t():
    comp = compile_circuit(parse_circuit("H 0\nCNOT 1 0\nRZ 1 pi/4"))
    for a in comp.angles.values():
        k = a / (math.pi / 4)
        assert abs(k - round(k)) < 1e-9


def test_non_adjacent_needs_swaps():
    c = parse_circuit("qubits 3\nH 0\nCNOT 2 0")
    with pytest.raises(BrickworkError):
        compile_circuit(c)
    comp = compile_circuit(c, allow_swaps=True, verify=False)
    target = hn(3) @ c.unitary() @ hn(3)
    assert same_up_to_phase(brickwork_unitary(comp), target)
    assert np.allclose(expand_swaps(c).unitary(), c.unitary())


def random_su2(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    a, b, c, d = q
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


@settings(max_examples=50)
@given(st.integers(0, 2**31))
def test_pack_cells_random_unitaries(seed):
    u = random_su2(np.random.default_rng(seed))
    cells = pack_cells(u, 2)
    w = np.eye(2)
    for a, b in cells:
        w = cell_unitary(a, b) @ w
    assert same_up_to_phase(w, u)


def test_pack_cells_single_cell_cases():
    assert pack_cells(np.eye(2), 1) == []
    assert pack_cells(H, 1) is None
    assert len(pack_cells(H, 2)) == 2
    assert len(pack_cells(cell_unitary(0.3, 0.8), 1)) == 1
    assert pack_cells(np.diag([1, np.exp(0.3j)]) @ H @ np.diag([1, np.exp(0.7j)]) @ H @ np.diag([1, np.exp(0.2j)]), 1) is None


def test_parse_angles():
    assert parse_angle("pi/4") == pytest.approx(math.pi / 4)
    assert parse_angle("-3*pi/2") == pytest.approx(-1.5 * math.pi)
    assert parse_angle("3pi/4") == pytest.approx(0.75 * math.pi)
    assert parse_angle("0.5") == 0.5
    with pytest.raises(ValueError):
        parse_angle("pie")


def test_parse_circuit_format():
    c = parse_circuit("# toy\nqubits 3\nH 0  # first\nCNOT 1 0\nRZ 2 pi/2\n")
    assert c.n_qubits == 3
    assert [g.name for g in c.gates] == ["H", "CNOT", "RZ"]
    assert (c.gates[1].target, c.gates[1].control) == (1, 0)
    assert c.output_distribution() == pytest.approx({(0, 0, 0): 0.5, (1, 1, 0): 0.5})
    for bad in ["FOO 0", "CNOT 0 0", "H", "RZ 0", "CNOT 1"]:
        with pytest.raises(ValueError):
            parse_circuit(bad)
