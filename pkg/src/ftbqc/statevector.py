"""Dense pure-state simulation over labelled qubits.

States keep a tuple of qubit labels next to the amplitude tensor, so gates and
measurements address qubits by label.  Measured qubits are removed from the
register, which is how cluster-state patterns consume qubits.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Hashable, Mapping, Sequence

import numpy as np

from ftbqc.pauli import PauliOperator

if TYPE_CHECKING:
    from ftbqc.stabilizer import StabilizerCode

MAX_QUBITS = 20
NORM_TOL = 1e-10
SQRT1_2 = 1 / math.sqrt(2)


class RegisterError(ValueError):
    """Bad qubit reference: unknown or duplicate label, or the register is too large."""


class CodeSpaceError(ValueError):
    """A block handed to a logical measurement is not in the code space."""


class StateVector:
    """A normalised pure state on labelled qubits (at most ``MAX_QUBITS``)."""

    __slots__ = ("_psi", "_labels", "_index")

    def __init__(
        self,
        amplitudes: np.ndarray | Sequence[complex],
        labels: Sequence[Hashable] | None = None,
        *,
        normalize: bool = False,
    ) -> None:
        psi = np.asarray(amplitudes, dtype=complex)
        size = psi.size
        n = size.bit_length() - 1
        if size != 1 << n:
            raise ValueError(f"amplitude count {size} is not a power of two")
        if n > MAX_QUBITS:
            raise RegisterError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")
        labels = tuple(range(n)) if labels is None else tuple(labels)
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels given for {n} qubits")
        if len(set(labels)) != n:
            raise RegisterError("duplicate qubit labels")
        psi = psi.reshape((2,) * n)
        norm = np.linalg.norm(psi)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalise the zero vector")
            psi = psi / norm
        elif abs(norm - 1) > NORM_TOL:
            raise ValueError(f"state is not normalised (norm={norm})")
        self._psi = psi
        self._labels = labels
        self._index = {lab: k for k, lab in enumerate(labels)}

    @classmethod
    def _trusted(cls, psi: np.ndarray, labels: tuple) -> StateVector:
        obj = cls.__new__(cls)
        obj._psi = psi
        obj._labels = labels
        obj._index = {lab: k for k, lab in enumerate(labels)}
        return obj

    @classmethod
    def basis(cls, bits: str | Sequence[int], labels: Sequence[Hashable] | None = None) -> StateVector:
        """Computational basis state; ``bits[0]`` is the first qubit."""
        bits = [int(b) for b in bits]
        psi = np.zeros((2,) * len(bits), dtype=complex)
        psi[tuple(bits)] = 1.0
        return cls(psi, labels)

    @classmethod
    def zeros(cls, n: int, labels: Sequence[Hashable] | None = None) -> StateVector:
        return cls.basis([0] * n, labels)

    @classmethod
    def empty(cls) -> StateVector:
        return cls(np.ones(1, dtype=complex), ())

    # accessors --------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self._labels)

    @property
    def labels(self) -> tuple:
        return self._labels

    @property
    def tensor(self) -> np.ndarray:
        view = self._psi.view()
        view.flags.writeable = False
        return view

    @property
    def vector(self) -> np.ndarray:
        """Flat amplitudes, big-endian in label order."""
        return self._psi.reshape(-1).copy()

    def position(self, label: Hashable) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise RegisterError(f"qubit {label!r} is not in the register") from None

    def __contains__(self, label: Hashable) -> bool:
        return label in self._index

    def norm(self) -> float:
        return float(np.linalg.norm(self._psi))

    def relabel(self, labels: Sequence[Hashable]) -> StateVector:
        return StateVector(self._psi, labels)

    def kron(self, other: StateVector) -> StateVector:
        """Tensor product ``self (x) other``; labels must be disjoint."""
        labels = self._labels + other._labels
        if len(set(labels)) != len(labels):
            raise RegisterError("tensor product would duplicate labels")
        if len(labels) > MAX_QUBITS:
            raise RegisterError(f"{len(labels)} qubits exceeds the {MAX_QUBITS}-qubit cap")
        psi = np.multiply.outer(self._psi, other._psi)
        return StateVector._trusted(psi, labels)

    def reorder(self, labels: Sequence[Hashable]) -> StateVector:
        """Same state with the qubit axes permuted into ``labels`` order."""
        labels = tuple(labels)
        if sorted(map(repr, labels)) != sorted(map(repr, self._labels)):
            raise RegisterError("reorder needs a permutation of the current labels")
        perm = [self.position(lab) for lab in labels]
        return StateVector._trusted(np.transpose(self._psi, perm).copy(), labels)

    def allclose(self, other: StateVector, atol: float = 1e-10) -> bool:
        return self._psi.shape == other._psi.shape and np.allclose(self._psi, other._psi, atol=atol)

    # text dump --------------------------------------------------------

    def to_text(self) -> str:
        """One amplitude per line as ``index real imag``."""
        flat = self._psi.reshape(-1)
        return "".join(f"{i} {a.real:.17g} {a.imag:.17g}\n" for i, a in enumerate(flat))

    @classmethod
    def from_text(cls, text: str, labels: Sequence[Hashable] | None = None) -> StateVector:
        rows = [line.split() for line in text.splitlines() if line.strip()]
        amps = np.zeros(len(rows), dtype=complex)
        for row in rows:
            idx, re, im = int(row[0]), float(row[1]), float(row[2])
            amps[idx] = complex(re, im)
        return cls(amps, labels)

    def __repr__(self) -> str:
        return f"StateVector(n={self.n}, labels={self._labels!r})"


# single-qubit states ------------------------------------------------------


def plus_theta(theta: float, label: Hashable = 0) -> StateVector:
    """``(|0> + e^{i theta}|1>)/sqrt(2)``."""
    return StateVector._trusted(
        np.array([SQRT1_2, SQRT1_2 * cmath.exp(1j * theta)], dtype=complex), (label,)
    )


def plus_state(label: Hashable = 0) -> StateVector:
    return plus_theta(0.0, label)


# gates --------------------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2
_FIXED_GATES = {
    "I": np.eye(2, dtype=complex),
    "H": _H,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "S": np.diag([1, 1j]).astype(complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}
GATE_ARITY = {"I": 1, "H": 1, "X": 1, "Y": 1, "Z": 1, "S": 1, "RZ": 1, "RX": 1,
              "CZ": 2, "CNOT": 2, "CX": 2, "SWAP": 2}


def rz(phi: float) -> np.ndarray:
    """``diag(1, e^{i phi})`` (the phase-gate convention used throughout)."""
    return np.diag([1.0, cmath.exp(1j * phi)]).astype(complex)


def rx(phi: float) -> np.ndarray:
    """``H rz(phi) H``."""
    return _H @ rz(phi) @ _H


def gate_matrix(gate: str, angle: float | None = None) -> np.ndarray:
    name = gate.upper()
    if name == "RZ":
        if angle is None:
            raise ValueError("Rz needs an angle")
        return rz(angle)
    if name == "RX":
        if angle is None:
            raise ValueError("Rx needs an angle")
        return rx(angle)
    if name == "CX":
        name = "CNOT"
    try:
        return _FIXED_GATES[name]
    except KeyError:
        raise ValueError(f"unknown gate {gate!r}") from None


def _positions(state: StateVector, targets: Sequence[Hashable]) -> list[int]:
    pos = [state.position(t) for t in targets]
    if len(set(pos)) != len(pos):
        raise RegisterError(f"duplicate targets {tuple(targets)!r}")
    return pos


def apply_unitary(state: StateVector, unitary: np.ndarray, targets: Sequence[Hashable]) -> StateVector:
    """Apply a ``2**k x 2**k`` matrix to the listed qubits (first target = most significant)."""
    targets = list(targets)
    k = len(targets)
    pos = _positions(state, targets)
    u = np.asarray(unitary, dtype=complex).reshape((2,) * (2 * k))
    out = np.tensordot(u, state._psi, axes=(list(range(k, 2 * k)), pos))
    out = np.moveaxis(out, list(range(k)), pos)
    return StateVector._trusted(out, state.labels)


def apply_gate(
    state: StateVector,
    gate: str,
    targets: Hashable | Sequence[Hashable],
    angle: float | None = None,
) -> StateVector:
    """Apply one of H, X, Y, Z, S, Rz/Rx(angle), CZ, CNOT (control first), SWAP."""
    if isinstance(targets, (str, int)) or not isinstance(targets, Sequence):
        targets = [targets]
    name = gate.upper()
    arity = GATE_ARITY.get(name)
    if arity is None:
        raise ValueError(f"unknown gate {gate!r}")
    if len(targets) != arity:
        raise ValueError(f"{gate} acts on {arity} qubit(s), got {len(targets)}")
    if name == "CZ":
        return apply_cz(state, targets[0], targets[1])
    return apply_unitary(state, gate_matrix(name, angle), targets)


def apply_cz(state: StateVector, a: Hashable, b: Hashable) -> StateVector:
    pa, pb = _positions(state, [a, b])
    psi = state._psi.copy()
    idx = [slice(None)] * state.n
    idx[pa] = 1
    idx[pb] = 1
    psi[tuple(idx)] *= -1
    return StateVector._trusted(psi, state.labels)


def apply_pauli(
    state: StateVector, pauli: PauliOperator, targets: Sequence[Hashable] | None = None
) -> StateVector:
    """Apply ``pauli``; qubit ``j`` of the operator acts on ``targets[j]``."""
    targets = list(state.labels if targets is None else targets)
    if len(targets) != pauli.n:
        raise ValueError(f"Pauli on {pauli.n} qubits applied to {len(targets)} targets")
    pos = _positions(state, targets)
    psi = state._psi.copy()
    for j, p in enumerate(pos):
        if (pauli.z >> j) & 1:
            idx = [slice(None)] * state.n
            idx[p] = 1
            psi[tuple(idx)] *= -1
    for j, p in enumerate(pos):
        if (pauli.x >> j) & 1:
            psi = np.flip(psi, axis=p)
    if pauli.phase:
        psi = psi * (1j ** pauli.phase)
    return StateVector._trusted(np.ascontiguousarray(psi), state.labels)


# graphs and cluster states ------------------------------------------------


@dataclass(frozen=True)
class GraphSpec:
    """Simple undirected graph over hashable node labels."""

    nodes: tuple
    edges: tuple

    def __post_init__(self) -> None:
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node labels")
        known = set(nodes)
        seen = set()
        edges = []
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on {a!r}")
            if a not in known or b not in known:
                raise ValueError(f"edge ({a!r}, {b!r}) references an unknown node")
            key = frozenset((a, b))
            if key in seen:
                raise ValueError(f"duplicate edge ({a!r}, {b!r})")
            seen.add(key)
            edges.append((a, b))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(edges))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def neighbors(self, node: Hashable) -> tuple:
        return self._adjacency()[node]

    def _adjacency(self) -> dict:
        adj = self.__dict__.get("_adj")
        if adj is None:
            adj = {v: [] for v in self.nodes}
            for a, b in self.edges:
                adj[a].append(b)
                adj[b].append(a)
            adj = {v: tuple(ns) for v, ns in adj.items()}
            object.__setattr__(self, "_adj", adj)
        return adj

    def degree(self, node: Hashable) -> int:
        return len(self.neighbors(node))

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        seen = {self.nodes[0]}
        frontier = [self.nodes[0]]
        while frontier:
            v = frontier.pop()
            for w in self.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return len(seen) == len(self.nodes)


def build_cluster(graph: GraphSpec, inputs: Mapping[Hashable, StateVector] | None = None) -> StateVector:
    """Tensor the node states (``|+>`` unless given) and apply CZ on every edge."""
    inputs = dict(inputs or {})
    if graph.n_nodes > MAX_QUBITS:
        raise RegisterError(f"graph has {graph.n_nodes} nodes; cap is {MAX_QUBITS}")
    unknown = set(inputs) - set(graph.nodes)
    if unknown:
        raise RegisterError(f"inputs for unknown nodes {sorted(map(repr, unknown))}")
    state = StateVector.empty()
    for v in graph.nodes:
        single = inputs.get(v)
        single = plus_state(v) if single is None else single.relabel([v])
        state = state.kron(single)
    for a, b in graph.edges:
        state = apply_cz(state, a, b)
    return state


# measurements -------------------------------------------------------------


def _split(state: StateVector, qubit: Hashable) -> tuple[np.ndarray, np.ndarray, tuple]:
    p = state.position(qubit)
    a0 = np.take(state._psi, 0, axis=p)
    a1 = np.take(state._psi, 1, axis=p)
    rest = state.labels[:p] + state.labels[p + 1:]
    return a0, a1, rest


def _choose(probs: tuple[float, float], rng: np.random.Generator | None, force: int | None) -> int:
    if force is not None:
        if force not in (0, 1):
            raise ValueError("forced outcome must be 0 or 1")
        if probs[force] < 1e-14:
            raise ValueError(f"outcome {force} has zero probability")
        return force
    if rng is None:
        raise ValueError("a random generator is required unless the outcome is forced")
    return 0 if rng.random() < probs[0] else 1


def mdelta_branches(state: StateVector, qubit: Hashable, delta: float) -> tuple[np.ndarray, np.ndarray, tuple]:
    a0, a1, rest = _split(state, qubit)
    phase = cmath.exp(-1j * delta)
    return (a0 + phase * a1) * SQRT1_2, (a0 - phase * a1) * SQRT1_2, rest


def mdelta_probabilities(state: StateVector, qubit: Hashable, delta: float) -> tuple[float, float]:
    """Born probabilities of outcomes ``|+_delta>`` (0) and ``|-_delta>`` (1)."""
    b0, b1, _ = mdelta_branches(state, qubit, delta)
    return float(np.vdot(b0, b0).real), float(np.vdot(b1, b1).real)


def measure_mdelta(
    state: StateVector,
    qubit: Hashable,
    delta: float,
    rng: np.random.Generator | None = None,
    *,
    force: int | None = None,
) -> tuple[int, StateVector]:
    """Destructive measurement in ``{|+_delta>, |-_delta>}``; outcome 0 means ``|+_delta>``."""
    b0, b1, rest = mdelta_branches(state, qubit, delta)
    probs = (float(np.vdot(b0, b0).real), float(np.vdot(b1, b1).real))
    s = _choose(probs, rng, force)
    branch = b0 if s == 0 else b1
    return s, StateVector._trusted(branch / math.sqrt(probs[s]), rest)


def computational_probabilities(state: StateVector, qubit: Hashable) -> tuple[float, float]:
    a0, a1, _ = _split(state, qubit)
    return float(np.vdot(a0, a0).real), float(np.vdot(a1, a1).real)


def measure_computational(
    state: StateVector,
    qubit: Hashable,
    rng: np.random.Generator | None = None,
    *,
    force: int | None = None,
) -> tuple[int, StateVector]:
    """Destructive Z-basis measurement."""
    a0, a1, rest = _split(state, qubit)
    probs = (float(np.vdot(a0, a0).real), float(np.vdot(a1, a1).real))
    s = _choose(probs, rng, force)
    branch = a0 if s == 0 else a1
    return s, StateVector._trusted(np.ascontiguousarray(branch) / math.sqrt(probs[s]), rest)


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2``, insensitive to global phase (and to labels)."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n} qubits")
    return float(min(1.0, abs(np.vdot(a._psi, b._psi)) ** 2))


# logical measurement on code blocks ---------------------------------------


def _default_code() -> StabilizerCode:
    from ftbqc.stabilizer import steane_code

    return steane_code()


def code_space_overlap(
    state: StateVector,
    qubits: Sequence[Hashable] | None = None,
    code: StabilizerCode | None = None,
) -> float:
    """``<psi| P |psi>`` for the code-space projector ``P = prod (I + g)/2`` on ``qubits``."""
    code = code or _default_code()
    qubits = list(state.labels if qubits is None else qubits)
    if len(qubits) != code.n:
        raise ValueError(f"block has {len(qubits)} qubits, code needs {code.n}")
    projected = state
    vec = state._psi
    for g in code.generator_paulis():
        gv = apply_pauli(projected, g, qubits)._psi
        vec = 0.5 * (projected._psi + gv)
        projected = StateVector._trusted(vec, state.labels)
    return float(np.vdot(state._psi, vec).real)


def _logical_kets(delta: float, code: StabilizerCode) -> tuple[np.ndarray, np.ndarray]:
    zero, one = (c.tensor for c in code.codewords[:2])
    phase = cmath.exp(1j * delta)
    return (zero + phase * one) * SQRT1_2, (zero - phase * one) * SQRT1_2


def _logical_branches(state, delta, qubits, code):
    pos = _positions(state, qubits)
    kets = _logical_kets(delta, code)
    k = len(pos)
    rest = tuple(lab for i, lab in enumerate(state.labels) if i not in set(pos))
    branches = [np.tensordot(ket.conj(), state._psi, axes=(list(range(k)), pos)) for ket in kets]
    return kets, branches, pos, rest


def logical_probabilities(
    state: StateVector,
    delta: float,
    qubits: Sequence[Hashable] | None = None,
    code: StabilizerCode | None = None,
) -> tuple[float, float]:
    """Probabilities of projecting the block onto ``|+_delta>_L`` and ``|-_delta>_L``."""
    code = code or _default_code()
    qubits = list(state.labels if qubits is None else qubits)
    _, branches, _, _ = _logical_branches(state, delta, qubits, code)
    return tuple(float(np.vdot(b, b).real) for b in branches)


def logical_measure(
    state: StateVector,
    delta: float,
    rng: np.random.Generator | None = None,
    *,
    qubits: Sequence[Hashable] | None = None,
    remove: bool = False,
    code: StabilizerCode | None = None,
    force: int | None = None,
    tol: float = 1e-9,
) -> tuple[int, StateVector]:
    """Measure a code block in ``{|+_delta>_L, |-_delta>_L}``.

    ``qubits`` selects the block inside a larger register (default: the whole
    state, which must then be one block).  With ``remove=False`` the collapsed
    block stays in the register; with ``remove=True`` it is traced out, which
    is exact because the block factorises after the projection.
    """
    code = code or _default_code()
    qubits = list(state.labels if qubits is None else qubits)
    overlap = code_space_overlap(state, qubits, code)
    if overlap < 1 - tol:
        raise CodeSpaceError(f"block overlap with the code space is {overlap:.3e}")
    kets, branches, pos, rest = _logical_branches(state, delta, qubits, code)
    probs = tuple(float(np.vdot(b, b).real) for b in branches)
    total = probs[0] + probs[1]
    probs = (probs[0] / total, probs[1] / total)
    s = _choose(probs, rng, force)
    remainder = branches[s] / math.sqrt(probs[s] * total)
    if remove:
        return s, StateVector._trusted(np.ascontiguousarray(remainder), rest)
    full = np.multiply.outer(kets[s], remainder)
    full = np.moveaxis(full, list(range(len(pos))), pos)
    return s, StateVector._trusted(full, state.labels)
