"""Cluster-state measurement pattern for Steane encoding of a blind qubit.

The encoder circuit (:mod:`ftbqc.encoding`) is compiled wire by wire:

* every wire holds a *current node* carrying its qubit;
* a ``|0>`` wire start is a two-node segment whose first node is X-measured;
* a CNOT adds a 2x3 grid tile around the control node ``c`` and the target
  node ``t``: ``h`` and ``o`` continue the target wire, and the two pad nodes
  ``p1``/``p2`` complete the grid and are removed by Z measurements.

With the pads gone the tile is the four-node CNOT pattern (edges ``t-h``,
``c-h``, ``h-o``; ``t`` and ``h`` measured in X).  All bases are fixed, so the
input angle never influences what the server is asked to measure.  Pauli
byproducts are tracked symbolically as dependency sets at compile time and
resolved against outcomes at run time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from ftbqc.encoding import ENCODING_CNOTS, INPUT_QUBIT, PIVOTS
from ftbqc.pauli import PauliOperator
from ftbqc.statevector import (
    GraphSpec,
    StateVector,
    apply_cz,
    apply_pauli,
    measure_computational,
    measure_mdelta,
    plus_state,
    plus_theta,
)


class Basis(enum.Enum):
    Z = "Z"  # computational basis (white)
    X = "M(0)"  # green
    Y = "M(pi/2)"  # red
    ADAPTIVE = "M(delta)"

    @property
    def angle(self) -> float:
        if self is Basis.X:
            return 0.0
        if self is Basis.Y:
            return math.pi / 2
        raise ValueError(f"{self.value} has no fixed angle")


class PatternError(ValueError):
    """A measurement pattern violates its own structural invariants."""


@dataclass(frozen=True)
class MeasurementPattern:
    graph: GraphSpec
    order: tuple
    bases: Mapping[Hashable, Basis]
    dependencies: Mapping[Hashable, tuple[frozenset, frozenset]]
    input_node: Hashable
    outputs: tuple
    byproducts: Mapping[Hashable, tuple[frozenset, frozenset]]
    names: Mapping[Hashable, str] = field(default_factory=dict, compare=False)

    @property
    def ancilla_count(self) -> int:
        return self.graph.n_nodes - len(self.outputs) - (self.input_node is not None)

    def validate(self) -> None:
        nodes = set(self.graph.nodes)
        outputs = set(self.outputs)
        if len(self.order) != len(set(self.order)):
            raise PatternError("a node appears twice in the measurement order")
        if outputs & set(self.order):
            raise PatternError("output nodes must not be measured")
        if set(self.order) | outputs != nodes:
            raise PatternError("order and outputs must cover every node exactly once")
        position = {v: i for i, v in enumerate(self.order)}
        for v in self.order:
            if v not in self.bases:
                raise PatternError(f"node {v!r} has no basis")
            xs, zs = self.dependencies.get(v, (frozenset(), frozenset()))
            for u in xs | zs:
                if position.get(u, math.inf) >= position[v]:
                    raise PatternError(f"node {v!r} depends on {u!r}, which is not measured earlier")
        for o in self.outputs:
            xs, zs = self.byproducts.get(o, (frozenset(), frozenset()))
            if not (xs | zs) <= set(self.order):
                raise PatternError(f"byproduct of output {o!r} references an unmeasured node")

    def basis_alphabet(self) -> set[Basis]:
        return set(self.bases.values())

    def to_text(self) -> str:
        """Line records: ``node``, ``edge``, ``dep``, ``input``, ``output``, ``byproduct``."""

        def ids(nodes: Iterable) -> str:
            items = sorted(nodes, key=self.order.index)
            return ",".join(map(str, items)) or "-"

        lines = []
        for v in self.graph.nodes:
            basis = self.bases[v].value if v in self.bases else "output"
            lines.append(f"node {v} {self.names.get(v, v)} {basis}")
        lines += [f"edge {a} {b}" for a, b in self.graph.edges]
        for v in self.order:
            xs, zs = self.dependencies[v]
            lines.append(f"dep {v} X {ids(xs)} Z {ids(zs)}")
        lines.append(f"input {self.input_node}")
        for q, o in enumerate(self.outputs):
            xs, zs = self.byproducts[o]
            lines.append(f"output {q} {o}")
            lines.append(f"byproduct {o} X {ids(xs)} Z {ids(zs)}")
        lines.append(f"measure {' '.join(map(str, self.order))}")
        return "\n".join(lines) + "\n"


class _Builder:
    def __init__(self) -> None:
        self.nodes: list[int] = []
        self.names: dict[int, str] = {}
        self.edges: list[tuple[int, int]] = []
        self.order: list[int] = []
        self.bases: dict[int, Basis] = {}
        self.flow: dict[int, int] = {}

    def node(self, name: str) -> int:
        v = len(self.nodes)
        self.nodes.append(v)
        self.names[v] = name
        return v

    def edge(self, a: int, b: int) -> None:
        self.edges.append((a, b))

    def measure(self, v: int, basis: Basis, flow_to: int | None = None) -> None:
        self.order.append(v)
        self.bases[v] = basis
        if flow_to is not None:
            self.flow[v] = flow_to


def _dependency_frame(build: _Builder, graph: GraphSpec, outputs: Sequence[int]):
    """Symbolic Pauli frame: every node's byproduct as X/Z parity sets of corrected outcomes."""
    xs = {v: set() for v in graph.nodes}
    zs = {v: set() for v in graph.nodes}
    measured: set[int] = set()
    deps = {}
    for v in build.order:
        deps[v] = (frozenset(xs[v]), frozenset(zs[v]))
        measured.add(v)
        basis = build.bases[v]
        if basis is Basis.Z:
            for w in graph.neighbors(v):
                if w not in measured:
                    zs[w] ^= {v}
            continue
        f = build.flow.get(v)
        if f is None or f in measured:
            raise PatternError(f"node {v} has no usable flow successor")
        xs[f] ^= {v}
        for w in graph.neighbors(f):
            if w == v or w in measured:
                if w != v and build.bases[w] is not Basis.Z:
                    raise PatternError(f"flow of {v} touches already-measured node {w}")
                continue
            zs[w] ^= {v}
    byproducts = {o: (frozenset(xs[o]), frozenset(zs[o])) for o in outputs}
    return deps, byproducts


def compile_encoding_pattern() -> MeasurementPattern:
    """Measurement pattern mapping an input ``|+_theta>`` to ``|+_theta>_L`` on 7 outputs."""
    b = _Builder()
    current: dict[int, int] = {}
    input_node = b.node(f"in{INPUT_QUBIT}")
    current[INPUT_QUBIT] = input_node
    for p in PIVOTS:
        current[p] = b.node(f"w{p}.0")
    # wires that start in |0>: |+> - |+> with the first node X-measured
    pending_zero = {}
    for q in range(7):
        if q not in current:
            a = b.node(f"w{q}.z")
            current[q] = b.node(f"w{q}.0")
            b.edge(a, current[q])
            pending_zero[q] = a

    for k, (ctrl, tgt) in enumerate(ENCODING_CNOTS):
        for q in (ctrl, tgt):
            if q in pending_zero:
                a = pending_zero.pop(q)
                b.measure(a, Basis.X, flow_to=current[q])
        c, t = current[ctrl], current[tgt]
        h = b.node(f"g{k}.h")
        o = b.node(f"g{k}.o")
        p1 = b.node(f"g{k}.p1")
        p2 = b.node(f"g{k}.p2")
        # grid (0,0)=c (0,1)=h (0,2)=o / (1,0)=p1 (1,1)=t (1,2)=p2
        for e in ((c, h), (h, o), (p1, t), (t, p2), (c, p1), (h, t), (o, p2)):
            b.edge(*e)
        b.measure(p1, Basis.Z)
        b.measure(p2, Basis.Z)
        b.measure(t, Basis.X, flow_to=h)
        b.measure(h, Basis.X, flow_to=o)
        current[tgt] = o

    outputs = tuple(current[q] for q in range(7))
    graph = GraphSpec(tuple(b.nodes), tuple(b.edges))
    deps, byproducts = _dependency_frame(b, graph, outputs)
    pattern = MeasurementPattern(
        graph=graph,
        order=tuple(b.order),
        bases=dict(b.bases),
        dependencies=deps,
        input_node=input_node,
        outputs=outputs,
        byproducts=byproducts,
        names=dict(b.names),
    )
    pattern.validate()
    return pattern


_PATTERN_CACHE: list[MeasurementPattern] = []


def encoding_pattern() -> MeasurementPattern:
    """Memoised :func:`compile_encoding_pattern` (the pattern is immutable)."""
    if not _PATTERN_CACHE:
        _PATTERN_CACHE.append(compile_encoding_pattern())
    return _PATTERN_CACHE[0]


@dataclass(frozen=True)
class PreparationReport:
    block: StateVector
    theta: float
    byproduct: PauliOperator
    ancilla_count: int
    outcomes: Mapping[Hashable, int]
    peak_qubits: int


@dataclass
class _Execution:
    state: StateVector
    outcomes: dict
    byproduct: PauliOperator
    output_labels: tuple
    peak_qubits: int


def _parity(outcomes: Mapping, nodes: Iterable) -> int:
    return sum(outcomes[u] for u in nodes) & 1


def execute_pattern(
    pattern: MeasurementPattern,
    state: StateVector,
    input_label: Hashable,
    rng: np.random.Generator,
    output_labels: Sequence[Hashable] | None = None,
) -> _Execution:
    """Run ``pattern`` with the qubit ``input_label`` of ``state`` as its input node.

    Nodes are attached lazily (``|+>`` plus CZ to neighbours already present)
    just before a measurement needs them, keeping the register small.  The
    resolved byproduct is applied to the outputs, which end up labelled
    ``output_labels`` (default: ``0..6``) in the returned state.
    """
    pattern.validate()
    graph = pattern.graph
    if output_labels is None:
        output_labels = tuple(range(len(pattern.outputs)))
    output_labels = tuple(output_labels)
    if len(output_labels) != len(pattern.outputs):
        raise ValueError("need one label per output node")
    clash = (set(output_labels) & set(state.labels)) - {input_label}
    if clash:
        raise ValueError(f"output labels {sorted(map(repr, clash))} already used")
    tag = object()

    def lab(v):
        return input_label if v == pattern.input_node else (tag, v)

    state.position(input_label)
    present = {pattern.input_node}
    measured: set = set()
    peak = state.n

    def attach(v):
        nonlocal state, peak
        if v in present:
            return
        state = state.kron(plus_state(lab(v)))
        for w in graph.neighbors(v):
            if w in present and w not in measured:
                state = apply_cz(state, lab(w), lab(v))
        present.add(v)
        peak = max(peak, state.n)

    outcomes: dict = {}
    for v in pattern.order:
        attach(v)
        for w in graph.neighbors(v):
            attach(w)
        basis = pattern.bases[v]
        xs, zs = pattern.dependencies[v]
        if basis is Basis.Z:
            s, state = measure_computational(state, lab(v), rng)
            flip = _parity(outcomes, xs)
        elif basis is Basis.X:
            s, state = measure_mdelta(state, lab(v), 0.0, rng)
            flip = _parity(outcomes, zs)
        elif basis is Basis.Y:
            s, state = measure_mdelta(state, lab(v), math.pi / 2, rng)
            flip = _parity(outcomes, xs) ^ _parity(outcomes, zs)
        else:
            raise PatternError("adaptive bases need an explicit angle schedule")
        outcomes[v] = s ^ flip
        measured.add(v)
    for o in pattern.outputs:
        attach(o)

    n_out = len(pattern.outputs)
    x_mask = z_mask = 0
    for j, o in enumerate(pattern.outputs):
        xs, zs = pattern.byproducts[o]
        x_mask |= _parity(outcomes, xs) << j
        z_mask |= _parity(outcomes, zs) << j
    byproduct = PauliOperator(n_out, x_mask, z_mask, bin(x_mask & z_mask).count("1"))
    labels = [lab(o) for o in pattern.outputs]
    state = apply_pauli(state, byproduct, labels)
    mapping = dict(zip(labels, output_labels))
    state = state.relabel([mapping.get(lb, lb) for lb in state.labels])
    return _Execution(state, outcomes, byproduct, output_labels, peak)


def run_pattern(pattern: MeasurementPattern, theta: float, rng: np.random.Generator) -> PreparationReport:
    """Prepare ``|+_theta>_L`` on qubits 0..6 from a ``|+_theta>`` input node."""
    if not 0 <= theta < 2 * math.pi:
        raise ValueError("theta must lie in [0, 2*pi)")
    run = execute_pattern(pattern, plus_theta(theta, "input"), "input", rng)
    block = run.state.reorder(range(len(pattern.outputs)))
    return PreparationReport(
        block=block,
        theta=theta,
        byproduct=run.byproduct,
        ancilla_count=pattern.ancilla_count,
        outcomes=dict(run.outcomes),
        peak_qubits=run.peak_qubits,
    )


@dataclass(frozen=True)
class EliminationResult:
    state: StateVector
    outcomes: Mapping[Hashable, int]
    z_byproducts: Mapping[Hashable, int]

    def z_correction(self, node: Hashable) -> int:
        return self.z_byproducts.get(node, 0)


def eliminate_redundant(
    state: StateVector,
    nodes: Iterable[Hashable],
    rng: np.random.Generator,
    graph: GraphSpec | None = None,
) -> EliminationResult:
    """Z-measure ``nodes``; outcome 1 leaves a Z byproduct on each surviving graph neighbour."""
    nodes = list(nodes)
    for v in nodes:
        state.position(v)
    outcomes = {}
    zby: dict = {}
    for v in nodes:
        s, state = measure_computational(state, v, rng)
        outcomes[v] = s
        if graph is not None and s:
            for w in graph.neighbors(v):
                if w in state:
                    zby[w] = zby.get(w, 0) ^ 1
    return EliminationResult(state, outcomes, {w: b for w, b in zby.items() if b})
