"""Brickwork graphs with their flow, plus a circuit-to-angle compiler.

Nodes are ``(x, y)`` with column ``x`` in ``1..m`` (time) and row ``y`` in
``1..n``.  Measuring ``(x, y)`` at angle ``phi`` applies ``H Rz(-phi)`` to the
row's qubit and hands it to ``(x+1, y)``; two consecutive columns therefore
give ``Rx(b) Rz(a)`` with ``phi = -a, -b``.  Here ``Rz(a) = diag(1, e^{ia})``
and ``Rx(b) = H Rz(b) H``.

Compiled computations start from ``|0...0>`` and end with a Z readout: the
brickwork realises ``H U H`` on ``|+...+>`` and the last column is measured at
angle 0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from ftbqc.statevector import GraphSpec, StateVector, apply_gate

TWO_PI = 2 * math.pi
Q = math.pi / 4
GATES = {"H": 1, "X": 1, "Z": 1, "RZ": 1, "CNOT": 2, "CZ": 2}

# brick angles in units of pi/4, columns c..c+3 of the upper and lower row
CNOT_TOP_CONTROL = ((0, 0, 6, 0), (0, 2, 0, 6))
CNOT_BOTTOM_CONTROL = ((0, 2, 0, 6), (0, 0, 6, 0))


class BrickworkError(ValueError):
    pass


def vertical_columns(row: int, m: int) -> list[int]:
    """Columns carrying a rung between ``row`` and ``row + 1``."""
    if row % 2 == 1:
        return [c for c in range(1, m + 1) if c % 8 in (3, 5)]
    return [c for c in range(7, m + 1) if c % 8 in (7, 1)]


def check_dimensions(n: int, m: int, strict: bool = True) -> None:
    if n < 1 or m < 1:
        raise BrickworkError("brickwork needs at least one row and one column")
    if strict and (n % 2 or m % 8 != 1 or n < 2):
        raise BrickworkError(f"strict brickwork needs even n >= 2 and m = 1 mod 8, got n={n}, m={m}")


def brickwork_graph(n: int, m: int, strict: bool = True) -> GraphSpec:
    """Rows are horizontal chains; rungs follow the 8-column brick period."""
    check_dimensions(n, m, strict)
    nodes = tuple((x, y) for x in range(1, m + 1) for y in range(1, n + 1))
    edges = [((x, y), (x + 1, y)) for y in range(1, n + 1) for x in range(1, m)]
    for y in range(1, n):
        edges += [((c, y), (c, y + 1)) for c in vertical_columns(y, m)]
    return GraphSpec(nodes, tuple(edges))


def has_rung(x: int, y: int, y2: int, m: int) -> bool:
    lo = min(y, y2)
    return abs(y - y2) == 1 and x in vertical_columns(lo, m)


def flow_dependencies(n: int, m: int) -> tuple[dict, dict]:
    """X and Z dependency sets for flow ``f(x, y) = (x + 1, y)``."""
    xdeps: dict = {}
    zdeps: dict = {}
    for x in range(1, m + 1):
        for y in range(1, n + 1):
            xdeps[(x, y)] = frozenset({(x - 1, y)}) if x > 1 else frozenset()
            z = set()
            if x > 2:
                z.add((x - 2, y))
            if x > 1:
                for y2 in (y - 1, y + 1):
                    if 1 <= y2 <= n and has_rung(x, y, y2, m):
                        z.add((x - 1, y2))
            zdeps[(x, y)] = frozenset(z)
    return xdeps, zdeps


# circuits -------------------------------------------------------------------

_ANGLE = re.compile(r"^([+-]?)(\d*\.?\d*)\*?(pi)?(?:/(\d+\.?\d*))?$")


def parse_angle(text: str) -> float:
    """Parse plain floats or multiples of ``pi`` such as ``-3*pi/2``."""
    t = text.strip().lower().replace(" ", "")
    mt = _ANGLE.match(t)
    if not t or mt is None or (not mt.group(2) and not mt.group(3)):
        raise ValueError(f"cannot parse angle {text!r}")
    sign, num, pi, den = mt.groups()
    value = float(num) if num else 1.0
    if pi:
        value *= math.pi
    if den:
        value /= float(den)
    return -value if sign == "-" else value


@dataclass(frozen=True)
class Gate:
    name: str
    target: int
    control: int | None = None
    angle: float | None = None

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,) if self.control is None else (self.control, self.target)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]

    def unitary(self) -> np.ndarray:
        """Dense matrix, qubit 0 most significant."""
        dim = 1 << self.n_qubits
        cols = []
        for i in range(dim):
            cols.append(self.apply(StateVector.basis(format(i, f"0{self.n_qubits}b"))).vector)
        return np.array(cols).T

    def apply(self, state: StateVector) -> StateVector:
        for g in self.gates:
            if g.name == "CNOT":
                state = apply_gate(state, "CNOT", [g.control, g.target])
            elif g.name == "CZ":
                state = apply_gate(state, "CZ", [g.control, g.target])
            elif g.name == "RZ":
                state = apply_gate(state, "RZ", g.target, g.angle)
            else:
                state = apply_gate(state, g.name, g.target)
        return state

    def output_distribution(self) -> dict[tuple[int, ...], float]:
        """Z-readout probabilities of ``U |0...0>``; the direct-simulation oracle."""
        psi = self.apply(StateVector.zeros(self.n_qubits)).vector
        probs = np.abs(psi) ** 2
        return {
            tuple(int(b) for b in format(i, f"0{self.n_qubits}b")): float(p)
            for i, p in enumerate(probs)
            if p > 1e-15
        }


def parse_circuit(text: str, n_qubits: int | None = None) -> Circuit:
    """Line format ``gate target [control] [angle]``; qubits are 0-indexed.

    ``qubits N`` may declare the width; otherwise it is the largest index + 1.
    ``#`` starts a comment.
    """
    gates = []
    declared = n_qubits
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        name = parts[0].upper()
        if name == "QUBITS":
            declared = int(parts[1])
            continue
        if name not in GATES:
            raise ValueError(f"line {lineno}: unknown gate {parts[0]!r}")
        try:
            target = int(parts[1])
            if GATES[name] == 2:
                if len(parts) != 3:
                    raise ValueError("expected target and control")
                control = int(parts[2])
                if control == target:
                    raise ValueError("control equals target")
                gates.append(Gate(name, target, control))
            elif name == "RZ":
                if len(parts) != 3:
                    raise ValueError("expected target and angle")
                gates.append(Gate(name, target, angle=parse_angle(parts[2])))
            else:
                if len(parts) != 2:
                    raise ValueError("expected a single target")
                gates.append(Gate(name, target))
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not gates and declared is None:
        raise ValueError("empty circuit")
    width = max([q for g in gates for q in g.qubits], default=-1) + 1
    n = width if declared is None else declared
    if width > n:
        raise ValueError(f"gate index exceeds declared width {n}")
    if any(min(g.qubits) < 0 for g in gates):
        raise ValueError("negative qubit index")
    return Circuit(n, tuple(gates))


# single-qubit packing --------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _rz(a: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * a)])


def _rx(b: float) -> np.ndarray:
    return _H @ _rz(b) @ _H


def cell_unitary(a: float, b: float) -> np.ndarray:
    return _rx(b) @ _rz(a)


def _equal_up_to_phase(u: np.ndarray, v: np.ndarray, atol: float = 1e-9) -> bool:
    k = int(np.argmax(np.abs(v)))
    if abs(v.flat[k]) < atol:
        return False
    ph = u.flat[k] / v.flat[k]
    return abs(abs(ph) - 1) < 1e-7 and np.allclose(u, ph * v, atol=atol)


def zxz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """``(alpha, beta, gamma)`` with ``u ~ Rz(alpha) Rx(beta) Rz(gamma)``."""
    u = np.asarray(u, dtype=complex)
    v = u / np.sqrt(np.linalg.det(u))
    c, s = abs(v[0, 0]), abs(v[1, 0])
    beta = 2 * math.atan2(s, c)
    if s < 1e-12:
        return 0.0, 0.0, (-2 * np.angle(v[0, 0])) % TWO_PI
    if c < 1e-12:
        return 0.0, math.pi, (-2 * (np.angle(v[1, 0]) + math.pi / 2)) % TWO_PI
    plus = -2 * np.angle(v[0, 0])
    minus = 2 * (np.angle(v[1, 0]) + math.pi / 2)
    return (plus + minus) / 2 % TWO_PI, beta, (plus - minus) / 2 % TWO_PI


def pack_cells(u: np.ndarray, max_cells: int) -> list[tuple[float, float]] | None:
    """Write ``u`` as at most ``max_cells`` products ``Rx(b) Rz(a)``; ``None`` if impossible."""
    if _equal_up_to_phase(u, np.eye(2)):
        return []
    alpha, beta, gamma = zxz_angles(u)
    # Rz(pi) Rx(beta) Rz(gamma) ~ Rx(-beta) Rz(gamma + pi), so alpha in {0, pi} fits one cell
    for a, b in ((gamma, beta), ((gamma + math.pi) % TWO_PI, (-beta) % TWO_PI)):
        if _equal_up_to_phase(cell_unitary(a, b), u):
            return [(a, b)]
    if max_cells < 2:
        return None
    cells = [(gamma, beta), (alpha, 0.0)]
    if not _equal_up_to_phase(cell_unitary(*cells[1]) @ cell_unitary(*cells[0]), u):
        raise AssertionError("Euler decomposition failed")
    return cells


def cells_needed(u: np.ndarray) -> int:
    if pack_cells(u, 1) is None:
        return 2
    return len(pack_cells(u, 1))


# compiler -------------------------------------------------------------------


def stage_start(s: int) -> int:
    return 3 + 4 * s


def _in_pair(r: int, s: int, n: int) -> bool:
    """Whether 0-indexed row ``r`` belongs to a brick pair during stage ``s``."""
    y = r + 1
    return (y % 2 == stage_layer(s) and y < n) or ((y - 1) % 2 == stage_layer(s) and y > 1)


def stage_layer(s: int) -> int:
    """Rows ``y`` with ``y % 2 == layer`` start a brick (``y``, ``y + 1``) in stage ``s``."""
    return 1 if s % 2 == 0 else 0


def _gate_matrix(g: Gate) -> np.ndarray:
    if g.name == "H":
        return _H
    if g.name == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if g.name == "Z":
        return np.diag([1.0, -1.0]).astype(complex)
    if g.name == "RZ":
        return _rz(g.angle)
    raise ValueError(g.name)


def expand_swaps(circuit: Circuit) -> Circuit:
    """Route non-adjacent two-qubit gates through neighbouring SWAPs (3 CNOTs each)."""
    out: list[Gate] = []

    def swap(a: int, b: int) -> None:
        out.extend([Gate("CNOT", b, a), Gate("CNOT", a, b), Gate("CNOT", b, a)])

    for g in circuit.gates:
        if g.control is None or abs(g.control - g.target) == 1:
            out.append(g)
            continue
        c, t = g.control, g.target
        step = 1 if t > c else -1
        path = list(range(c, t - step, step))
        for q in path:
            swap(q, q + step)
        out.append(Gate(g.name, t, t - step))
        for q in reversed(path):
            swap(q, q + step)
    return Circuit(circuit.n_qubits, tuple(out))


@dataclass
class CompiledBrickwork:
    n: int
    m: int
    angles: dict
    bricks: list = field(default_factory=list)  # (stage, top_row, kind)

    def phi(self, node) -> float:
        return self.angles[node]


def compile_circuit(circuit: Circuit, *, allow_swaps: bool = False, verify: bool = True) -> CompiledBrickwork:
    """Brickwork angles for ``circuit`` (one row per qubit, ``m = 8t + 1`` columns)."""
    if allow_swaps:
        circuit = expand_swaps(circuit)
    n = circuit.n_qubits
    if n < 1:
        raise BrickworkError("circuit has no qubits")
    for g in circuit.gates:
        if g.control is not None and abs(g.control - g.target) != 1:
            raise BrickworkError(
                f"{g.name} on qubits {g.control},{g.target} is not nearest-neighbour; "
                "enable swap routing"
            )
    if n == 1 and any(g.control is not None for g in circuit.gates):
        raise BrickworkError("two-qubit gate on a one-qubit circuit")

    # per-row segments: pending unitary between consecutive bricks
    pending = [_H.copy() for _ in range(n)]
    last_stage = [-1] * n  # stage of the row's last brick
    segments: list[list] = [[] for _ in range(n)]  # (from_stage, to_stage, unitary)
    bricks: list[tuple[int, int, str]] = []
    occupied: set[tuple[int, int]] = set()  # (stage, row)

    def capacity(row: int, lo: int, hi: int) -> int:
        """Cells for ``row`` strictly between stage ``lo`` and stage ``hi``."""
        total = 1 if lo < 0 else 0
        for s in range(max(lo + 1, 0), hi):
            total += 1 if _in_pair(row, s, n) else 2
        return total

    for g in circuit.gates:
        if g.control is None:
            pending[g.target] = _gate_matrix(g) @ pending[g.target]
            continue
        top = min(g.control, g.target)
        kind = "CNOT_TC" if g.control == top else "CNOT_BC"
        if g.name == "CZ":  # H_t CNOT H_t
            pending[g.target] = _H @ pending[g.target]
        s = max(last_stage[top], last_stage[top + 1]) + 1
        while True:
            if stage_layer(s) == (top + 1) % 2 and all(
                capacity(r, last_stage[r], s) >= cells_needed(pending[r]) for r in (top, top + 1)
            ):
                break
            s += 1
        for r in (top, top + 1):
            segments[r].append((last_stage[r], s, pending[r]))
            pending[r] = np.eye(2, dtype=complex)
            last_stage[r] = s
            occupied.add((s, r))
        bricks.append((s, top + 1, kind))
        if g.name == "CZ":
            pending[g.target] = _H @ pending[g.target]

    for r in range(n):
        pending[r] = _H @ pending[r]

    # trailing segment runs to the final full stage; grow until everything fits
    # m = 8t + 1 leaves full stages 0..2t-2 and an idle truncated stage 2t-1
    n_stages = max(last_stage) + 1
    while True:
        t = max(1, (n_stages + 2) // 2)
        full = 2 * t - 1
        if all(capacity(r, last_stage[r], full) >= cells_needed(pending[r]) for r in range(n)):
            break
        n_stages += 1
    m = 8 * t + 1
    for r in range(n):
        segments[r].append((last_stage[r], full, pending[r]))

    angles = {(x, y): 0.0 for x in range(1, m + 1) for y in range(1, n + 1)}
    brick_at = {}
    for s, top, kind in bricks:
        brick_at[(s, top)] = kind

    for r in range(n):
        y = r + 1
        for lo, hi, u in segments[r]:
            slots = []  # (kind, first column)
            if lo < 0:
                slots.append(("cell", 1))
            for s in range(max(lo + 1, 0), hi):
                c = stage_start(s)
                if _in_pair(r, s, n):
                    slots.append(("split", c))
                else:
                    slots.extend([("cell", c), ("cell", c + 2)])
            cells = pack_cells(u, len(slots))
            if cells is None or len(cells) > len(slots):
                raise AssertionError("scheduler under-allocated cells")
            for (kind, c), (a, b) in zip(slots, cells):
                if kind == "cell":
                    angles[(c, y)] = (-a) % TWO_PI
                    angles[(c + 1, y)] = (-b) % TWO_PI
                else:
                    angles[(c, y)] = (-a) % TWO_PI
                    angles[(c + 3, y)] = (-b) % TWO_PI

    for (s, top), kind in brick_at.items():
        c = stage_start(s)
        upper, lower = CNOT_TOP_CONTROL if kind == "CNOT_TC" else CNOT_BOTTOM_CONTROL
        for k in range(4):
            angles[(c + k, top)] = upper[k] * Q
            angles[(c + k, top + 1)] = lower[k] * Q

    compiled = CompiledBrickwork(n, m, angles, sorted(bricks))
    if verify:
        target = _hadamard_all(n) @ circuit.unitary() @ _hadamard_all(n)
        got = brickwork_unitary(compiled)
        if not _equal_up_to_phase(got, target, atol=1e-8):
            raise AssertionError("compiled brickwork does not reproduce the circuit")
    return compiled


def _hadamard_all(n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        out = np.kron(out, _H)
    return out


def _embed(u: np.ndarray, row: int, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for r in range(n):
        out = np.kron(out, u if r == row else np.eye(2))
    return out


def _cz_diag(n: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(1 << n)
    bit_a = (idx >> (n - 1 - a)) & 1
    bit_b = (idx >> (n - 1 - b)) & 1
    return np.where(bit_a & bit_b, -1.0, 1.0)


def brickwork_unitary(compiled: CompiledBrickwork) -> np.ndarray:
    """Byproduct-free map from column 1 to the state read out at column ``m``.

    Column ``x`` applies its rungs, then ``H Rz(-phi)`` per row; at column
    ``m`` only the rungs act before the readout.
    """
    n, m = compiled.n, compiled.m
    w = np.eye(1 << n, dtype=complex)
    for x in range(1, m + 1):
        for y in range(1, n):
            if x in vertical_columns(y, m):
                w = _cz_diag(n, y - 1, y)[:, None] * w
        if x == m:
            break
        layer = np.ones((1, 1), dtype=complex)
        for y in range(1, n + 1):
            layer = np.kron(layer, _H @ _rz(-compiled.angles[(x, y)]))
        w = layer @ w
    return w
