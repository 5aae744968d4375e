"""Stabilizer codes given by a generator matrix ``(X_G | Z_G)``, with the Steane code built in."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ftbqc.pauli import PauliOperator
from ftbqc.statevector import StateVector, apply_pauli

STEANE_PATTERNS = ("0001111", "0110011", "1010101")


def _gf2_rank(rows: np.ndarray) -> int:
    m = rows.copy() % 2
    rank = 0
    n_rows, n_cols = m.shape
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(n_rows):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
        if rank == n_rows:
            break
    return rank


@dataclass(frozen=True)
class GeneratorMatrix:
    """``(n - k) x 2n`` binary matrix; row ``i`` is generator ``g_i`` (column ``j`` = qubit ``j``)."""

    x_part: np.ndarray
    z_part: np.ndarray

    def __post_init__(self) -> None:
        xg = np.array(self.x_part, dtype=np.uint8) % 2
        zg = np.array(self.z_part, dtype=np.uint8) % 2
        if xg.ndim != 2 or xg.shape != zg.shape:
            raise ValueError("X and Z halves must be matrices of equal shape")
        symplectic = (xg.astype(int) @ zg.T.astype(int) + zg.astype(int) @ xg.T.astype(int)) % 2
        if symplectic.any():
            a, b = map(int, np.argwhere(symplectic)[0])
            raise ValueError(f"generators {a} and {b} anticommute")
        if _gf2_rank(np.hstack([xg, zg])) != xg.shape[0]:
            raise ValueError("generator rows are linearly dependent over GF(2)")
        xg.flags.writeable = False
        zg.flags.writeable = False
        object.__setattr__(self, "x_part", xg)
        object.__setattr__(self, "z_part", zg)

    @property
    def n(self) -> int:
        return self.x_part.shape[1]

    @property
    def n_rows(self) -> int:
        return self.x_part.shape[0]

    def paulis(self) -> tuple[PauliOperator, ...]:
        return tuple(PauliOperator.from_bits(x, z) for x, z in zip(self.x_part, self.z_part))

    @classmethod
    def from_text(cls, text: str) -> GeneratorMatrix:
        """Parse rows like ``0001111|0000000``; blank lines and ``#`` comments are skipped."""
        xs, zs = [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.count("|") != 1:
                raise ValueError(f"line {lineno}: expected one '|' separator")
            left, right = (part.strip() for part in line.split("|"))
            if len(left) != len(right) or set(left + right) - {"0", "1"}:
                raise ValueError(f"line {lineno}: halves must be equal-length 0/1 strings")
            xs.append([int(c) for c in left])
            zs.append([int(c) for c in right])
        if not xs:
            raise ValueError("no generator rows found")
        if len({len(r) for r in xs}) != 1:
            raise ValueError("rows have different lengths")
        return cls(np.array(xs), np.array(zs))

    def to_text(self) -> str:
        return "".join(
            "".join(map(str, x)) + "|" + "".join(map(str, z)) + "\n"
            for x, z in zip(self.x_part, self.z_part)
        )


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    n: int
    k: int
    d: int
    generators: GeneratorMatrix
    logical_x: tuple[PauliOperator, ...]
    logical_z: tuple[PauliOperator, ...]
    codewords: tuple[StateVector, ...] = field(repr=False)

    @classmethod
    def from_generators(
        cls,
        generators: GeneratorMatrix,
        logical_x: Sequence[PauliOperator],
        logical_z: Sequence[PauliOperator],
        d: int,
    ) -> StabilizerCode:
        """Build the code and its basis codewords ``Xbar^b |0_L>`` with ``|0_L> ~ P |0...0>``."""
        n = generators.n
        k = n - generators.n_rows
        logical_x, logical_z = tuple(logical_x), tuple(logical_z)
        if len(logical_x) != k or len(logical_z) != k:
            raise ValueError(f"need {k} logical X and Z operators")
        gens = generators.paulis()
        for op in logical_x + logical_z:
            if not all(op.commutes(g) for g in gens):
                raise ValueError(f"logical operator {op} does not commute with the stabilizer")
        for i, xi in enumerate(logical_x):
            for j, zj in enumerate(logical_z):
                if xi.commutes(zj) == (i == j):
                    raise ValueError("logical operators do not satisfy the Pauli algebra")
        if n > 16:
            raise ValueError("codeword construction is limited to n <= 16")
        vec = StateVector.zeros(n).tensor.copy()
        for g in gens:
            vec = 0.5 * (vec + apply_pauli(_raw(vec), g).tensor)
        norm = np.linalg.norm(vec)
        if norm < 1e-9:
            raise ValueError("the all-zeros state is orthogonal to the code space")
        zero = StateVector(vec / norm)
        for z in logical_z:
            if abs(np.vdot(zero.tensor, apply_pauli(zero, z).tensor) - 1) > 1e-9:
                raise ValueError("projected |0...0> is not a +1 eigenstate of the logical Z operators")
        words = []
        for bits in itertools.product((0, 1), repeat=k):
            word = zero
            for b, xop in zip(bits, logical_x):
                if b:
                    word = apply_pauli(word, xop)
            words.append(word)
        return cls(n, k, d, generators, logical_x, logical_z, tuple(words))

    def generator_paulis(self) -> tuple[PauliOperator, ...]:
        return self.generators.paulis()

    @property
    def n_checks(self) -> int:
        return self.n - self.k

    @functools.cached_property
    def is_css(self) -> bool:
        xg, zg = self.generators.x_part, self.generators.z_part
        return not np.any(xg.any(axis=1) & zg.any(axis=1))

    def stabilizer_group(self) -> list[PauliOperator]:
        """All ``2**(n-k)`` stabilizer elements (signs as products of the generators)."""
        group = [PauliOperator.identity(self.n)]
        for g in self.generator_paulis():
            group += [h * g for h in group]
        return group

    def stabilizer_equivalent(self, a: PauliOperator, b: PauliOperator) -> bool:
        """True if ``a`` and ``b`` differ by a stabilizer element (phases ignored)."""
        diff = a * b
        if any(syndrome(self, diff)):
            return False
        return all(diff.commutes(op) for op in self.logical_x + self.logical_z)

    def min_weight_representative(self, op: PauliOperator) -> PauliOperator:
        return min((op * s for s in self.stabilizer_group()), key=lambda p: (p.weight, p.x, p.z))

    def encode_state(self, amplitudes: Sequence[complex]) -> StateVector:
        """``sum_b a_b |b_L>`` for a normalised ``2**k`` amplitude vector."""
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.shape != (1 << self.k,):
            raise ValueError(f"need {1 << self.k} amplitudes")
        vec = sum(a * w.tensor for a, w in zip(amps, self.codewords))
        return StateVector(vec)


def _raw(vec: np.ndarray) -> StateVector:
    # unnormalised intermediate of the projector product
    return StateVector._trusted(vec, tuple(range(vec.ndim)))


def _rows_from_patterns(patterns: Sequence[str]) -> np.ndarray:
    return np.array([[int(c) for c in p] for p in patterns], dtype=np.uint8)


@functools.lru_cache(maxsize=None)
def steane_code() -> StabilizerCode:
    """The [[7,1,3]] code: three X-type rows then three Z-type rows with Hamming patterns."""
    h = _rows_from_patterns(STEANE_PATTERNS)
    zeros = np.zeros_like(h)
    gm = GeneratorMatrix(np.vstack([h, zeros]), np.vstack([zeros, h]))
    return StabilizerCode.from_generators(
        gm,
        [PauliOperator.from_string("X" * 7)],
        [PauliOperator.from_string("Z" * 7)],
        d=3,
    )


def syndrome(code: StabilizerCode, error: PauliOperator) -> np.ndarray:
    """Bit ``i`` is 1 iff ``error`` anticommutes with generator ``i``."""
    if error.n != code.n:
        raise ValueError(f"error acts on {error.n} qubits, code has {code.n}")
    xg, zg = code.generators.x_part, code.generators.z_part
    return ((xg @ error.z_bits() + zg @ error.x_bits()) % 2).astype(np.uint8)


def _masks_by_weight(n: int):
    for w in range(n + 1):
        for support in itertools.combinations(range(n), w):
            yield sum(1 << j for j in support)


@functools.lru_cache(maxsize=32)
def _css_tables(code: StabilizerCode) -> tuple[list, list, dict, dict]:
    """Minimum-weight lookup: check-row syndrome -> error mask, one table per error type."""
    xg, zg = code.generators.x_part, code.generators.z_part
    x_rows = [i for i in range(code.n_checks) if xg[i].any()]
    z_rows = [i for i in range(code.n_checks) if zg[i].any()]
    x_table: dict[tuple, int] = {}
    z_table: dict[tuple, int] = {}
    for mask in _masks_by_weight(code.n):
        bits = np.array([(mask >> j) & 1 for j in range(code.n)], dtype=np.uint8)
        # X errors are seen by Z-type rows and vice versa
        x_table.setdefault(tuple((zg[z_rows] @ bits) % 2), mask)
        z_table.setdefault(tuple((xg[x_rows] @ bits) % 2), mask)
    return x_rows, z_rows, x_table, z_table


def decode_syndrome(code: StabilizerCode, bits: Sequence[int]) -> PauliOperator:
    """A minimum-weight Pauli with the given syndrome.

    CSS codes decode the bit-flip and phase-flip halves independently; for the
    Steane code each half is the binary index of the affected column.  Other
    codes fall back to a search over Paulis in order of weight.
    """
    s = np.asarray(bits, dtype=np.uint8) % 2
    if s.shape != (code.n_checks,):
        raise ValueError(f"syndrome must have {code.n_checks} bits")
    if not s.any():
        return PauliOperator.identity(code.n)
    if code.is_css:
        x_rows, z_rows, x_table, z_table = _css_tables(code)
        x_mask = x_table.get(tuple(s[z_rows]))
        z_mask = z_table.get(tuple(s[x_rows]))
        if x_mask is None or z_mask is None:
            raise ValueError("syndrome is not produced by any Pauli error")
        return PauliOperator(code.n, x_mask, z_mask, bin(x_mask & z_mask).count("1"))
    return _generic_decode(code, tuple(int(b) for b in s))


@functools.lru_cache(maxsize=1024)
def _generic_decode(code: StabilizerCode, s: tuple) -> PauliOperator:
    n = code.n
    for w in range(1, n + 1):
        for support in itertools.combinations(range(n), w):
            for kinds in itertools.product("XYZ", repeat=w):
                label = ["I"] * n
                for q, kind in zip(support, kinds):
                    label[q] = kind
                op = PauliOperator.from_string("".join(label))
                if tuple(int(b) for b in syndrome(code, op)) == s:
                    return op
    raise ValueError("syndrome is not produced by any Pauli error")


def correct(code: StabilizerCode, state: StateVector, error_syndrome: Sequence[int],
            qubits: Sequence | None = None) -> StateVector:
    """Apply the decoded correction for ``error_syndrome`` to a block of ``state``."""
    return apply_pauli(state, decode_syndrome(code, error_syndrome), qubits)


def single_qubit_errors(n: int) -> list[PauliOperator]:
    """All ``3n`` weight-one Paulis, qubit-major, X before Y before Z."""
    return [PauliOperator.single(n, q, kind) for q in range(n) for kind in "XYZ"]
