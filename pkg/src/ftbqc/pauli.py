"""Pauli operators as X/Z bit masks with an exact phase, and i.i.d. Pauli channels.

An operator on ``n`` qubits is stored as ``i**phase * prod_j X_j**x_j Z_j**z_j``
with bit ``j`` of ``x``/``z`` referring to qubit ``j`` (qubit 0 is the first
character of a Pauli string and the most significant axis of a state vector).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

_PHASE_LABELS = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliOperator:
    """An ``n``-qubit Pauli operator ``i**phase * X^x Z^z``."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError(f"masks do not fit in {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # construction -----------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> PauliOperator:
        """Weight-one operator ``kind`` in {"I", "X", "Y", "Z"} on ``qubit``."""
        if not 0 <= qubit < n:
            raise ValueError(f"qubit {qubit} out of range for n={n}")
        label = ["I"] * n
        label[qubit] = kind
        return cls.from_string("".join(label))

    @classmethod
    def from_string(cls, label: str) -> PauliOperator:
        """Parse strings such as ``"IXYZ"`` or ``"-iXZ"``; ``Y`` is Hermitian."""
        sign = 0
        body = label.strip()
        for prefix, p in (("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)):
            if body.startswith(prefix) and len(body) > len(prefix):
                sign = p
                body = body[len(prefix):]
                break
        x = z = 0
        ys = 0
        for j, ch in enumerate(body.upper()):
            if ch == "X":
                x |= 1 << j
            elif ch == "Z":
                z |= 1 << j
            elif ch == "Y":
                x |= 1 << j
                z |= 1 << j
                ys += 1
            elif ch != "I":
                raise ValueError(f"invalid Pauli character {ch!r}")
        # Y = i X Z, so each Y contributes one factor of i.
        return cls(len(body), x, z, sign + ys)

    @classmethod
    def from_bits(cls, x_bits: Iterable[int], z_bits: Iterable[int]) -> PauliOperator:
        """Hermitian operator from bit vectors (Y wherever both bits are set)."""
        xs = [int(b) & 1 for b in x_bits]
        zs = [int(b) & 1 for b in z_bits]
        if len(xs) != len(zs):
            raise ValueError("x and z bit vectors differ in length")
        x = sum(b << j for j, b in enumerate(xs))
        z = sum(b << j for j, b in enumerate(zs))
        return cls(len(xs), x, z, _popcount(x & z))

    # algebra ----------------------------------------------------------

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        if not isinstance(other, PauliOperator):
            return NotImplemented
        if other.n != self.n:
            raise ValueError("cannot multiply Paulis on different qubit counts")
        # Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
        swap = 2 * _popcount(self.z & other.x)
        return PauliOperator(
            self.n, self.x ^ other.x, self.z ^ other.z, self.phase + other.phase + swap
        )

    def commutes(self, other: PauliOperator) -> bool:
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return _popcount((self.x & other.z) ^ (self.z & other.x)) % 2 == 0

    def square_sign(self) -> int:
        """``P @ P == square_sign() * I``."""
        return 1 if (2 * self.phase + 2 * _popcount(self.x & self.z)) % 4 == 0 else -1

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(j for j in range(self.n) if mask >> j & 1)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def x_bits(self) -> np.ndarray:
        return np.array([(self.x >> j) & 1 for j in range(self.n)], dtype=np.uint8)

    def z_bits(self) -> np.ndarray:
        return np.array([(self.z >> j) & 1 for j in range(self.n)], dtype=np.uint8)

    def unsigned(self) -> PauliOperator:
        """Same masks with the Hermitian phase convention (sign dropped)."""
        return PauliOperator(self.n, self.x, self.z, _popcount(self.x & self.z))

    def equal_up_to_phase(self, other: PauliOperator) -> bool:
        return self.n == other.n and self.x == other.x and self.z == other.z

    def label(self) -> str:
        chars = []
        for j in range(self.n):
            xb, zb = (self.x >> j) & 1, (self.z >> j) & 1
            chars.append("IXZY"[xb + 2 * zb])
        rel = (self.phase - _popcount(self.x & self.z)) % 4
        prefix = "" if rel == 0 else _PHASE_LABELS[rel]
        return prefix + "".join(chars)

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix (small ``n`` only)."""
        single = {
            (0, 0): np.eye(2, dtype=complex),
            (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
            (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
        }
        single[(1, 1)] = single[(1, 0)] @ single[(0, 1)]
        out = np.ones((1, 1), dtype=complex)
        for j in range(self.n):
            out = np.kron(out, single[((self.x >> j) & 1, (self.z >> j) & 1)])
        return (1j ** self.phase) * out

    def __str__(self) -> str:
        return self.label()


@dataclass(frozen=True)
class PauliChannel:
    """Single-qubit Pauli channel; the identity takes the remaining probability."""

    px: float = 0.0
    py: float = 0.0
    pz: float = 0.0

    def __post_init__(self) -> None:
        for name, p in (("px", self.px), ("py", self.py), ("pz", self.pz)):
            if not np.isfinite(p) or p < 0:
                raise ValueError(f"{name} must be a non-negative probability, got {p}")
        if self.px + self.py + self.pz > 1 + 1e-12:
            raise ValueError("Pauli rates sum to more than one")

    @classmethod
    def depolarizing(cls, e: float) -> PauliChannel:
        """Every non-identity Pauli with probability ``e / 3``."""
        return cls(e / 3, e / 3, e / 3)

    @classmethod
    def from_rates(cls, rates: Mapping[PauliOperator | str, float]) -> PauliChannel:
        values = {"X": 0.0, "Y": 0.0, "Z": 0.0}
        for key, p in rates.items():
            label = key.label() if isinstance(key, PauliOperator) else key
            if label not in values:
                raise ValueError(f"channel keys must be non-identity single-qubit Paulis, got {label}")
            values[label] += p
        return cls(values["X"], values["Y"], values["Z"])

    @property
    def p_identity(self) -> float:
        return max(0.0, 1.0 - self.px - self.py - self.pz)

    @property
    def rates(self) -> dict[PauliOperator, float]:
        return {
            PauliOperator.from_string("X"): self.px,
            PauliOperator.from_string("Y"): self.py,
            PauliOperator.from_string("Z"): self.pz,
        }

    def probabilities(self) -> np.ndarray:
        """Probabilities of (I, X, Y, Z)."""
        p = np.array([self.p_identity, self.px, self.py, self.pz], dtype=float)
        return p / p.sum()


def _pack(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits.astype(np.uint8), bitorder="little").tobytes(), "little")


def sample_pauli_channel(
    channel: PauliChannel, n_qubits: int, rng: np.random.Generator
) -> PauliOperator:
    """Draw an ``n_qubits`` Pauli error, i.i.d. per qubit."""
    if n_qubits < 0:
        raise ValueError("n_qubits must be non-negative")
    draws = rng.choice(4, size=n_qubits, p=channel.probabilities())
    x = _pack((draws == 1) | (draws == 2))
    z = _pack((draws == 2) | (draws == 3))
    return PauliOperator(n_qubits, x, z, _popcount(x & z))
