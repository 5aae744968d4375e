"""Circuit-level Steane encoding and transversal syndrome extraction.

The encoder puts the input on qubit 2, copies it onto qubits 4 and 5, then
fans each of the pivot qubits 3, 1, 0 (prepared in ``|+>``) out onto the
other qubits of its generator row.  Syndrome extraction follows the
ancilla-block scheme: a ``|+>_L`` block picks up bit flips through transversal
CNOTs from the data, a ``|0>_L`` block picks up phase flips through
transversal CNOTs into the data, and each ancilla is read out qubit by qubit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ftbqc.pauli import PauliOperator
from ftbqc.stabilizer import StabilizerCode, decode_syndrome, steane_code, syndrome
from ftbqc.statevector import (
    StateVector,
    apply_gate,
    apply_pauli,
    fidelity,
    measure_computational,
    measure_mdelta,
)

INPUT_QUBIT = 2
PIVOTS = (3, 1, 0)

# (control, target) pairs, 0-indexed; pivots are prepared in |+> beforehand.
ENCODING_CNOTS: tuple[tuple[int, int], ...] = (
    (2, 4), (2, 5),
    (3, 4), (3, 5), (3, 6),
    (1, 2), (1, 5), (1, 6),
    (0, 2), (0, 4), (0, 6),
)


def encoding_circuit() -> list[tuple[str, tuple[int, ...]]]:
    """Gate list of the encoder acting on ``input (x) |0>^6`` (input on qubit 2)."""
    gates: list[tuple[str, tuple[int, ...]]] = [("H", (p,)) for p in PIVOTS]
    gates += [("CNOT", pair) for pair in ENCODING_CNOTS]
    return gates


def encode_by_circuit(single: StateVector) -> StateVector:
    """``a|0> + b|1>  ->  a|0>_L + b|1>_L`` on qubits labelled 0..6."""
    if single.n != 1:
        raise ValueError("encoder input must be a single qubit")
    amps = single.vector
    psi = np.zeros((2,) * 7, dtype=complex)
    idx = [0] * 7
    psi[tuple(idx)] = amps[0]
    idx[INPUT_QUBIT] = 1
    psi[tuple(idx)] = amps[1]
    state = StateVector(psi)
    for gate, targets in encoding_circuit():
        state = apply_gate(state, gate, list(targets))
    return state


def logical_plus_theta(theta: float, code: StabilizerCode | None = None) -> StateVector:
    """``|+_theta>_L`` straight from the codewords."""
    code = code or steane_code()
    return code.encode_state([2 ** -0.5, 2 ** -0.5 * np.exp(1j * theta)])


@dataclass(frozen=True)
class SyndromeReadout:
    bits: np.ndarray
    bit_flip_raw: tuple[int, ...]
    phase_flip_raw: tuple[int, ...]
    state: StateVector


def _parity(rows: np.ndarray, raw: Sequence[int]) -> np.ndarray:
    return (rows @ np.asarray(raw, dtype=np.uint8)) % 2


def extract_syndrome(
    data: StateVector,
    rng: np.random.Generator | None = None,
    code: StabilizerCode | None = None,
    qubits: Sequence | None = None,
) -> SyndromeReadout:
    """Run both ancilla-block syndrome rounds on a code block.

    ``qubits`` picks the block out of a larger register (default: all of
    ``data``).  Each round adds one 7-qubit ancilla block, so a bare block
    peaks at 14 qubits.  The returned bits use the generator order of
    ``code`` (X-type rows first).
    """
    code = code or steane_code()
    data_labels = list(data.labels if qubits is None else qubits)
    if len(data_labels) != code.n:
        raise ValueError(f"data block needs {code.n} qubits")
    rng = rng if rng is not None else np.random.default_rng(0)
    n = code.n
    anc = [("syndrome-ancilla", j) for j in range(n)]
    xg, zg = code.generators.x_part, code.generators.z_part
    x_rows = [i for i in range(code.n_checks) if xg[i].any()]
    z_rows = [i for i in range(code.n_checks) if zg[i].any()]

    # bit flips: |+>_L ancilla, CNOT data -> ancilla, Z readout
    plus_l = logical_plus_theta(0.0, code).relabel(anc)
    state = data.kron(plus_l)
    for d, a in zip(data_labels, anc):
        state = apply_gate(state, "CNOT", [d, a])
    bit_raw = []
    for a in anc:
        s, state = measure_computational(state, a, rng)
        bit_raw.append(s)

    # phase flips: |0>_L ancilla, CNOT ancilla -> data, X readout
    zero_l = code.codewords[0].relabel(anc)
    state = state.kron(zero_l)
    for d, a in zip(data_labels, anc):
        state = apply_gate(state, "CNOT", [a, d])
    phase_raw = []
    for a in anc:
        s, state = measure_mdelta(state, a, 0.0, rng)
        phase_raw.append(s)

    bits = np.zeros(code.n_checks, dtype=np.uint8)
    bits[z_rows] = _parity(zg[z_rows], bit_raw)
    bits[x_rows] = _parity(xg[x_rows], phase_raw)
    return SyndromeReadout(bits, tuple(bit_raw), tuple(phase_raw), state)


@dataclass(frozen=True)
class CorrectionReport:
    error: PauliOperator
    circuit_syndrome: tuple[int, ...]
    algebraic_syndrome: tuple[int, ...]
    correction: PauliOperator
    fidelity_before: float
    fidelity_after: float
    beyond_distance: bool

    @property
    def syndromes_agree(self) -> bool:
        return self.circuit_syndrome == self.algebraic_syndrome


def correct_error(
    error: PauliOperator,
    theta: float = 0.0,
    rng: np.random.Generator | None = None,
    code: StabilizerCode | None = None,
) -> CorrectionReport:
    """Inject ``error`` into ``|+_theta>_L`` and undo it through the syndrome circuit."""
    code = code or steane_code()
    ideal = logical_plus_theta(theta, code)
    noisy = apply_pauli(ideal, error)
    readout = extract_syndrome(noisy, rng, code)
    correction = decode_syndrome(code, readout.bits)
    fixed = apply_pauli(readout.state, correction)
    return CorrectionReport(
        error=error,
        circuit_syndrome=tuple(int(b) for b in readout.bits),
        algebraic_syndrome=tuple(int(b) for b in syndrome(code, error)),
        correction=correction,
        fidelity_before=fidelity(ideal, noisy),
        fidelity_after=fidelity(ideal, fixed),
        beyond_distance=error.weight > (code.d - 1) // 2,
    )
