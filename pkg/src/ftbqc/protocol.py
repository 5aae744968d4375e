"""Blind delegated computation on a brickwork state.

The client knows the computation (angles ``phi`` and dependency sets) and
keeps secret a rotation ``theta`` and a flip bit ``r`` for every node.  It
ships one qubit ``|+_theta>`` per node, then for each node in column-major
order sends ``delta = phi' + theta + pi r`` and receives an outcome bit, which
it unflips with ``r``.  Client and server only interact through
:class:`MessageChannel`.

Two server back ends exist.  In logical-abstraction mode every node is one
simulated qubit and a logical block error is a Bernoulli flip of the reported
bit.  This back end is vectorised over many independent runs.  In
physical-block mode (single run) the cluster-state encoding pattern first
lifts each node's qubit into a Steane block.  Optional physical Pauli noise
is then corrected before a logical ``M(delta)`` reads the block out.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterator, Literal, Mapping, Sequence

import numpy as np

from ftbqc.brickwork import (
    Circuit,
    CompiledBrickwork,
    brickwork_graph,
    compile_circuit,
    flow_dependencies,
)
from ftbqc.encoding import extract_syndrome
from ftbqc.mbqc import encoding_pattern, execute_pattern
from ftbqc.pauli import PauliChannel, sample_pauli_channel
from ftbqc.stabilizer import decode_syndrome, steane_code
from ftbqc.statevector import (
    GraphSpec,
    StateVector,
    apply_cz,
    apply_pauli,
    logical_measure,
)

TWO_PI = 2 * math.pi
GRID = 8
GRID_STEP = math.pi / 4
Mode = Literal["logical-abstraction", "physical-block"]


def grid_angles() -> np.ndarray:
    return np.arange(GRID) * GRID_STEP


def actual_angle(phi: float, s_x: int, s_z: int) -> float:
    """``(-1)^sX phi + sZ pi`` reduced to ``[0, 2 pi)``."""
    return ((-1) ** (s_x & 1) * phi + (s_z & 1) * math.pi) % TWO_PI


def delta_angle(phi_prime: float, theta: float, r: int) -> float:
    return (phi_prime + theta + math.pi * (r & 1)) % TWO_PI


def unflip(raw: int, r: int) -> int:
    return (raw ^ r) & 1


# computation and secrets ------------------------------------------------------


@dataclass(frozen=True)
class ComputationSpec:
    n: int
    m: int
    phi: Mapping[tuple[int, int], float]
    x_deps: Mapping[tuple[int, int], frozenset]
    z_deps: Mapping[tuple[int, int], frozenset]
    outputs: tuple
    graph: GraphSpec = field(compare=False, repr=False)

    def __post_init__(self) -> None:
        self.validate()

    @property
    def nodes(self) -> tuple:
        """Measurement order: column by column, top row first."""
        return self.graph.nodes

    def validate(self) -> None:
        known = set(self.graph.nodes)
        for v in self.graph.nodes:
            if v not in self.phi:
                raise ValueError(f"node {v} has no angle")
            for u in self.x_deps.get(v, frozenset()) | self.z_deps.get(v, frozenset()):
                if u not in known:
                    raise ValueError(f"node {v} depends on unknown node {u}")
                if u[0] >= v[0]:
                    raise ValueError(f"dependency {u} of {v} is not in an earlier column")
        if not set(self.outputs) <= known:
            raise ValueError("output nodes must be brickwork nodes")

    @classmethod
    def from_angles(cls, n: int, m: int, angles: Mapping, *, strict: bool = False) -> ComputationSpec:
        graph = brickwork_graph(n, m, strict=strict)
        xdeps, zdeps = flow_dependencies(n, m)
        outputs = tuple((m, y) for y in range(1, n + 1))
        phi = {v: float(angles.get(v, 0.0)) for v in graph.nodes}
        return cls(n, m, phi, xdeps, zdeps, outputs, graph)

    @classmethod
    def from_compiled(cls, compiled: CompiledBrickwork) -> ComputationSpec:
        return cls.from_angles(compiled.n, compiled.m, compiled.angles, strict=compiled.n % 2 == 0)

    @classmethod
    def from_circuit(cls, circuit: Circuit, *, allow_swaps: bool = False) -> ComputationSpec:
        return cls.from_compiled(compile_circuit(circuit, allow_swaps=allow_swaps))

    @classmethod
    def wire(cls, m: int, phis: Sequence[float] | None = None) -> ComputationSpec:
        """One-row brickwork (a plain MBQC wire)."""
        phis = list(phis or [0.0] * m)
        if len(phis) != m:
            raise ValueError("need one angle per column")
        return cls.from_angles(1, m, {(x + 1, 1): p for x, p in enumerate(phis)})


@dataclass(frozen=True)
class ClientSecrets:
    """Per-run, per-node ``theta = k pi/4`` (stored as ``k``) and flip bits ``r``.

    Arrays have shape ``(runs, nodes)``.
    """

    nodes: tuple
    theta_k: np.ndarray
    r: np.ndarray

    def __post_init__(self) -> None:
        tk = np.atleast_2d(np.asarray(self.theta_k, dtype=np.int64))
        r = np.atleast_2d(np.asarray(self.r, dtype=np.uint8))
        if tk.shape != r.shape or tk.shape[1] != len(self.nodes):
            raise ValueError("secret arrays must have shape (runs, nodes)")
        if tk.min(initial=0) < 0 or tk.max(initial=0) >= GRID:
            raise ValueError("theta indices must lie in 0..7")
        if r.max(initial=0) > 1:
            raise ValueError("r must be a bit")
        object.__setattr__(self, "theta_k", tk)
        object.__setattr__(self, "r", r)

    @property
    def runs(self) -> int:
        return self.theta_k.shape[0]

    @property
    def theta(self) -> np.ndarray:
        return self.theta_k * GRID_STEP

    @classmethod
    def sample(cls, nodes: Sequence, rng: np.random.Generator, runs: int = 1) -> ClientSecrets:
        nodes = tuple(nodes)
        tk = rng.integers(0, GRID, size=(runs, len(nodes)))
        r = rng.integers(0, 2, size=(runs, len(nodes)))
        return cls(nodes, tk, r)

    @classmethod
    def constant(cls, nodes: Sequence, theta_k: int = 0, r: int = 0, runs: int = 1) -> ClientSecrets:
        shape = (runs, len(tuple(nodes)))
        return cls(tuple(nodes), np.full(shape, theta_k), np.full(shape, r))

    def run(self, i: int) -> ClientSecrets:
        return ClientSecrets(self.nodes, self.theta_k[i : i + 1], self.r[i : i + 1])


@dataclass(frozen=True)
class LogicalNoiseModel:
    """Probability that a node's reported logical outcome is flipped."""

    e_block: float = 0.0
    per_node: Mapping[Hashable, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for p in [self.e_block, *self.per_node.values()]:
            if not 0 <= p <= 1:
                raise ValueError("flip probabilities must lie in [0, 1]")

    def rate(self, node: Hashable) -> float:
        return self.per_node.get(node, self.e_block)


def parity_dependencies(spec: ComputationSpec, history: Mapping, node) -> tuple[int, int]:
    """``(sX, sZ)``: parities of measured (unflipped) outcomes over the node's dependency sets."""

    def par(deps):
        total = 0
        for u in deps:
            if u not in history:
                raise KeyError(f"dependency {u} of {node} has not been measured")
            total ^= int(history[u])
        return total

    return par(spec.x_deps.get(node, ())), par(spec.z_deps.get(node, ()))


# messages ---------------------------------------------------------------------


@dataclass(frozen=True)
class QubitDelivery:
    """Stands in for the quantum channel: amplitudes of one qubit per run."""

    node: Hashable
    amplitudes: np.ndarray  # (runs, 2)


@dataclass(frozen=True)
class MeasureRequest:
    node: Hashable
    delta: np.ndarray  # (runs,)


@dataclass(frozen=True)
class MeasureReply:
    node: Hashable
    s: np.ndarray  # (runs,) reported bits


class MessageChannel:
    """Two FIFO queues; only deliveries and angles go down, only bits come up."""

    _DOWN = (QubitDelivery, MeasureRequest)
    _UP = (MeasureReply,)

    def __init__(self) -> None:
        self._down: deque = deque()
        self._up: deque = deque()
        self.log: list[tuple[str, str, Hashable]] = []

    def send_down(self, msg) -> None:
        if not isinstance(msg, self._DOWN):
            raise TypeError(f"{type(msg).__name__} may not travel client -> server")
        self.log.append(("down", type(msg).__name__, msg.node))
        self._down.append(msg)

    def send_up(self, msg) -> None:
        if not isinstance(msg, self._UP):
            raise TypeError(f"{type(msg).__name__} may not travel server -> client")
        self.log.append(("up", type(msg).__name__, msg.node))
        self._up.append(msg)

    def recv_down(self):
        return self._down.popleft()

    def recv_up(self):
        return self._up.popleft()

    def pending_down(self) -> bool:
        return bool(self._down)


# client -----------------------------------------------------------------------


class Client:
    def __init__(self, spec: ComputationSpec, secrets: ClientSecrets) -> None:
        if tuple(secrets.nodes) != tuple(spec.nodes):
            raise ValueError("secrets must cover the computation's nodes in measurement order")
        self.spec = spec
        self.secrets = secrets
        self.col = {v: i for i, v in enumerate(spec.nodes)}
        runs, n_nodes = secrets.theta_k.shape
        self.delta = np.zeros((runs, n_nodes))
        self.raw = np.zeros((runs, n_nodes), dtype=np.uint8)
        self.s = np.zeros((runs, n_nodes), dtype=np.uint8)
        self.measured: set = set()

    def deliver_qubits(self, channel: MessageChannel) -> None:
        theta = self.secrets.theta
        for v in self.spec.nodes:
            t = theta[:, self.col[v]]
            amps = np.stack([np.full_like(t, 2**-0.5, dtype=complex), 2**-0.5 * np.exp(1j * t)], axis=1)
            channel.send_down(QubitDelivery(v, amps))

    def _parity(self, deps) -> np.ndarray:
        out = np.zeros(self.s.shape[0], dtype=np.uint8)
        for u in deps:
            if u not in self.measured:
                raise ValueError(f"dependency {u} has not been measured yet")
            out ^= self.s[:, self.col[u]]
        return out

    def request(self, node, channel: MessageChannel) -> None:
        j = self.col[node]
        sx = self._parity(self.spec.x_deps.get(node, ()))
        sz = self._parity(self.spec.z_deps.get(node, ()))
        phi = self.spec.phi[node]
        phi_p = (np.where(sx, -phi, phi) + sz * math.pi) % TWO_PI
        delta = (phi_p + self.secrets.theta[:, j] + math.pi * self.secrets.r[:, j]) % TWO_PI
        self.delta[:, j] = delta
        channel.send_down(MeasureRequest(node, delta))

    def receive(self, channel: MessageChannel) -> None:
        reply = channel.recv_up()
        j = self.col[reply.node]
        self.raw[:, j] = reply.s
        self.s[:, j] = reply.s ^ self.secrets.r[:, j]
        self.measured.add(reply.node)

    def outputs(self) -> np.ndarray:
        return self.s[:, [self.col[o] for o in self.spec.outputs]]


# servers ----------------------------------------------------------------------


class _BatchRegister:
    """State vectors of many independent runs sharing one qubit layout."""

    def __init__(self, runs: int) -> None:
        self.psi = np.ones((runs,), dtype=complex)
        self.labels: list = []

    def add(self, label, amps: np.ndarray) -> None:
        self.psi = self.psi[..., None] * amps.reshape((amps.shape[0],) + (1,) * len(self.labels) + (2,))
        self.labels.append(label)

    def axis(self, label) -> int:
        return 1 + self.labels.index(label)

    def cz(self, a, b) -> None:
        idx = [slice(None)] * self.psi.ndim
        idx[self.axis(a)] = 1
        idx[self.axis(b)] = 1
        self.psi[tuple(idx)] *= -1

    def measure(self, label, delta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        ax = self.axis(label)
        a0 = np.take(self.psi, 0, axis=ax)
        a1 = np.take(self.psi, 1, axis=ax)
        shape = (-1,) + (1,) * (a0.ndim - 1)
        ph = np.exp(-1j * delta).reshape(shape)
        b0 = (a0 + ph * a1) * 2**-0.5
        b1 = (a0 - ph * a1) * 2**-0.5
        axes = tuple(range(1, a0.ndim))
        p0 = np.sum(np.abs(b0) ** 2, axis=axes) if axes else np.abs(b0) ** 2
        p1 = np.sum(np.abs(b1) ** 2, axis=axes) if axes else np.abs(b1) ** 2
        total = p0 + p1
        s = (rng.random(len(delta)) * total >= p0).astype(np.uint8)
        keep = np.where(s.reshape(shape).astype(bool), b1, b0)
        norm = np.sqrt(np.where(s == 1, p1, p0)).reshape(shape)
        self.psi = keep / norm
        self.labels.remove(label)
        return s


class _Server:
    """Shared server logic: build the graph state lazily and answer measurement requests."""

    def __init__(self, graph: GraphSpec, noise: LogicalNoiseModel, rng_meas, rng_noise) -> None:
        self.graph = graph
        self.noise = noise
        self.rng_meas = rng_meas
        self.rng_noise = rng_noise
        self.inbox: dict = {}
        self.present: set = set()
        self.measured: set = set()
        self.flips: dict = {}
        self.peak = 0

    def serve(self, channel: MessageChannel) -> None:
        while channel.pending_down():
            msg = channel.recv_down()
            if isinstance(msg, QubitDelivery):
                self.inbox[msg.node] = msg.amplitudes
            else:
                channel.send_up(MeasureReply(msg.node, self.measure(msg.node, msg.delta)))

    def _ensure(self, v) -> None:
        if v in self.present:
            return
        if v not in self.inbox:
            raise RuntimeError(f"no qubit was delivered for node {v}")
        self._attach(v, self.inbox.pop(v))
        for w in self.graph.neighbors(v):
            if w in self.present and w not in self.measured:
                self._cz(v, w)
        self.present.add(v)

    def measure(self, v, delta: np.ndarray) -> np.ndarray:
        if v in self.measured:
            raise RuntimeError(f"node {v} was already measured")
        self._ensure(v)
        for w in self.graph.neighbors(v):
            self._ensure(w)
        s = self._measure(v, delta)
        self.measured.add(v)
        flip = (self.rng_noise.random(len(delta)) < self.noise.rate(v)).astype(np.uint8)
        self.flips[v] = flip
        return s ^ flip


class LogicalServer(_Server):
    def __init__(self, graph, noise, rng_meas, rng_noise, runs: int) -> None:
        super().__init__(graph, noise, rng_meas, rng_noise)
        self.reg = _BatchRegister(runs)

    def _attach(self, v, amps) -> None:
        self.reg.add(v, amps)
        self.peak = max(self.peak, len(self.reg.labels))

    def _cz(self, a, b) -> None:
        self.reg.cz(a, b)

    def _measure(self, v, delta):
        return self.reg.measure(v, delta, self.rng_meas)


class PhysicalBlockServer(_Server):
    """Single-run server that measures every node as a Steane block."""

    def __init__(self, graph, noise, rng_meas, rng_noise, rng_pattern,
                 physical_noise: PauliChannel | None = None, correct: bool = True) -> None:
        super().__init__(graph, noise, rng_meas, rng_noise)
        self.rng_pattern = rng_pattern
        self.state = StateVector.empty()
        self.physical_noise = physical_noise
        self.correct = correct
        self.pattern = encoding_pattern()
        self.code = steane_code()
        self.syndromes: dict = {}

    def _attach(self, v, amps) -> None:
        if amps.shape[0] != 1:
            raise ValueError("physical-block mode simulates one run at a time")
        self.state = self.state.kron(StateVector(amps[0], [v]))
        self.peak = max(self.peak, self.state.n)

    def _cz(self, a, b) -> None:
        self.state = apply_cz(self.state, a, b)

    def _measure(self, v, delta):
        block = [("block", v, j) for j in range(self.code.n)]
        run = execute_pattern(self.pattern, self.state, v, self.rng_pattern, output_labels=block)
        state = run.state
        self.peak = max(self.peak, run.peak_qubits)
        if self.physical_noise is not None:
            err = sample_pauli_channel(self.physical_noise, self.code.n, self.rng_noise)
            state = apply_pauli(state, err, block)
            if self.correct:
                readout = extract_syndrome(state, self.rng_meas, self.code, qubits=block)
                state = apply_pauli(readout.state, decode_syndrome(self.code, readout.bits), block)
                self.syndromes[v] = tuple(int(b) for b in readout.bits)
        s, self.state = logical_measure(state, float(delta[0]), self.rng_meas, qubits=block, remove=True)
        return np.array([s], dtype=np.uint8)


# transcripts ------------------------------------------------------------------


@dataclass(frozen=True)
class Transcript:
    nodes: tuple
    delta: np.ndarray
    raw: np.ndarray
    unflipped: np.ndarray
    true_flips: np.ndarray
    seed: object
    noise: LogicalNoiseModel
    level: int | None
    e0: float | None
    n: int
    m: int
    mode: str

    def records(self) -> Iterator[tuple]:
        for v, d, raw, s in zip(self.nodes, self.delta, self.raw, self.unflipped):
            yield v[0], v[1], float(d), int(raw), int(s)

    def to_text(self) -> str:
        lv = "-" if self.level is None else self.level
        e0 = "-" if self.e0 is None else repr(self.e0)
        head = (f"# seed={self.seed} level={lv} e0={e0} e_block={self.noise.e_block!r} "
                f"rows={self.n} cols={self.m} mode={self.mode}\n")
        body = "".join(f"{x} {y} {d:.12f} {raw} {s}\n" for x, y, d, raw, s in self.records())
        return head + body


@dataclass(frozen=True)
class TranscriptSet:
    """Transcripts of many runs stored column-wise."""

    nodes: tuple
    delta: np.ndarray  # (runs, nodes)
    raw: np.ndarray
    unflipped: np.ndarray
    true_flips: np.ndarray
    seed: object
    noise: LogicalNoiseModel
    level: int | None
    e0: float | None
    n: int
    m: int
    mode: str

    def __len__(self) -> int:
        return self.delta.shape[0]

    def __getitem__(self, i: int) -> Transcript:
        return Transcript(self.nodes, self.delta[i], self.raw[i], self.unflipped[i],
                          self.true_flips[i], self.seed, self.noise, self.level, self.e0,
                          self.n, self.m, self.mode)

    def __iter__(self) -> Iterator[Transcript]:
        return (self[i] for i in range(len(self)))

    def flip_rate(self) -> float:
        return float(self.true_flips.mean())

    def to_text(self) -> str:
        return "".join(t.to_text() for t in self)


@dataclass(frozen=True)
class ProtocolResult:
    outputs: np.ndarray  # (runs, n_out) corrected output bits
    output_nodes: tuple
    server_peak_qubits: int

    @property
    def bits(self) -> tuple[int, ...]:
        """Output bits of the first (or only) run."""
        return tuple(int(b) for b in self.outputs[0])

    def counts(self) -> dict[tuple[int, ...], int]:
        keys, cnt = np.unique(self.outputs, axis=0, return_counts=True)
        return {tuple(int(b) for b in k): int(c) for k, c in zip(keys, cnt)}

    def distribution(self) -> dict[tuple[int, ...], float]:
        total = self.outputs.shape[0]
        return {k: c / total for k, c in self.counts().items()}


# drivers ----------------------------------------------------------------------


@dataclass(frozen=True)
class RunStreams:
    secrets: np.random.Generator
    measurement: np.random.Generator
    noise: np.random.Generator
    pattern: np.random.Generator
    seed: object


def make_streams(seed) -> RunStreams:
    """Split ``seed`` into independent child generators, one per consumer of randomness."""
    if isinstance(seed, RunStreams):
        return seed
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(0, 2**63))
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(4)
    label = ss.entropy if isinstance(seed, np.random.SeedSequence) else seed
    return RunStreams(*(np.random.default_rng(c) for c in children), seed=label)


def _execute(spec, secrets, noise, mode, streams, physical_noise=None, correct=True,
             level=None, e0=None):
    runs = secrets.runs
    channel = MessageChannel()
    client = Client(spec, secrets)
    if mode == "logical-abstraction":
        server: _Server = LogicalServer(spec.graph, noise, streams.measurement, streams.noise, runs)
    elif mode == "physical-block":
        if runs != 1:
            raise ValueError("physical-block mode runs one transcript at a time")
        server = PhysicalBlockServer(spec.graph, noise, streams.measurement, streams.noise,
                                     streams.pattern, physical_noise, correct)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    client.deliver_qubits(channel)
    server.serve(channel)
    for v in spec.nodes:
        client.request(v, channel)
        server.serve(channel)
        client.receive(channel)
    flips = np.stack([server.flips[v] for v in spec.nodes], axis=1)
    transcripts = TranscriptSet(spec.nodes, client.delta, client.raw, client.s, flips,
                                streams.seed, noise, level, e0, spec.n, spec.m, mode)
    result = ProtocolResult(client.outputs(), spec.outputs, server.peak)
    return result, transcripts


def run_protocol(
    spec: ComputationSpec,
    secrets: ClientSecrets | None = None,
    noise: LogicalNoiseModel | None = None,
    mode: Mode = "logical-abstraction",
    rng=0,
    *,
    physical_noise: PauliChannel | None = None,
    correct: bool = True,
) -> tuple[ProtocolResult, Transcript]:
    """One protocol run; ``rng`` accepts anything :func:`make_streams` does."""
    streams = make_streams(rng)
    secrets = secrets or ClientSecrets.sample(spec.nodes, streams.secrets)
    if secrets.runs != 1:
        raise ValueError("run_protocol takes single-run secrets; use run_protocol_batch")
    result, ts = _execute(spec, secrets, noise or LogicalNoiseModel(), mode, streams,
                          physical_noise, correct)
    return result, ts[0]


def run_protocol_batch(
    spec: ComputationSpec,
    runs: int,
    noise: LogicalNoiseModel | None = None,
    rng=0,
    *,
    secrets: ClientSecrets | None = None,
    level: int | None = None,
    e0: float | None = None,
) -> tuple[ProtocolResult, TranscriptSet]:
    """``runs`` independent logical-abstraction runs, simulated side by side."""
    streams = make_streams(rng)
    secrets = secrets or ClientSecrets.sample(spec.nodes, streams.secrets, runs)
    if secrets.runs != runs:
        raise ValueError("secrets do not match the requested run count")
    return _execute(spec, secrets, noise or LogicalNoiseModel(), "logical-abstraction",
                    streams, level=level, e0=e0)


def run_concatenated(
    spec: ComputationSpec,
    secrets: ClientSecrets | None,
    level: int,
    e0: float,
    rng=0,
    runs: int = 1,
):
    """Logical-abstraction run with block error ``e_level(e0)`` (exact recursion)."""
    from ftbqc.resources import MAX_LEVEL, level_error

    if not 0 <= level <= MAX_LEVEL:
        raise ValueError(f"level must lie in 0..{MAX_LEVEL}")
    noise = LogicalNoiseModel(level_error(e0, level))
    if runs == 1 and (secrets is None or secrets.runs == 1):
        streams = make_streams(rng)
        secrets = secrets or ClientSecrets.sample(spec.nodes, streams.secrets)
        result, ts = _execute(spec, secrets, noise, "logical-abstraction", streams, level=level, e0=e0)
        return result, ts[0]
    return run_protocol_batch(spec, runs, noise, rng, secrets=secrets, level=level, e0=e0)


# blindness diagnostics -----------------------------------------------------------


@dataclass(frozen=True)
class BlindnessReport:
    histograms: dict  # node -> counts over the 8 angle bins
    tv_distance: dict  # node -> total-variation distance from uniform
    max_tv: float
    flagged: tuple
    trace_distances: np.ndarray  # [delta_k, phi_i, phi_j]
    max_trace_distance: float
    max_distance_from_mixed: float
    samples: int


def delta_bins(delta: np.ndarray) -> np.ndarray:
    """Index of the ``pi/4`` bin holding each angle (robust to rounding at bin edges)."""
    return np.floor(np.asarray(delta) / GRID_STEP + 1e-7).astype(np.int64) % GRID


def tv_from_uniform(counts: np.ndarray) -> float:
    p = counts / counts.sum()
    return 0.5 * float(np.abs(p - 1 / len(counts)).sum())


def r_averaged_logical_state(delta: float, phi_prime: float) -> np.ndarray:
    """``1/2 sum_r |+_theta(r)>_L<.|`` with ``theta = delta - phi' - pi r``."""
    from ftbqc.encoding import logical_plus_theta

    rho = np.zeros((128, 128), dtype=complex)
    for r in (0, 1):
        psi = logical_plus_theta((delta - phi_prime - math.pi * r) % TWO_PI).vector
        rho += 0.5 * np.outer(psi, psi.conj())
    return rho


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


def analytic_blindness() -> tuple[np.ndarray, float]:
    """Pairwise trace distances of r-averaged states over the angle grid, and the worst
    distance from the maximally mixed logical state."""
    code = steane_code()
    zero, one = (w.vector for w in code.codewords)
    mixed = 0.5 * (np.outer(zero, zero.conj()) + np.outer(one, one.conj()))
    grid = grid_angles()
    dists = np.zeros((GRID, GRID, GRID))
    worst_mixed = 0.0
    for k, delta in enumerate(grid):
        rhos = [r_averaged_logical_state(delta, p) for p in grid]
        for i in range(GRID):
            worst_mixed = max(worst_mixed, trace_distance(rhos[i], mixed))
            for j in range(i + 1, GRID):
                dists[k, i, j] = dists[k, j, i] = trace_distance(rhos[i], rhos[j])
    return dists, worst_mixed


def blindness_stats(transcripts, tv_threshold: float = 0.05) -> BlindnessReport:
    """Per-node delta histograms and TV distance from uniform, plus the analytic trace-distance check."""
    if isinstance(transcripts, TranscriptSet):
        nodes, deltas = transcripts.nodes, transcripts.delta
    else:
        items = list(transcripts)
        if not items:
            raise ValueError("no transcripts given")
        nodes = items[0].nodes
        deltas = np.stack([t.delta for t in items])
    if deltas.shape[0] == 0:
        raise ValueError("no transcripts given")
    bins = delta_bins(deltas)
    hist, tv = {}, {}
    for j, v in enumerate(nodes):
        counts = np.bincount(bins[:, j], minlength=GRID)
        hist[v] = counts
        tv[v] = tv_from_uniform(counts)
    dists, worst_mixed = analytic_blindness()
    max_tv = max(tv.values())
    return BlindnessReport(
        histograms=hist,
        tv_distance=tv,
        max_tv=max_tv,
        flagged=tuple(v for v in nodes if tv[v] > tv_threshold),
        trace_distances=dists,
        max_trace_distance=float(dists.max()),
        max_distance_from_mixed=worst_mixed,
        samples=deltas.shape[0],
    )


def delta_preimages(phi_prime: float) -> dict[int, list[tuple[int, int]]]:
    """For fixed ``phi'``, the ``(theta_k, r)`` pairs landing on each delta bin."""
    out: dict[int, list] = {k: [] for k in range(GRID)}
    for tk in range(GRID):
        for r in (0, 1):
            d = delta_angle(phi_prime, tk * GRID_STEP, r)
            out[int(delta_bins(np.array([d]))[0])].append((tk, r))
    return out
