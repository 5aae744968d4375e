import math

import numpy as np
import pytest

from ftbqc.brickwork import parse_circuit
from ftbqc.pauli import PauliChannel
from ftbqc.protocol import (
    GRID_STEP,
    Client,
    ClientSecrets,
    ComputationSpec,
    LogicalNoiseModel,
    MeasureReply,
    MeasureRequest,
    MessageChannel,
    QubitDelivery,
    actual_angle,
    analytic_blindness,
    blindness_stats,
    delta_angle,
    delta_bins,
    delta_preimages,
    parity_dependencies,
    run_concatenated,
    run_protocol,
    run_protocol_batch,
    unflip,
)
from ftbqc.resources import level_error

H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
BELL = parse_circuit("H 0\nCNOT 1 0")


def tv(counts, oracle):
    total = sum(counts.values())
    keys = set(counts) | set(oracle)
    return 0.5 * sum(abs(counts.get(k, 0) / total - oracle.get(k, 0)) for k in keys)


def wire_p0(phis):
    psi = np.ones(2) / math.sqrt(2)
    for p in phis[:-1]:
        psi = H @ np.diag([1, np.exp(-1j * p)]) @ psi
    bra = np.array([1, np.exp(-1j * phis[-1])]) / math.sqrt(2)
    return abs(np.vdot(bra, psi)) ** 2


def test_angle_helpers():
    assert actual_angle(0.3, 1, 0) == pytest.approx(2 * math.pi - 0.3)
    assert actual_angle(0.3, 0, 1) == pytest.approx(0.3 + math.pi)
    assert delta_angle(math.pi, math.pi / 2, 1) == pytest.approx(math.pi / 2)
    assert unflip(1, 1) == 0 and unflip(0, 1) == 1


def test_delta_preimages_are_uniform():
    for k in range(8):
        assert all(len(v) == 2 for v in delta_preimages(k * GRID_STEP).values())


def test_delta_bins_robust_at_edges():
    assert list(delta_bins(np.array([0.0, math.pi / 4 - 1e-12, 2 * math.pi - 1e-12]))) == [0, 1, 0]


def test_bell_matches_oracle():
    spec = ComputationSpec.from_circuit(BELL)
    res, ts = run_protocol_batch(spec, 10_000, rng=11)
    assert tv(res.counts(), BELL.output_distribution()) < 0.02
    assert len(ts) == 10_000
    assert res.server_peak_qubits <= 2 * spec.n + 1


def test_wire_matches_oracle():
    phis = [0.3, 1.7, 0.9, 2.2, 0.0]
    spec = ComputationSpec.wire(5, phis)
    res, _ = run_protocol_batch(spec, 20_000, rng=2)
    p0 = wire_p0(phis)
    assert res.distribution().get((0,), 0) == pytest.approx(p0, abs=4 * math.sqrt(p0 * (1 - p0) / 20_000))


def test_correct_for_any_fixed_secret():
    spec = ComputationSpec.from_circuit(BELL)
    for tk, r in [(0, 0), (3, 1), (7, 0)]:
        secrets = ClientSecrets.constant(spec.nodes, tk, r, runs=4000)
        res, _ = run_protocol_batch(spec, 4000, rng=tk, secrets=secrets)
        assert tv(res.counts(), BELL.output_distribution()) < 0.04


def test_reproducible():
    spec = ComputationSpec.from_circuit(BELL)
    a = run_protocol(spec, rng=5)[1]
    b = run_protocol(spec, rng=5)[1]
    assert a.to_text() == b.to_text()
    assert run_protocol(spec, rng=6)[1].to_text() != a.to_text()


def test_all_blocks_fail_at_unit_error():
    spec = ComputationSpec.from_circuit(BELL)
    _, ts = run_protocol_batch(spec, 50, LogicalNoiseModel(1.0), rng=1)
    assert ts.true_flips.all()


def test_flip_rate_matches_block_error():
    spec = ComputationSpec.wire(9)
    _, ts = run_protocol_batch(spec, 20_000, LogicalNoiseModel(0.05), rng=3)
    n = ts.true_flips.size
    assert abs(ts.flip_rate() - 0.05) < 4 * math.sqrt(0.05 * 0.95 / n)


def test_per_node_noise():
    spec = ComputationSpec.wire(3)
    noise = LogicalNoiseModel(0.0, {(2, 1): 1.0})
    _, ts = run_protocol_batch(spec, 100, noise, rng=0)
    assert ts.true_flips[:, 1].all() and not ts.true_flips[:, [0, 2]].any()


def test_concatenated_run_records_level():
    spec = ComputationSpec.from_circuit(BELL)
    res, tr = run_concatenated(spec, None, 2, 0.01, rng=4)
    assert tr.level == 2 and tr.e0 == 0.01
    assert tr.noise.e_block == pytest.approx(level_error(0.01, 2))
    assert tr.to_text().startswith("# seed=4 level=2 e0=0.01")
    with pytest.raises(ValueError):
        run_concatenated(spec, None, 5, 0.01)


def test_transcript_lines():
    spec = ComputationSpec.wire(4, [0.5, 0, 0, 0])
    _, tr = run_protocol(spec, rng=9)
    lines = tr.to_text().splitlines()
    assert len(lines) == 1 + 4
    x, y, d, raw, s = lines[1].split()
    assert (x, y) == ("1", "1") and 0 <= float(d) < 2 * math.pi and raw in "01" and s in "01"


def test_messages_only_carry_angles_and_bits():
    ch = MessageChannel()
    with pytest.raises(TypeError):
        ch.send_up(MeasureRequest((1, 1), np.zeros(1)))
    with pytest.raises(TypeError):
        ch.send_down(MeasureReply((1, 1), np.zeros(1)))
    ch.send_down(QubitDelivery((1, 1), np.ones((1, 2)) / math.sqrt(2)))
    assert ch.log == [("down", "QubitDelivery", (1, 1))]


def test_client_refuses_out_of_order_request():
    spec = ComputationSpec.wire(3)
    client = Client(spec, ClientSecrets.constant(spec.nodes))
    with pytest.raises(ValueError):
        client.request((2, 1), MessageChannel())


def test_parity_dependencies():
    spec = ComputationSpec.wire(4)
    assert parity_dependencies(spec, {(1, 1): 1, (2, 1): 1}, (3, 1)) == (1, 1)
    with pytest.raises(KeyError):
        parity_dependencies(spec, {}, (3, 1))


def test_dependency_violation_rejected():
    spec = ComputationSpec.wire(3)
    bad = dict(spec.x_deps)
    bad[(2, 1)] = frozenset({(3, 1)})
    with pytest.raises(ValueError):
        ComputationSpec(spec.n, spec.m, spec.phi, bad, spec.z_deps, spec.outputs, spec.graph)


def test_secret_validation(rng):
    nodes = ComputationSpec.wire(2).nodes
    with pytest.raises(ValueError):
        ClientSecrets(nodes, np.array([[8, 0]]), np.array([[0, 0]]))
    with pytest.raises(ValueError):
        ClientSecrets(nodes, np.array([[0, 0]]), np.array([[2, 0]]))
    assert ClientSecrets.sample(nodes, rng, 5).runs == 5


def test_statistical_blindness():
    spec = ComputationSpec.from_circuit(BELL)
    _, ts = run_protocol_batch(spec, 20_000, rng=8)
    rep = blindness_stats(ts, tv_threshold=0.03)
    assert rep.max_tv < 0.03 and rep.flagged == ()
    assert rep.samples == 20_000


def test_analytic_blindness():
    dists, worst = analytic_blindness()
    assert dists.max() < 1e-12
    assert worst < 1e-12


def test_blindness_needs_data():
    with pytest.raises(ValueError):
        blindness_stats([])


def test_physical_block_mode_matches_wire_oracle():
    phis = [0.3, 1.7, 0.0]
    spec = ComputationSpec.wire(3, phis)
    zeros = sum(run_protocol(spec, mode="physical-block", rng=s)[0].bits[0] == 0 for s in range(150))
    p0 = wire_p0(phis)
    assert abs(zeros / 150 - p0) < 4 * math.sqrt(p0 * (1 - p0) / 150)


def test_physical_block_corrects_injected_noise():
    spec = ComputationSpec.wire(3, [0.0, 0.0, 0.0])
    assert wire_p0([0.0, 0.0, 0.0]) == pytest.approx(1.0)  # noiseless output is always 0
    outs = [
        run_protocol(spec, mode="physical-block", rng=s, physical_noise=PauliChannel(0.02, 0, 0.02))[0].bits[0]
        for s in range(40)
    ]
    assert sum(outs) <= 2


def test_physical_block_rejects_batches():
    spec = ComputationSpec.wire(2)
    with pytest.raises(ValueError):
        run_protocol(spec, ClientSecrets.constant(spec.nodes, runs=2), mode="physical-block")


def test_unit_error_on_one_node_flips_only_that_report():
    spec = ComputationSpec.from_circuit(BELL)
    target = spec.nodes[7]
    j = spec.nodes.index(target)
    _, clean = run_protocol(spec, rng=21)
    _, noisy = run_protocol(spec, noise=LogicalNoiseModel(0.0, {target: 1.0}), rng=21)
    assert (clean.raw[:j] == noisy.raw[:j]).all()
    assert noisy.raw[j] == 1 - clean.raw[j]


def test_level_zero_matches_plain_noise_run():
    spec = ComputationSpec.from_circuit(BELL)
    _, a = run_concatenated(spec, None, 0, 0.2, rng=13)
    _, b = run_protocol(spec, noise=LogicalNoiseModel(0.2), rng=13)
    assert (a.raw == b.raw).all() and (a.delta == b.delta).all()
