import numpy as np
import pytest
from hypothesis import given, strategies as st

from ftbqc.pauli import PauliChannel, PauliOperator, sample_pauli_channel

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0 + 0j, -1.0])

labels = st.integers(1, 3).flatmap(
    lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n))
)


def dense(label):
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, {"I": np.eye(2), "X": X, "Y": Y, "Z": Z}[ch])
    return out


def test_y_is_hermitian_y():
    assert np.allclose(PauliOperator.from_string("Y").to_matrix(), Y)
    assert PauliOperator.from_string("Y").label() == "Y"


@given(labels)
def test_product_matches_matrices(pair):
    a, b = (PauliOperator.from_string(s) for s in pair)
    assert np.allclose((a * b).to_matrix(), dense(pair[0]) @ dense(pair[1]))


@given(labels)
def test_commutation_matches_matrices(pair):
    a, b = (PauliOperator.from_string(s) for s in pair)
    ma, mb = dense(pair[0]), dense(pair[1])
    assert a.commutes(b) == np.allclose(ma @ mb, mb @ ma)


@given(st.text("IXYZ", min_size=1, max_size=4), st.sampled_from(["", "-", "i", "-i"]))
def test_square_sign(label, prefix):
    p = PauliOperator.from_string(prefix + label)
    m = p.to_matrix()
    assert np.allclose(m @ m, p.square_sign() * np.eye(m.shape[0]))


def test_signed_labels_round_trip():
    for s in ["-XZ", "+iXX", "-iYZ", "XYZ"]:
        assert PauliOperator.from_string(s).label() == s


def test_weight_support_bits():
    p = PauliOperator.from_string("IXIYZ")
    assert p.weight == 3
    assert p.support == (1, 3, 4)
    assert list(p.x_bits()) == [0, 1, 0, 1, 0]
    assert list(p.z_bits()) == [0, 0, 0, 1, 1]
    assert PauliOperator.from_bits(p.x_bits(), p.z_bits()).equal_up_to_phase(p)


def test_bad_input():
    with pytest.raises(ValueError):
        PauliOperator.from_string("XQ")
    with pytest.raises(ValueError):
        PauliOperator.single(3, 3, "X")
    with pytest.raises(ValueError):
        PauliOperator.from_string("X").commutes(PauliOperator.from_string("XX"))


def test_channel_probabilities():
    ch = PauliChannel.depolarizing(0.3)
    assert np.allclose(ch.probabilities(), [0.7, 0.1, 0.1, 0.1])
    assert PauliChannel.from_rates({"X": 0.2, "Z": 0.1}) == PauliChannel(0.2, 0, 0.1)
    with pytest.raises(ValueError):
        PauliChannel(0.6, 0.6, 0)
    with pytest.raises(ValueError):
        PauliChannel(-0.1)


def test_channel_sampling_frequencies(rng):
    ch = PauliChannel(0.1, 0.05, 0.2)
    counts = {"I": 0, "X": 0, "Y": 0, "Z": 0}
    for _ in range(400):
        for ch_label in sample_pauli_channel(ch, 50, rng).label():
            counts[ch_label] += 1
    total = 20_000
    for key, p in zip("IXYZ", ch.probabilities()):
        assert abs(counts[key] / total - p) < 4 * np.sqrt(p * (1 - p) / total)


def test_sampled_operators_are_hermitian(rng):
    for _ in range(20):
        p = sample_pauli_channel(PauliChannel.depolarizing(0.5), 4, rng)
        m = p.to_matrix()
        assert np.allclose(m, m.conj().T)
