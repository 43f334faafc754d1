import numpy as np
import pytest

from factorforge.basis import (
    FactorBasis,
    basis_io,
    compute_basis,
    decode_basis,
    encode_basis,
    load_basis,
    save_basis,
)
from factorforge.errors import FormatError, InvalidArgumentError, InvalidInputError
from factorforge.matcore import gram

from oracles import power_iteration_deflation


def test_diagonal_weights():
    b = compute_basis(np.diag([3.0, 2.0, 1.0]), 2)
    assert b.eigenvalues.tolist() == [9.0, 4.0]
    assert np.array_equal(b.directions, np.eye(3)[:, :2])


def test_identity_stable_order():
    b = compute_basis(np.eye(5))
    assert b.k == 5 and b.dim == 5
    assert b.eigenvalues.tolist() == [1.0] * 5
    assert np.array_equal(b.directions, np.eye(5))


def test_random_against_deflation_oracle(backend, rng):
    W = rng.uniform(-1, 1, (6, 6))
    b = compute_basis(W, 6)
    S = W.T @ W
    ref, _ = power_iteration_deflation(S)
    np.testing.assert_allclose(b.eigenvalues, ref, rtol=1e-7)
    scale = max(1.0, b.eigenvalues[0])
    for lam, f in zip(b.eigenvalues, b.directions.T):
        assert np.linalg.norm(S @ f - lam * f) <= 1e-8 * scale


def test_default_k_is_full_dimension(rng):
    W = rng.standard_normal((9, 4))
    assert compute_basis(W).k == 4


def test_rectangular_weights(rng):
    b = compute_basis(rng.standard_normal((3, 5)))
    # rank 3, so two eigenvalues are (clamped) zeros
    assert b.k == 5
    assert np.all(b.eigenvalues >= 0.0)
    assert b.eigenvalues[3] <= 1e-12 and b.eigenvalues[4] <= 1e-12


@pytest.mark.parametrize("k", [0, 4, -1, 1.5, True])
def test_k_out_of_range(k):
    with pytest.raises(InvalidArgumentError):
        compute_basis(np.eye(3), k)


def test_non_finite_weights():
    with pytest.raises(InvalidInputError):
        compute_basis([[1.0, np.inf], [0.0, 1.0]])


@pytest.mark.parametrize("k", [1, 3, 5])
def test_span_property(rng, k):
    W = rng.standard_normal((8, 8))
    lam, V = np.linalg.eigh(gram(W))
    top = V[:, ::-1][:, :k]
    F = compute_basis(W, k).directions
    for v in top.T:
        assert abs(np.linalg.norm(F.T @ v) - 1.0) <= 1e-8


def test_prefix_property(rng):
    W = rng.standard_normal((10, 7))
    full = compute_basis(W)
    assert np.min(-np.diff(full.eigenvalues)) > 1e-8
    for k in range(1, 8):
        part = compute_basis(W, k)
        assert np.array_equal(part.directions, full.directions[:, :k])
        assert np.array_equal(part.eigenvalues, full.eigenvalues[:k])


def test_basis_is_read_only(rng):
    b = compute_basis(rng.standard_normal((4, 4)))
    with pytest.raises(ValueError):
        b.directions[0, 0] = 1.0


def test_constructor_rejects_non_orthonormal():
    with pytest.raises(InvalidInputError):
        FactorBasis(np.array([[1.0, 1.0], [0.0, 1.0]]), [2.0, 1.0])


def test_constructor_rejects_ascending():
    with pytest.raises(InvalidInputError):
        FactorBasis(np.eye(2), [1.0, 2.0])


def test_constructor_rejects_negative():
    with pytest.raises(InvalidInputError):
        FactorBasis(np.eye(2), [1.0, -0.5])


class TestContainer:
    def test_round_trip_bitwise(self, tmp_path, rng):
        b = compute_basis(rng.standard_normal((12, 6)), 4)
        back = basis_io(b, tmp_path / "b.fcb")
        assert back.same_as(b)
        assert back.dim == 6 and back.k == 4

    def test_layout(self):
        b = compute_basis(np.diag([2.0, 1.0]), 1)
        raw = encode_basis(b)
        assert raw[:4] == b"FCB1"
        assert raw[4:12] == (2).to_bytes(4, "little") + (1).to_bytes(4, "little")
        assert np.frombuffer(raw[12:], "<f8").tolist() == [4.0, 1.0, 0.0]

    def test_wrong_magic(self, tmp_path):
        raw = bytearray(encode_basis(compute_basis(np.eye(3))))
        raw[:4] = b"FCK1"
        p = tmp_path / "bad.fcb"
        p.write_bytes(bytes(raw))
        with pytest.raises(FormatError):
            load_basis(p)

    def test_truncated(self, tmp_path):
        raw = encode_basis(compute_basis(np.eye(3)))
        p = tmp_path / "short.fcb"
        p.write_bytes(raw[:-8])
        with pytest.raises(FormatError):
            load_basis(p)

    def test_header_only(self):
        with pytest.raises(FormatError):
            decode_basis(b"FCB1\x01")

    def test_invalid_shape(self):
        with pytest.raises(FormatError):
            decode_basis(b"FCB1" + (2).to_bytes(4, "little") + (3).to_bytes(4, "little"))

    def test_corrupted_directions(self):
        raw = bytearray(encode_basis(compute_basis(np.eye(2))))
        raw[-8:] = np.float64(5.0).tobytes()
        with pytest.raises(FormatError):
            decode_basis(bytes(raw))

    def test_save_leaves_no_temp_files(self, tmp_path):
        save_basis(tmp_path / "b.fcb", compute_basis(np.eye(2)))
        assert [p.name for p in tmp_path.iterdir()] == ["b.fcb"]
