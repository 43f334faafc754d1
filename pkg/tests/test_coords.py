import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from factorforge.basis import FactorBasis, compute_basis
from factorforge.coords import project, project_batch, reconstruct, reconstruct_batch
from factorforge.errors import InvalidArgumentError
from factorforge.matcore import lstsq


@pytest.fixture
def full_basis(rng):
    return compute_basis(rng.standard_normal((10, 10)))


@pytest.fixture
def truncated_basis(rng):
    return compute_basis(rng.standard_normal((10, 10)), 4)


def test_identity_basis():
    b = FactorBasis(np.eye(3), [1.0, 1.0, 1.0])
    assert project(b, [1.0, 2.0, 3.0]).tolist() == [1.0, 2.0, 3.0]


def test_basis_aligned(full_basis):
    a = project(full_basis, 5 * full_basis.directions[:, 0])
    expected = np.zeros(10)
    expected[0] = 5.0
    np.testing.assert_allclose(a, expected, atol=1e-10)


def test_round_trip_matches_lstsq(full_basis, rng):
    w = rng.standard_normal(10)
    alpha = project(full_basis, w)
    np.testing.assert_allclose(alpha, lstsq(full_basis.directions, w), atol=1e-10)
    back = reconstruct(full_basis, alpha)
    assert np.linalg.norm(back - w) <= 1e-9 * np.linalg.norm(w)


def test_projection_never_grows(truncated_basis, rng):
    for _ in range(20):
        w = rng.standard_normal(10)
        assert np.linalg.norm(project(truncated_basis, w)) <= np.linalg.norm(w) + 1e-9


def test_reconstruct_zero_and_unit(truncated_basis):
    assert np.array_equal(reconstruct(truncated_basis, np.zeros(4)), np.zeros(10))
    np.testing.assert_array_equal(
        reconstruct(truncated_basis, [1.0, 0.0, 0.0, 0.0]), truncated_basis.directions[:, 0]
    )


@pytest.mark.parametrize("which", ["full_basis", "truncated_basis"])
def test_project_after_reconstruct(which, request, rng):
    b = request.getfixturevalue(which)
    alpha = rng.standard_normal(b.k)
    np.testing.assert_allclose(project(b, reconstruct(b, alpha)), alpha, atol=1e-10)


def test_truncated_projection_idempotent(truncated_basis, rng):
    def P(w):
        return reconstruct(truncated_basis, project(truncated_basis, w))

    for _ in range(20):
        w = rng.standard_normal(10)
        assert np.linalg.norm(P(P(w)) - P(w)) <= 1e-9 * np.linalg.norm(w)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(-100, 100), st.floats(-100, 100), st.integers(0, 2**32 - 1)
)
def test_linearity(a, b, seed):
    g = np.random.default_rng(seed)
    basis = compute_basis(np.eye(6) + 0.1 * np.arange(36).reshape(6, 6) / 36)
    w1, w2 = g.standard_normal(6), g.standard_normal(6)
    lhs = project(basis, a * w1 + b * w2)
    rhs = a * project(basis, w1) + b * project(basis, w2)
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(1.0, np.linalg.norm(lhs))


def test_dimension_mismatch(truncated_basis):
    with pytest.raises(InvalidArgumentError):
        project(truncated_basis, np.ones(9))
    with pytest.raises(InvalidArgumentError):
        reconstruct(truncated_basis, np.ones(10))
    with pytest.raises(InvalidArgumentError):
        project_batch(truncated_basis, np.ones((3, 4)))


def test_empty_batch(truncated_basis):
    assert project_batch(truncated_basis, np.zeros((0, 10))).shape == (0, 4)
    assert project_batch(truncated_basis, []).shape == (0, 4)


def test_singleton_batch(full_basis, rng):
    w = rng.standard_normal(10)
    out = project_batch(full_basis, w[None, :])
    assert out.shape == (1, 10)
    assert out[0].tobytes() == project(full_basis, w).tobytes()


def test_batch_matches_sequential_loop(truncated_basis, rng):
    W = rng.standard_normal((100, 10))
    out = project_batch(truncated_basis, W)
    for i in range(100):
        assert out[i].tobytes() == project(truncated_basis, W[i]).tobytes()
    A = rng.standard_normal((100, 4))
    back = reconstruct_batch(truncated_basis, A)
    for i in range(100):
        assert back[i].tobytes() == reconstruct(truncated_basis, A[i]).tobytes()
