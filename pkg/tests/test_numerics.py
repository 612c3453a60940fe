import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cfiab.errors import NumericalFailure
from cfiab.numerics import RANK_TOL, db_to_linear, dbm_to_watt, make_stream, sample_cn, svd


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_identity_2x2():
    r = svd(np.eye(2))
    np.testing.assert_allclose(r.S, [1.0, 1.0])
    np.testing.assert_allclose(r.U @ r.V.conj().T, np.eye(2), atol=1e-14)


def test_zero_matrix():
    r = svd(np.zeros((3, 2)))
    np.testing.assert_array_equal(r.S, [0.0, 0.0])
    assert r.rank == 0
    assert r.null_space().shape == (2, 2)


def test_random_4x6_reconstruction():
    a = random_complex(np.random.default_rng(1), (4, 6))
    r = svd(a)
    assert np.linalg.norm(a - r.reconstruct()) <= 1e-9 * np.linalg.norm(a)


@pytest.mark.parametrize("shape", [(4, 6), (6, 4), (5, 5), (1, 8)])
def test_orthonormal_and_sorted(shape):
    r = svd(random_complex(np.random.default_rng(2), shape))
    assert np.linalg.norm(r.U.conj().T @ r.U - np.eye(r.U.shape[1])) <= 1e-10
    assert np.linalg.norm(r.V.conj().T @ r.V - np.eye(r.V.shape[1])) <= 1e-10
    assert np.all(np.diff(r.S) <= 0) and np.all(r.S >= 0)


def test_phase_convention():
    r = svd(random_complex(np.random.default_rng(3), (5, 3)))
    for j in range(r.U.shape[1]):
        lead = r.U[np.argmax(np.abs(r.U[:, j])), j]
        assert abs(lead.imag) < 1e-15 and lead.real >= 0


def test_deterministic_bitwise():
    a = random_complex(np.random.default_rng(4), (6, 6))
    r1, r2 = svd(a), svd(a.copy())
    assert np.array_equal(r1.S, r2.S)
    assert np.array_equal(r1.U, r2.U) and np.array_equal(r1.V, r2.V)


def test_rank_and_null_space():
    rng = np.random.default_rng(5)
    a = random_complex(rng, (3, 1)) @ random_complex(rng, (1, 6))
    r = svd(a)
    assert r.rank == 1
    ns = r.null_space()
    assert ns.shape == (6, 5)
    assert np.abs(a @ ns).max() <= 1e-12 * np.abs(a).max()
    assert r.rank_tol == RANK_TOL


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        svd(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        svd(np.array([[1.0, np.nan]]))


def test_lapack_failure_maps_to_numerical_failure(monkeypatch):
    def boom(*a, **k):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "svd", boom)
    with pytest.raises(NumericalFailure):
        svd(np.eye(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_unitary_invariance(m, n, seed):
    rng = np.random.default_rng(seed)
    a = random_complex(rng, (m, n))
    q, _ = np.linalg.qr(random_complex(rng, (m, m)))
    s1, s2 = svd(a).S, svd(q @ a).S
    np.testing.assert_allclose(s2, s1, rtol=1e-10, atol=1e-12 * s1[0])


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (3, 4), elements=st.floats(-1e3, 1e3)))
def test_reconstruction_property(a):
    r = svd(a)
    assert np.isfinite(r.S).all()
    assert np.linalg.norm(a - r.reconstruct()) <= 1e-9 * max(np.linalg.norm(a), 1e-300)


def test_sample_cn_zero_variance():
    x = sample_cn(make_stream(0, 1), 0.0, 1000)
    assert np.all(x == 0)


def test_sample_cn_moments():
    x = sample_cn(make_stream(0, 2), 1.0, 100_000)
    assert abs(x.mean()) <= 0.02
    assert abs(np.mean(np.abs(x) ** 2) - 1.0) <= 0.05


def test_sample_cn_negative_variance():
    with pytest.raises(ValueError):
        sample_cn(make_stream(0), -1.0)


def test_streams_deterministic_and_independent():
    a = sample_cn(make_stream(7, 3, 1), 1.0, 5)
    b = sample_cn(make_stream(7, 3, 1), 1.0, 5)
    c = sample_cn(make_stream(7, 3, 2), 1.0, 5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_order_insensitive():
    first = make_stream(1, 0).uniform(size=3)
    make_stream(1, 5).uniform(size=100)
    assert np.array_equal(first, make_stream(1, 0).uniform(size=3))


def test_unit_conversions():
    assert dbm_to_watt(30.0) == pytest.approx(1.0)
    assert dbm_to_watt(0.0) == pytest.approx(1e-3)
    assert db_to_linear(20.0) == pytest.approx(100.0)
