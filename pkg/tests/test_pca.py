import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from galmorph import pca
from galmorph.errors import PcaError
from galmorph.raster import GrayImage


def test_rank_one_pair():
    o = np.array([3.0, -4.0, 12.0])
    m = pca.fit([o, -o])
    assert m.n_components == 1
    assert np.allclose(np.abs(m.components[0]), np.abs(o) / 13.0, atol=1e-12)
    assert m.cumvar.tolist() == [1.0]


def test_identical_objects_are_rank_zero():
    with pytest.raises(PcaError, match="rank-0"):
        pca.fit([np.ones(5)] * 4)


def test_needs_two_objects():
    with pytest.raises(PcaError):
        pca.fit([np.ones(5)])


def test_three_point_oracle():
    # unnormalized scatter of (0,0), (2,0), (0,1) about their mean is (1/3) [[8, -2], [-2, 2]]
    m = pca.fit([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
    s13 = math.sqrt(13.0)
    assert m.eigenvalues == pytest.approx([(5 + s13) / 3, (5 - s13) / 3], rel=1e-12)
    assert m.eigenvalues[0] / m.eigenvalues[1] == pytest.approx((5 + s13) / (5 - s13), rel=1e-12)
    v = np.array([1.0, (3.0 - s13) / 2.0])
    v /= np.linalg.norm(v)
    assert np.allclose(m.components[0], v, atol=1e-12)  # largest entry positive


def test_projection_examples():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(6, 10))
    m = pca.fit(X)
    assert np.all(pca.project(m, m.mean, 3) == 0.0)
    assert pca.project(m, m.mean + m.components[0], 1) == pytest.approx([1.0], abs=1e-12)


def test_reconstruction_and_energy():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(10, 40))
    m = pca.fit(X)
    coeffs = pca.project(m, X)
    rms = np.sqrt(np.mean((pca.reconstruct(m, coeffs) - X) ** 2))
    assert rms <= 1e-6
    assert (coeffs**2).sum() == pytest.approx(m.eigenvalues.sum(), rel=1e-6)


def test_gram_matches_direct_eigensolve():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(10, 40))
    m = pca.fit(X)
    A = X - X.mean(axis=0)
    direct = np.sort(np.linalg.eigvalsh(A.T @ A))[::-1][: m.n_components]
    assert np.allclose(m.eigenvalues, direct, rtol=1e-8, atol=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_model_invariants(M, d, seed):
    X = np.random.default_rng(seed).normal(size=(M, d))
    m = pca.fit(X)
    V = m.components
    assert m.n_components <= min(M - 1, d)
    assert np.allclose(V @ V.T, np.eye(V.shape[0]), atol=1e-8)
    assert np.all(np.diff(m.eigenvalues) <= 0)
    assert m.eigenvalues.min() >= -1e-9
    assert np.all(np.diff(m.cumvar) >= -1e-15)
    assert m.cumvar[-1] == pytest.approx(1.0, abs=1e-9)
    idx = np.argmax(np.abs(V), axis=1)
    assert np.all(V[np.arange(V.shape[0]), idx] > 0)


def test_select_components():
    assert pca.select_components([0.6, 0.85, 0.95], 0.8) == 2
    m = pca.fit(np.random.default_rng(1).normal(size=(5, 8)))
    assert pca.select_components(m, 1.0) == m.n_components
    with pytest.raises(ValueError):
        pca.select_components(m, 0.0)


def test_project_errors():
    m = pca.fit(np.random.default_rng(2).normal(size=(4, 6)))
    with pytest.raises(PcaError):
        pca.project(m, np.zeros(5))
    with pytest.raises(PcaError):
        pca.project(m, np.zeros(6), m.n_components + 1)


def test_json_round_trip():
    m = pca.fit(np.random.default_rng(3).normal(size=(7, 12)))
    back = pca.PcaModel.from_json(m.to_json())
    assert np.array_equal(back.components, m.components)
    assert np.array_equal(back.eigenvalues, m.eigenvalues)
    assert back.to_json() == m.to_json()


def test_image_vector_is_scaled_row_major():
    img = GrayImage(np.array([[0, 255], [51, 102]], np.uint8))
    assert pca.image_vector(img).tolist() == [0.0, 1.0, 0.2, 0.4]
