import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import principal_angles_scipy, random_orthonormal
from pts.errors import PtsError, RankDeficientError
from pts.grassmann import (GrassmannPoint, chordal_distance, geodesic_distance, grassmann_kernel,
                           grassmann_metric, normalized_geodesic, orthonormal_basis,
                           principal_angles, projection_kernel, rbf_kernel)

E = np.eye(3)
e1, e2 = E[:, :1], E[:, 1:2]
diag = (E[:, :1] + E[:, 1:2]) / np.sqrt(2)


def test_angle_examples():
    assert principal_angles(e1, e1) == pytest.approx([0], abs=1e-9)
    assert principal_angles(e1, e2) == pytest.approx([np.pi / 2], abs=1e-9)
    assert principal_angles(e1, diag) == pytest.approx([np.pi / 4], abs=1e-9)


def test_distance_examples():
    assert geodesic_distance(e1, e2) == pytest.approx(np.pi / 2)
    assert normalized_geodesic(e1, e2) == pytest.approx(1.0)
    assert chordal_distance(e1, e1) == 0
    assert chordal_distance(e1, e2) == pytest.approx(1.0)
    assert chordal_distance(e1, diag) == pytest.approx(np.sqrt(0.5))


def test_kernel_examples():
    X = E[:, :2]
    assert projection_kernel(X, X) == pytest.approx(2)
    assert rbf_kernel(X, X, 0.5) == pytest.approx(np.exp(-1.0))
    assert projection_kernel(e1, e2) == 0
    assert rbf_kernel(e1, e2) == 1
    assert rbf_kernel(e1, e2, conventional=True) == pytest.approx(np.exp(-1.0))
    assert rbf_kernel(e1, e1, conventional=True) == pytest.approx(1.0)


def test_unequal_dims():
    with pytest.raises(PtsError, match="chordal"):
        geodesic_distance(E[:, :1], E[:, :2])
    assert chordal_distance(E[:, :1], E[:, :2]) == pytest.approx(1.0)
    assert len(principal_angles(E[:, :1], E[:, :2])) == 1


def test_validation():
    with pytest.raises(PtsError):
        GrassmannPoint(np.ones((3, 2)))
    with pytest.raises(PtsError):
        GrassmannPoint(np.eye(4)[:, :2], grid_k=3)
    with pytest.raises(PtsError):
        principal_angles(np.eye(3)[:, :1], np.eye(4)[:, :1])
    with pytest.raises(RankDeficientError):
        orthonormal_basis(np.ones((4, 2)))
    with pytest.raises(PtsError):
        rbf_kernel(e1, e1, beta=0)
    with pytest.raises(PtsError):
        grassmann_metric("cosine")
    with pytest.raises(PtsError):
        grassmann_kernel("linear")


def test_basis_is_readonly_and_column_major():
    g = GrassmannPoint(random_orthonormal(np.random.default_rng(0), 9, 2), grid_k=3)
    assert g.basis.flags.f_contiguous and not g.basis.flags.writeable
    assert (g.N, g.p, g.grid_k) == (9, 2, 3)


pairs = st.tuples(st.integers(0, 10**6), st.integers(2, 30), st.integers(1, 4))


@settings(max_examples=100, deadline=None)
@given(pairs)
def test_angles_match_scipy(args):
    seed, N, p = args
    p = min(p, N)
    rng = np.random.default_rng(seed)
    X, Y = random_orthonormal(rng, N, p), random_orthonormal(rng, N, p)
    theta = principal_angles(X, Y)
    assert np.all(np.diff(theta) >= -1e-12)
    assert np.all((theta >= 0) & (theta <= np.pi / 2))
    np.testing.assert_allclose(theta, principal_angles_scipy(X, Y), atol=1e-7)


@settings(max_examples=100, deadline=None)
@given(pairs)
def test_identities_and_invariance(args):
    seed, N, p = args
    p = min(p, N)
    rng = np.random.default_rng(seed)
    X, Y = random_orthonormal(rng, N, p), random_orthonormal(rng, N, p)
    Q1, Q2 = random_orthonormal(rng, p, p), random_orthonormal(rng, p, p)
    assert projection_kernel(X, Y) == pytest.approx(p - chordal_distance(X, Y) ** 2, abs=1e-9)
    for f in (geodesic_distance, normalized_geodesic, chordal_distance, projection_kernel,
              rbf_kernel):
        assert f(X @ Q1, Y @ Q2) == pytest.approx(f(X, Y), abs=1e-9)
        assert f(X, Y) == pytest.approx(f(Y, X), abs=1e-12)
    assert 0 <= normalized_geodesic(X, Y) <= 1
    assert 0 <= projection_kernel(X, Y) <= p + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    X, Y, Z = (random_orthonormal(rng, 25, 2) for _ in range(3))
    for d in (geodesic_distance, chordal_distance):
        assert d(X, Z) <= d(X, Y) + d(Y, Z) + 1e-9


def test_clamping_near_identical():
    rng = np.random.default_rng(5)
    X = random_orthonormal(rng, 50, 5)
    for _ in range(50):
        Q = random_orthonormal(rng, 5, 5)
        theta = principal_angles(X, X @ Q)
        assert np.all(np.isfinite(theta)) and np.all(theta < 1e-6)
        assert geodesic_distance(X, X @ Q) <= 1e-7


def test_projection_gram_psd():
    rng = np.random.default_rng(2)
    pts = [random_orthonormal(rng, 40, 3) for _ in range(30)]
    G = np.array([[projection_kernel(a, b) for b in pts] for a in pts])
    assert np.allclose(G, G.T)
    assert np.linalg.eigvalsh(G)[0] >= -1e-8


def test_orthonormal_basis_sign_rule():
    M = np.array([[-2.0, 0.0], [0.0, -3.0], [0.0, 0.0]])
    B = orthonormal_basis(M).basis
    for j in range(2):
        col = B[:, j]
        assert col[np.flatnonzero(np.abs(col) > 1e-12)[0]] > 0
