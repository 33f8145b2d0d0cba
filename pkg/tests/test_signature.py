import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import gaussian_dx, kde_direct, random_orthonormal
from pts import _kde
from pts.errors import PtsError, RankDeficientError
from pts.grassmann import GrassmannPoint, geodesic_distance, principal_angles
from pts.persistence import PersistenceDiagram as PD
from pts.signature import (PersistenceSurface, PtsConfig, Scaling, aggregate_embeddings,
                           analytic_tangent_subspace, calibrate_g_value, fit_scaling,
                           kde_surface, perturb, perturbation_subspace, pts_embed,
                           stability_bound, surface_gradient, transform_axes)

SMALL = PtsConfig(sigma=0.08, grid_k=20, perturb_m=12, perturb_r=0.02, subspace_p=4)


def random_pd(rng, n=8):
    b = rng.uniform(0, 1, n)
    return PD(b, b + rng.uniform(0, 1, n))


def test_transform_axes_examples():
    out = transform_axes(PD.from_pairs([[0, 4], [1, 1], [2, 6]]))
    np.testing.assert_array_equal(out, [[2, 4], [1, 0], [4, 4]])


def test_fit_scaling_examples():
    s = fit_scaling([np.array([[2.0, 4.0]])], margin=0)
    assert s.lo == (1.5, 3.5) and s.hi == (2.5, 4.5)
    s = fit_scaling([np.array([[0.0, 0.0]]), np.array([[1.0, 1.0]])], margin=0)
    assert s.lo == (0, 0) and s.hi == (1, 1)
    s = fit_scaling([np.array([[0.0, 0.0], [10.0, 10.0]])], margin=0.05)
    assert s.lo == (-0.5, -0.5) and s.hi == (10.5, 10.5)
    with pytest.raises(PtsError):
        fit_scaling([np.empty((0, 2))])
    with pytest.raises(PtsError):
        fit_scaling([np.array([[0.0, 1.0]])], margin=0.5)


def test_config_validation_and_json(tmp_path):
    with pytest.raises(PtsError):
        PtsConfig(sigma=0)
    with pytest.raises(PtsError):
        PtsConfig(grid_k=1)
    with pytest.raises(PtsError):
        PtsConfig(perturb_m=3, subspace_p=5)
    with pytest.raises(PtsError):
        PtsConfig(perturb_r=1.0)
    with pytest.raises(PtsError):
        PtsConfig.from_dict({"sigma": 0.1, "bogus": 1})
    cfg = PtsConfig(sigma=0.1, sigma_list=[0.05, 0.1])
    cfg.to_json(tmp_path / "c.json")
    assert PtsConfig.from_json(tmp_path / "c.json") == cfg
    assert set(json.loads((tmp_path / "c.json").read_text())) == {
        "sigma", "grid_k", "perturb_m", "perturb_r", "subspace_p", "seed", "margin", "sigma_list"}


def test_perturb_properties():
    rng = np.random.default_rng(0)
    pts = transform_axes(random_pd(rng))
    pts[0, 1] = 0.0
    same = perturb(pts, SMALL.replace(perturb_r=0.0))
    assert len(same) == SMALL.perturb_m and all(np.array_equal(c, pts) for c in same)
    a, b = perturb(pts, SMALL), perturb(pts, SMALL)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert all(c.shape == pts.shape and np.all(c[:, 1] >= 0) for c in a)
    box = Scaling((0, 0), (2, 4))
    for c in perturb(pts, SMALL, box):
        step = np.abs(c - pts)
        assert np.all(step[:, 0] <= 0.02 * 2 + 1e-15)
        assert np.all(step[1:, 1] <= 0.02 * 4 + 1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 10), st.sampled_from([0.02, 0.05, 0.2]),
       st.sampled_from([5, 16, 33]))
def test_kde_matches_direct_sum(seed, n, sigma, k):
    pts = np.random.default_rng(seed).random((n, 2))
    surf = kde_surface(pts, sigma, k)
    assert np.all(surf.values >= 0)
    assert surf.values.sum() == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(surf.values, kde_direct(pts, sigma, k), atol=1e-12)
    xs, ys = pts[:, 0].copy(), pts[:, 1].copy()
    np.testing.assert_allclose(_kde.gaussian_grid_nb(xs, ys, k, sigma),
                               _kde.gaussian_grid_np(xs, ys, k, sigma), rtol=1e-12, atol=0)


def test_kde_symmetry_and_multiplicity():
    centre = np.array([[0.5, 0.5]])
    s = kde_surface(centre, 0.1, 21).values
    np.testing.assert_allclose(s, np.rot90(s), atol=1e-15)
    np.testing.assert_allclose(kde_surface(np.vstack([centre, centre]), 0.1, 21).values, s,
                               atol=1e-15)
    with pytest.raises(PtsError):
        kde_surface(np.empty((0, 2)), 0.1, 10)


def test_tiny_sigma_still_normalised():
    s = kde_surface(np.array([[0.31, 0.71]]), 0.0004, 50)
    assert s.values.sum() == pytest.approx(1.0)
    assert s.values[15, 35] == pytest.approx(1.0)
    # a point on a cell corner splits evenly between four cells
    s = kde_surface(np.array([[0.3, 0.7]]), 0.0004, 50)
    assert s.values.max() == pytest.approx(0.25)


def test_embed_rank_one_stack():
    rng = np.random.default_rng(1)
    pd = random_pd(rng)
    cfg = SMALL.replace(perturb_r=0.0, subspace_p=1)
    scaling = fit_scaling([pd])
    g = pts_embed(pd, cfg, scaling)
    v = kde_surface(transform_axes(pd), cfg.sigma, cfg.grid_k, scaling).vector
    np.testing.assert_allclose(np.abs(g.basis[:, 0]), v / np.linalg.norm(v), atol=1e-10)
    with pytest.raises(RankDeficientError, match="rank 1"):
        pts_embed(pd, cfg.replace(subspace_p=2), scaling)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_embed_invariants(seed):
    rng = np.random.default_rng(seed)
    pd = random_pd(rng, 6)
    g = pts_embed(pd, SMALL)
    B = g.basis
    assert np.max(np.abs(B.T @ B - np.eye(SMALL.subspace_p))) <= 1e-8
    assert g.grid_k == SMALL.grid_k and g.N == SMALL.grid_k ** 2
    again = pts_embed(pd, SMALL)
    assert again.basis.tobytes() == B.tobytes()
    Q = random_orthonormal(rng, SMALL.subspace_p, SMALL.subspace_p)
    assert geodesic_distance(g, g.rotated(Q)) <= 1e-7


def test_multiscale_stack():
    pd = random_pd(np.random.default_rng(2))
    g = pts_embed(pd, SMALL.replace(sigma_list=[0.05, 0.1], subspace_p=6))
    assert g.p == 6


def test_small_sigma_warns():
    pd = random_pd(np.random.default_rng(3))
    with pytest.warns(UserWarning, match="half a grid cell"):
        pts_embed(pd, SMALL.replace(sigma=0.0011, grid_k=11, perturb_r=0.0, subspace_p=1))


def _corpus_diagrams():
    from pts.datasets import ShapeSpec, sample_shape
    from pts.experiments import _diagrams
    out = []
    for cls in ("circle", "two_circles", "figure_eight", "torus", "blob"):
        for noise in (0.0, 0.1):
            d = _diagrams(sample_shape(ShapeSpec(cls, 100, noise, 3)), [0, 1], 3.0, 0.1)
            out += [d[0], d[1]]
    return out


def test_embed_seed_stability_on_signal_direction():
    cfg = PtsConfig(sigma=0.1, grid_k=50, perturb_m=20, perturb_r=0.02, subspace_p=3)
    for pd in _corpus_diagrams():
        scaling = fit_scaling([pd])
        a = pts_embed(pd, cfg, scaling)
        b = pts_embed(pd, cfg.replace(seed=99), scaling)
        assert principal_angles(a, b)[0] <= 0.1


@pytest.mark.xfail(strict=True, reason="trailing directions span seed-dependent perturbation "
                   "noise; measured up to 1.55 rad on torus and blob H1")
def test_embed_seed_stability():
    cfg = PtsConfig(sigma=0.1, grid_k=50, perturb_m=20, perturb_r=0.02, subspace_p=3)
    for pd in _corpus_diagrams():
        scaling = fit_scaling([pd])
        a = pts_embed(pd, cfg, scaling)
        b = pts_embed(pd, cfg.replace(seed=99), scaling)
        assert geodesic_distance(a, b) <= 0.1 * (np.pi / 2) * np.sqrt(cfg.subspace_p)


def test_gaussian_derivative_accuracy():
    k = 60
    sigma = 3.0 / k
    pt = np.array([[0.47, 0.55]])
    rx, ry = surface_gradient(kde_surface(pt, sigma, k))
    exact = gaussian_dx(pt, sigma, k)
    assert np.linalg.norm(rx - exact) / np.linalg.norm(exact) <= 1e-3
    exact_y = gaussian_dx(pt[:, ::-1], sigma, k).T
    assert np.linalg.norm(ry - exact_y) / np.linalg.norm(exact_y) <= 1e-3


def test_translation_columns_orthogonal():
    surf = kde_surface(np.array([[0.5, 0.5]]), 0.1, 41)
    rx, ry = surface_gradient(surf)
    assert abs(np.dot(rx.ravel(), ry.ravel())) <= 1e-10 * np.linalg.norm(rx) * np.linalg.norm(ry)
    assert analytic_tangent_subspace(surf, "translation").p == 2
    assert analytic_tangent_subspace(surf, "affine").p == 6


def test_tangent_rank_errors():
    flat = PersistenceSurface(np.full((10, 10), 0.01))
    with pytest.raises(RankDeficientError):
        analytic_tangent_subspace(flat)
    with pytest.raises(PtsError):
        analytic_tangent_subspace(kde_surface(np.array([[0.5, 0.5]]), 0.1, 10), "shear")


def test_taylor_subspace_small_radius():
    k = 40
    cfg = PtsConfig(sigma=3.0 / k, grid_k=k, perturb_m=30, perturb_r=1.0 / k, subspace_p=2)
    pt = np.array([[0.5, 0.45]])
    emp = perturbation_subspace(pt, cfg, Scaling((0, 0), (1, 1)))
    ana = analytic_tangent_subspace(kde_surface(pt, cfg.sigma, k))
    assert np.all(principal_angles(emp, ana) < 0.2)


def test_aggregate():
    rng = np.random.default_rng(6)
    X = GrassmannPoint(random_orthonormal(rng, 30, 4))
    one = aggregate_embeddings([X], 4, 4)
    assert np.all(principal_angles(one, X) < 1e-8)
    two = aggregate_embeddings([X, X.rotated(random_orthonormal(rng, 4, 4))], 4, 4)
    assert np.all(principal_angles(two, X) < 1e-8)
    Y = GrassmannPoint(random_orthonormal(rng, 30, 4))
    agg = aggregate_embeddings([X, Y], 2, 3)
    assert np.max(np.abs(agg.basis.T @ agg.basis - np.eye(3))) <= 1e-8
    with pytest.raises(PtsError):
        aggregate_embeddings([X, GrassmannPoint(random_orthonormal(rng, 20, 4))], 2, 2)


def test_stability_bound_formula():
    sigma, k_max, N, g = 0.1, 3, 400, 0.5
    K = 1 / (2 * np.pi * sigma ** 2)
    base = k_max / np.sqrt(g) * np.sqrt(2) * K / sigma ** 2 * k_max * np.sqrt(N)
    assert stability_bound(0.0, sigma, k_max, N, g) == pytest.approx(base)
    vals = [stability_bound(d, sigma, k_max, N, g) for d in np.linspace(0, 5, 20)]
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(PtsError):
        stability_bound(1.0, 0.0, k_max, N, g)
    with pytest.raises(PtsError):
        stability_bound(1.0, sigma, k_max, N, 0.0)


def test_calibrate_g_value():
    surfs = [kde_surface(np.array([[0.4, 0.6]]), 0.1, 30), kde_surface(np.array([[0.5, 0.5]]), 0.2, 30)]
    g = calibrate_g_value(surfs, 2)
    assert g > 0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(PtsError):
            calibrate_g_value([PersistenceSurface(np.full((5, 5), 0.04))], 1)


def test_rank_correlation_with_wasserstein():
    from scipy.stats import spearmanr
    from pts.datasets import ShapeSpec, noise_ladder
    from pts.experiments import _diagrams
    from pts.grassmann import normalized_geodesic
    from pts.matching import wasserstein
    levels = [0.0, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3]
    cfg = PtsConfig(sigma=0.1, grid_k=50, perturb_m=20, perturb_r=0.02, subspace_p=3)
    classes = ["circle", "two_circles", "figure_eight", "torus", "blob"]
    corpus = noise_ladder([ShapeSpec(c, 80) for c in classes], levels, 3, seed=0)
    pds = [_diagrams(c.points, [0], 3.0)[0].finite() for c in corpus]
    scaling = fit_scaling(pds)
    emb = [pts_embed(pd, cfg, scaling) for pd in pds]
    d1, dn = [], []
    for b in range(0, len(corpus), len(levels)):
        for j in range(1, len(levels)):
            d1.append(wasserstein(pds[b], pds[b + j], 1))
            dn.append(normalized_geodesic(emb[b], emb[b + j]))
    assert spearmanr(d1, dn).statistic >= 0.7


def test_normalisation_breaks_l1_bound_when_a_point_appears():
    from pts.matching import wasserstein
    # a short-lived extra point costs little in d1 but takes half the mass
    one, two = np.array([[0.5, 0.5]]), np.array([[0.5, 0.5], [0.5, 0.002]])
    l1 = np.abs(kde_surface(one, 0.05, 200).values - kde_surface(two, 0.05, 200).values).sum()
    as_pd = lambda t: PD(t[:, 0] - t[:, 1] / 2, t[:, 0] + t[:, 1] / 2)
    bound = np.sqrt(10 / np.pi) / 0.05 * wasserstein(as_pd(one), as_pd(two), 1)
    assert l1 > 10 * bound
