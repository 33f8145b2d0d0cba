"""Subspace distances and kernels on the Grassmann manifold.

A point is any N x p matrix with orthonormal columns; everything here only
depends on the column span.
"""
from dataclasses import dataclass

import numpy as np

from .errors import PtsError, RankDeficientError

__all__ = [
    "GrassmannPoint",
    "orthonormal_basis",
    "principal_angles",
    "geodesic_distance",
    "normalized_geodesic",
    "chordal_distance",
    "projection_kernel",
    "rbf_kernel",
    "grassmann_metric",
    "grassmann_kernel",
    "ORTHO_TOL",
]

ORTHO_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class GrassmannPoint:
    """Column-orthonormal basis of a p-dimensional subspace of R^N."""

    basis: np.ndarray
    grid_k: int = None

    def __post_init__(self):
        B = np.array(self.basis, dtype=float, order="F")
        if B.ndim == 1:
            B = B[:, None]
        if B.ndim != 2 or B.shape[1] < 1 or B.shape[0] < B.shape[1]:
            raise PtsError(f"basis must be N x p with N >= p >= 1, got shape {B.shape}")
        err = np.max(np.abs(B.T @ B - np.eye(B.shape[1])))
        if not err <= ORTHO_TOL:
            raise PtsError(f"basis columns are not orthonormal (max error {err:.3g})")
        if self.grid_k is not None and self.grid_k ** 2 != B.shape[0]:
            raise PtsError(f"grid_k={self.grid_k} does not match N={B.shape[0]}")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def N(self):
        return self.basis.shape[0]

    @property
    def p(self):
        return self.basis.shape[1]

    def __repr__(self):
        return f"GrassmannPoint(N={self.N}, p={self.p}, grid_k={self.grid_k})"

    def rotated(self, Q):
        """Same subspace, basis right-multiplied by an orthogonal p x p matrix."""
        return GrassmannPoint(self.basis @ Q, self.grid_k)


def _fix_signs(U):
    """Make the first clearly nonzero entry of every column positive."""
    U = U.copy()
    for j in range(U.shape[1]):
        col = U[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-12 * np.max(np.abs(col)))
        if big.size and col[big[0]] < 0:
            U[:, j] = -col
    return U


def numerical_rank(s, shape):
    if s.size == 0 or s[0] <= 0:
        return 0
    tol = s[0] * max(shape) * np.finfo(float).eps
    return int(np.count_nonzero(s > tol))


def leading_left_vectors(M, p, what="stack"):
    """The p leading left singular vectors of ``M``, sign-normalised.

    Raises RankDeficientError when ``M`` has numerical rank below p.
    """
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    rank = numerical_rank(s, M.shape)
    if p > rank:
        raise RankDeficientError(p, rank, what)
    return _fix_signs(U[:, :p])


def orthonormal_basis(M, grid_k=None):
    """GrassmannPoint spanning the columns of ``M`` (must have full column rank)."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    return GrassmannPoint(leading_left_vectors(M, M.shape[1], "matrix"), grid_k)


def _basis(X):
    return X.basis if isinstance(X, GrassmannPoint) else np.asarray(X, dtype=float)


def _cross(X, Y):
    A, B = _basis(X), _basis(Y)
    if A.shape[0] != B.shape[0]:
        raise PtsError(f"subspaces live in different ambient spaces (N={A.shape[0]} vs {B.shape[0]})")
    return A.T @ B


# below this angle (rad) the cosine-based formulas lose accuracy
_TINY = 1e-4


def principal_angles(X, Y):
    """Principal angles in ascending order, ``min(p1, p2)`` of them.

    arccos of a cosine near 1 loses half the significant digits, so when some
    angle is below ``_TINY`` the angles under pi/4 are recomputed from the
    sines (singular values of the part of the smaller basis orthogonal to the
    larger one). Cosines and sines are clamped to [0, 1].
    """
    A, B = _basis(X), _basis(Y)
    M = _cross(X, Y)
    if A.shape[1] > B.shape[1]:
        A, B, M = B, A, M.T
    cos = np.clip(np.linalg.svd(M, compute_uv=False), 0.0, 1.0)
    theta = np.arccos(cos)
    if theta.size and theta[0] >= _TINY:
        return theta
    sin = np.linalg.svd(A - B @ M.T, compute_uv=False)[::-1]
    small = cos ** 2 >= 0.5
    return np.where(small, np.arcsin(np.clip(sin, 0.0, 1.0)), theta)


def _same_p(X, Y):
    p1, p2 = _basis(X).shape[1], _basis(Y).shape[1]
    if p1 != p2:
        raise PtsError(
            f"geodesic distance needs equal subspace dimensions (got {p1} and {p2}); "
            "use chordal_distance for unequal dimensions"
        )
    return p1


def geodesic_distance(X, Y):
    """Arc length sqrt(sum theta_i^2) of the minimal geodesic."""
    _same_p(X, Y)
    theta = principal_angles(X, Y)
    return float(np.sqrt(np.dot(theta, theta)))


def normalized_geodesic(X, Y):
    """Geodesic distance divided by its maximum (pi / 2) sqrt(p)."""
    p = _same_p(X, Y)
    return geodesic_distance(X, Y) / (0.5 * np.pi * np.sqrt(p))


def projection_kernel(X, Y):
    """Squared Frobenius norm of X^T Y."""
    M = _cross(X, Y)
    return float(np.dot(M.ravel(), M.ravel()))


def chordal_distance(X, Y):
    """Symmetric directional distance sqrt(max(k, l) - ||X^T Y||_F^2).

    Works for subspaces of different dimensions.
    """
    A, B = _basis(X), _basis(Y)
    M = _cross(X, Y)
    if A.shape[1] > B.shape[1]:
        A, B, M = B, A, M.T
    gap = B.shape[1] - A.shape[1]
    d2 = B.shape[1] - np.dot(M.ravel(), M.ravel())
    if d2 >= _TINY ** 2:
        return float(np.sqrt(d2))
    # max(k, l) - ||A^T B||^2 = (l - k) + ||A - B B^T A||^2, and the residual
    # form keeps full accuracy when the subspaces nearly coincide
    R = A - B @ M.T
    return float(np.sqrt(gap + np.dot(R.ravel(), R.ravel())))


def rbf_kernel(X, Y, beta=1.0, conventional=False):
    """Grassmann RBF kernel.

    By default ``exp(-beta * ||X^T Y||_F^2)``, which shrinks as the subspaces
    become more similar. ``conventional=True`` gives
    ``exp(-beta * chordal_distance(X, Y)**2)`` instead.
    """
    if not beta > 0:
        raise PtsError("beta must be positive")
    if conventional:
        return float(np.exp(-beta * chordal_distance(X, Y) ** 2))
    return float(np.exp(-beta * projection_kernel(X, Y)))


_METRICS = {
    "geo": geodesic_distance,
    "ngeo": normalized_geodesic,
    "chordal": chordal_distance,
}


def grassmann_metric(name):
    try:
        return _METRICS[name]
    except KeyError:
        raise PtsError(f"unknown Grassmann metric {name!r}") from None


def grassmann_kernel(name, conventional=False):
    """Resolve ``kp`` or ``krbf:<beta>`` to a two-argument kernel function."""
    if name == "kp":
        return projection_kernel
    if name.startswith("krbf"):
        beta = 1.0
        if ":" in name:
            try:
                beta = float(name.split(":", 1)[1])
            except ValueError:
                raise PtsError(f"bad beta in {name!r}") from None
        return lambda X, Y: rbf_kernel(X, Y, beta, conventional)
    raise PtsError(f"unknown Grassmann kernel {name!r}")
