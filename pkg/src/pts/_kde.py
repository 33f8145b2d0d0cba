"""Gaussian persistence-surface kernels on a k x k grid of cell centers.

The isotropic Gaussian factorises over the two axes, so each point
contributes an outer product of two 1-D profiles. Every exponent is shifted
by its grid minimum, which keeps tiny bandwidths from underflowing to an
all-zero surface; the common factor cancels when the surface is normalised.
"""
import numpy as np

from ._accel import njit, select


@njit
def gaussian_grid_nb(xs, ys, k, sigma):
    n = xs.shape[0]
    inv = 1.0 / (2.0 * sigma * sigma)
    centers = (np.arange(k) + 0.5) / k
    gx = np.empty((n, k))
    gy = np.empty((n, k))
    shift = np.empty(n)
    for p in range(n):
        ax = np.inf
        ay = np.inf
        for i in range(k):
            dx = (centers[i] - xs[p]) ** 2
            dy = (centers[i] - ys[p]) ** 2
            gx[p, i] = dx
            gy[p, i] = dy
            ax = min(ax, dx)
            ay = min(ay, dy)
        for i in range(k):
            gx[p, i] = np.exp(-(gx[p, i] - ax) * inv)
            gy[p, i] = np.exp(-(gy[p, i] - ay) * inv)
        shift[p] = ax + ay
    s0 = shift.min()
    for p in range(n):
        w = np.exp(-(shift[p] - s0) * inv)
        for i in range(k):
            gx[p, i] *= w
    # the sum of outer products is one matrix product
    return np.ascontiguousarray(gx.T) @ gy


def gaussian_grid_np(xs, ys, k, sigma):
    inv = 1.0 / (2.0 * sigma * sigma)
    centers = (np.arange(k) + 0.5) / k
    dx = (centers[None, :] - np.asarray(xs)[:, None]) ** 2
    dy = (centers[None, :] - np.asarray(ys)[:, None]) ** 2
    ax = dx.min(axis=1)
    ay = dy.min(axis=1)
    gx = np.exp(-(dx - ax[:, None]) * inv)
    gy = np.exp(-(dy - ay[:, None]) * inv)
    shift = ax + ay
    w = np.exp(-(shift - shift.min()) * inv)
    return (gx * w[:, None]).T @ gy


gaussian_grid = select(gaussian_grid_nb, gaussian_grid_np)
