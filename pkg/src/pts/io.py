"""File formats: point clouds, diagrams, scalar graphs and embeddings."""
import csv
import struct

import numpy as np

from .errors import PtsError
from .grassmann import GrassmannPoint
from .persistence import PersistenceDiagram, ScalarGraph

__all__ = [
    "read_cloud",
    "write_cloud",
    "read_diagrams",
    "write_diagrams",
    "read_scalar_graph",
    "write_pts",
    "read_pts",
    "PTS_MAGIC",
]

PTS_MAGIC = b"PTS1"
PD_HEADER = ["birth", "death", "dim", "essential"]


def read_cloud(path):
    pts = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    if pts.size == 0:
        raise PtsError(f"{path}: empty point cloud")
    if not np.all(np.isfinite(pts)):
        raise PtsError(f"{path}: non-finite coordinates")
    return pts


def write_cloud(points, path):
    np.savetxt(path, np.asarray(points, dtype=float), delimiter=",", fmt="%.17g")


def write_diagrams(diagrams, path):
    """Write one or more diagrams to a single CSV; essential deaths hold the cap."""
    if isinstance(diagrams, PersistenceDiagram):
        diagrams = [diagrams]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PD_HEADER)
        for pd in diagrams:
            for b, d, e in zip(pd.births, pd.deaths, pd.essential):
                w.writerow([repr(float(b)), repr(float(d)), pd.dim, int(e)])


def read_diagrams(path):
    """Diagrams in a PD CSV keyed by homology dimension.

    Each dimension's cap is the shared death of its essential points, or
    infinity when it has none.
    """
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != PD_HEADER:
            raise PtsError(f"{path}: expected header {','.join(PD_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                b, d, dim, e = float(row[0]), float(row[1]), int(row[2]), int(row[3])
            except (ValueError, IndexError):
                raise PtsError(f"{path}:{lineno}: malformed row {row}") from None
            if e not in (0, 1):
                raise PtsError(f"{path}:{lineno}: essential must be 0 or 1")
            rows.setdefault(dim, []).append((b, d, e))
    out = {}
    for dim, pts in sorted(rows.items()):
        arr = np.array(pts, dtype=float)
        ess = arr[:, 2].astype(bool)
        caps = np.unique(arr[ess, 1])
        if caps.size > 1:
            raise PtsError(f"{path}: essential points of dim {dim} disagree on the cap")
        cap = caps[0] if caps.size else np.inf
        out[dim] = PersistenceDiagram(arr[:, 0], arr[:, 1], ess, dim, cap)
    return out


def read_scalar_graph(edges_path, values_path):
    values = np.loadtxt(values_path, delimiter=",", ndmin=1, dtype=float)
    edges = np.loadtxt(edges_path, delimiter=",", ndmin=2, dtype=float)
    if edges.size and (edges.shape[1] != 2 or np.any(edges != np.round(edges))):
        raise PtsError(f"{edges_path}: edges must be integer pairs")
    edges = edges.astype(np.int64).reshape(-1, 2)
    return ScalarGraph(values.size, edges, values)


def write_pts(point, path):
    """Binary embedding: magic, u32 grid_k, N, p, then column-major f64."""
    grid_k = point.grid_k if point.grid_k is not None else 0
    with open(path, "wb") as fh:
        fh.write(PTS_MAGIC)
        fh.write(struct.pack("<III", grid_k, point.N, point.p))
        fh.write(np.asarray(point.basis, dtype="<f8").tobytes(order="F"))


def read_pts(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != PTS_MAGIC or len(data) < 16:
        raise PtsError(f"{path}: not a PTS1 embedding file")
    grid_k, N, p = struct.unpack("<III", data[4:16])
    body = data[16:]
    if len(body) != 8 * N * p:
        raise PtsError(f"{path}: expected {N * p} values, found {len(body) // 8}")
    basis = np.frombuffer(body, dtype="<f8").reshape((N, p), order="F")
    return GrassmannPoint(basis, grid_k or None)
