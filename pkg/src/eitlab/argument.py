"""Cauchy boundary integrals, winding classification and cloud reconstruction.

Interior values of a holomorphic immersion are recovered from its boundary
traces alone: for a target z enclosed exactly once by the curve eta_j(Gamma),
the contour integral (1/2 pi i) * integral of eta_k d_gamma(eta_j) / (eta_j - z)
returns the value of the k-th coordinate at the unique preimage.  A grid of
such targets, classified by winding number, yields a point cloud sampling the
immersed image.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import boundary as bc
from .boundary import BoundaryFunction
from .errors import (
    DerivativeVanishes,
    EmptyCloud,
    NonIntegerWinding,
    TooCloseToContour,
)
from .holomorphic import TraceTuple

__all__ = [
    "WindingField",
    "ReconstructedCloud",
    "ImmersionReport",
    "cauchy_integral",
    "winding_number",
    "classify",
    "reconstruct",
    "derivative_integral",
    "immersion_check",
    "contour_distance",
]

_MAX_NODES = 16384
_OVERSAMPLE = 4


def _contour_samples(eta_j: BoundaryFunction, n_points: int | None = None) -> np.ndarray:
    n = n_points if n_points is not None else _OVERSAMPLE * eta_j.n_modes
    return eta_j.values(n)


def _z_diameter(samples: np.ndarray) -> float:
    # bounding-box diagonal; only sets quadrature and tolerance scales
    w = samples.real.max() - samples.real.min()
    h = samples.imag.max() - samples.imag.min()
    return float(np.hypot(w, h))


def contour_distance(eta_j: BoundaryFunction, z: np.ndarray | complex) -> np.ndarray:
    """Discrete distance from z to the curve eta_j(Gamma) (4N samples)."""
    samples = _contour_samples(eta_j)
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    d = np.abs(zs[:, None] - samples[None, :]).min(axis=1)
    return d if np.ndim(z) else d[0]


def _node_count(eta_j: BoundaryFunction, dist: float, squared: bool) -> int:
    samples = _contour_samples(eta_j)
    c_q = 40.0 * _z_diameter(samples)
    n = max(eta_j.n_modes, int(np.ceil(c_q / max(dist, 1e-300))))
    if squared:
        n *= 2
    return min(n, _MAX_NODES)


def _z_arclength(eta_j: BoundaryFunction) -> float:
    d = bc.derivative_gamma(eta_j).values(_OVERSAMPLE * eta_j.n_modes)
    return float(np.mean(np.abs(d)) * eta_j.length)


def _cauchy_raw(eta_k: BoundaryFunction | None, eta_j: BoundaryFunction,
                zs: np.ndarray, squared: bool, n_nodes: int) -> np.ndarray:
    ej = eta_j.values(n_nodes)
    dj = bc.derivative_gamma(eta_j).values(n_nodes)
    ek = 1.0 if eta_k is None else eta_k.values(n_nodes)
    h = eta_j.length / n_nodes
    den = ej[None, :] - zs[:, None]
    if squared:
        den = den ** 2
    vals = (ek * dj)[None, :] / den
    return vals.sum(axis=1) * h / (2j * np.pi)


def _cauchy_many(eta_k: BoundaryFunction | None, eta_j: BoundaryFunction,
                 zs: np.ndarray, squared: bool = False) -> np.ndarray:
    """Cauchy integrals at many targets, nodes chosen per contour distance."""
    zs = np.asarray(zs, dtype=complex)
    dists = contour_distance(eta_j, zs)
    out = np.empty(zs.size, dtype=complex)
    counts = np.array([_node_count(eta_j, d, squared) for d in dists])
    arclen = _z_arclength(eta_j)
    eps_min = 4.0 * arclen / counts
    if np.any(dists < eps_min):
        bad = int(np.argmax(dists < eps_min))
        raise TooCloseToContour(
            f"target {zs[bad]} at distance {dists[bad]:.3e} < {eps_min[bad]:.3e}")
    for n in np.unique(counts):
        sel = counts == n
        out[sel] = _cauchy_raw(eta_k, eta_j, zs[sel], squared, int(n))
    return out


def cauchy_integral(eta_k: BoundaryFunction | None, eta_j: BoundaryFunction,
                    z: complex) -> complex:
    """J_{k,j}(z): k-th coordinate summed over preimages of z under w_j.

    eta_k = None stands for the constant 1, so the integral is the winding
    number of eta_j around z.
    """
    return complex(_cauchy_many(eta_k, eta_j, np.array([z]))[0])


def derivative_integral(eta_k: BoundaryFunction | None, eta_j: BoundaryFunction,
                        z: complex) -> complex:
    """d/dz of the Cauchy integral: squared denominator, doubled nodes."""
    return complex(_cauchy_many(eta_k, eta_j, np.array([z]), squared=True)[0])


def winding_number(eta_j: BoundaryFunction, z: complex, eps: float | None = None) -> int:
    """Winding of eta_j(Gamma) around z, certified to round cleanly."""
    val = cauchy_integral(None, eta_j, z).real
    w = int(np.round(val))
    if abs(val - w) >= 0.1:
        raise NonIntegerWinding(f"contour integral {val:.4f} at z={z}")
    return w


@dataclass(frozen=True)
class WindingField:
    """Integer winding numbers of a trace contour on a rectangular lattice."""

    grid: np.ndarray          # complex lattice points, flattened
    winding: np.ndarray       # int per point; valid where not near-contour
    near_contour: np.ndarray  # bool marker per point
    epsilon: float
    shape: tuple

    def points_with_winding(self, w: int) -> np.ndarray:
        return self.grid[(~self.near_contour) & (self.winding == w)]


def classify(eta_j: BoundaryFunction, grid_resolution: int, eps: float) -> WindingField:
    """Winding field on a padded bounding-box lattice of the contour."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    samples = _contour_samples(eta_j)
    x0, x1 = samples.real.min(), samples.real.max()
    y0, y1 = samples.imag.min(), samples.imag.max()
    px, py = 0.2 * (x1 - x0), 0.2 * (y1 - y0)
    pad = max(px, py, 1e-12)
    xs = np.linspace(x0 - pad, x1 + pad, grid_resolution)
    ys = np.linspace(y0 - pad, y1 + pad, grid_resolution)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    grid = (gx + 1j * gy).ravel()

    from scipy.spatial import cKDTree

    tree = cKDTree(np.column_stack([samples.real, samples.imag]))
    dist, _ = tree.query(np.column_stack([grid.real, grid.imag]))
    near = dist <= eps
    winding = np.zeros(grid.size, dtype=int)
    far = ~near
    if np.any(far):
        vals = _cauchy_many(None, eta_j, grid[far]).real
        w = np.round(vals).astype(int)
        if np.any(np.abs(vals - w) >= 0.1):
            raise NonIntegerWinding("winding integral failed to round on the grid")
        winding[far] = w
    return WindingField(grid, winding, near, eps, (grid_resolution, grid_resolution))


@dataclass
class ReconstructedCloud:
    """Point cloud in C^n sampling an immersed surface image."""

    points: np.ndarray        # (n_pts, n) complex
    tags: list                # "interior" or "boundary"
    chart_j: np.ndarray       # chart index, -1 for boundary points
    source_z: np.ndarray      # grid target per interior point, nan+0j for boundary
    epsilon: float
    n_dropped: int = 0
    merge_tol: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def n_coords(self) -> int:
        return self.points.shape[1]

    def interior_points(self) -> np.ndarray:
        sel = np.array([t == "interior" for t in self.tags])
        return self.points[sel]

    def to_csv(self, path: str):
        n = self.n_coords
        header = []
        for k in range(1, n + 1):
            header += [f"re_{k}", f"im_{k}"]
        header += ["tag", "chart_j", "source_z_re", "source_z_im"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for i in range(self.n_points):
                row = []
                for k in range(n):
                    row += [repr(float(self.points[i, k].real)),
                            repr(float(self.points[i, k].imag))]
                row += [self.tags[i], int(self.chart_j[i]),
                        repr(float(self.source_z[i].real)),
                        repr(float(self.source_z[i].imag))]
                w.writerow(row)

    @staticmethod
    def from_csv(path: str) -> "ReconstructedCloud":
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            header = next(rd)
            n = (len(header) - 4) // 2
            pts, tags, charts, src = [], [], [], []
            for row in rd:
                pts.append([complex(float(row[2 * k]), float(row[2 * k + 1]))
                            for k in range(n)])
                tags.append(row[2 * n])
                charts.append(int(row[2 * n + 1]))
                src.append(complex(float(row[2 * n + 2]), float(row[2 * n + 3])))
        if not pts:
            raise EmptyCloud(f"no points in {path}")
        return ReconstructedCloud(np.array(pts), tags, np.array(charts),
                                  np.array(src), epsilon=0.0)


def reconstruct(e: TraceTuple, eps: float, grid_resolution: int = 64,
                fields: list[WindingField] | None = None,
                consistency_rel: float = 1e-6) -> ReconstructedCloud:
    """Sample the immersed image from boundary traces alone.

    Every lattice point enclosed exactly once by some chart contour yields a
    candidate point (J_{1,j}, ..., J_{n,j}); candidates failing the
    self-consistency check J_{j,j}(z) = z are dropped and counted.  A shared
    list of winding fields lets two clouds be reconstructed on identical
    targets.
    """
    n = len(e)
    if fields is None:
        fields = [classify(e[j], grid_resolution, eps) for j in range(n)]
    pts, tags, charts, srcs = [], [], [], []
    n_dropped = 0
    diam_all = 0.0
    for j in range(n):
        samples = _contour_samples(e[j])
        diam = _z_diameter(samples)
        diam_all = max(diam_all, diam)
        zs = fields[j].points_with_winding(1)
        if zs.size == 0:
            continue
        cols = [_cauchy_many(e[k], e[j], zs) for k in range(n)]
        cand = np.stack(cols, axis=1)
        ok = np.abs(cand[:, j] - zs) <= consistency_rel * diam
        # simplicity of the preimage: the chart derivative must not vanish
        dvals = _cauchy_many(e[j], e[j], zs[ok], squared=True)
        ok_idx = np.nonzero(ok)[0]
        simple = np.abs(dvals) > 1e-8
        n_dropped += int(np.sum(~ok)) + int(np.sum(~simple))
        keep = ok_idx[simple]
        for i in keep:
            pts.append(cand[i])
            tags.append("interior")
            charts.append(j)
            srcs.append(zs[i])
    # boundary samples at 4N nodes
    nb = _OVERSAMPLE * e.n_modes
    bvals = np.stack([e[k].values(nb) for k in range(n)], axis=1)
    for i in range(nb):
        pts.append(bvals[i])
        tags.append("boundary")
        charts.append(-1)
        srcs.append(complex(np.nan, 0.0))
    points = np.array(pts)
    charts = np.array(charts)
    srcs = np.array(srcs)
    # merge duplicates (same image point found by different charts, or
    # degenerate boundary samples); keep the earliest occurrence
    merge_tol = consistency_rel * max(diam_all, 1e-6)
    from scipy.spatial import cKDTree

    flat = np.column_stack([points.real, points.imag])
    pairs = cKDTree(flat).query_pairs(merge_tol)
    drop = {max(a, b) for a, b in pairs}
    if drop:
        mask = np.ones(points.shape[0], dtype=bool)
        mask[sorted(drop)] = False
        points = points[mask]
        charts = charts[mask]
        srcs = srcs[mask]
        tags = [t for t, m in zip(tags, mask) if m]
    return ReconstructedCloud(points, list(tags), charts, srcs, eps,
                              n_dropped, merge_tol)


@dataclass(frozen=True)
class ImmersionReport:
    """Verdict of the full-rank Jacobian check over sampled chart points."""

    applicable: bool
    passed: bool
    min_margin: float
    n_samples: int

    def __bool__(self):
        return self.applicable and self.passed


def immersion_check(e: TraceTuple, fields: list[WindingField], m: int,
                    sigma_min_tol: float = 1e-6,
                    max_samples_per_chart: int = 64) -> ImmersionReport:
    """Full-rank test of the first m coordinates on winding-1 samples.

    The complex derivatives d_k = dw_k/dz stack into a real 2m x 2 Jacobian;
    full rank is certified when the smallest singular value stays above
    sigma_min_tol times the largest.
    """
    if m > len(e):
        raise ValueError("m exceeds the number of coordinates")
    margins = []
    n_samples = 0
    for j in range(len(e)):
        zs = fields[j].points_with_winding(1)
        if zs.size == 0:
            continue
        if zs.size > max_samples_per_chart:
            step = zs.size // max_samples_per_chart
            zs = zs[::step][:max_samples_per_chart]
        dmat = np.stack([_cauchy_many(e[k], e[j], zs, squared=True)
                         for k in range(m)], axis=1)
        for row in dmat:
            jac = np.zeros((2 * m, 2))
            for k in range(m):
                d = row[k]
                jac[2 * k:2 * k + 2] = [[d.real, -d.imag], [d.imag, d.real]]
            sv = np.linalg.svd(jac, compute_uv=False)
            if sv[0] == 0.0:
                raise DerivativeVanishes("Jacobian identically zero at a sample")
            margins.append(sv[-1] / sv[0])
            n_samples += 1
    if not margins:
        return ImmersionReport(False, False, 0.0, 0)
    mmin = float(min(margins))
    return ImmersionReport(True, mmin >= sigma_min_tol, mmin, n_samples)
