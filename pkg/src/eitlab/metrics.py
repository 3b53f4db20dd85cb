"""Hausdorff distance and directed deviations between point clouds in C^n."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyCloud

__all__ = [
    "HausdorffResult",
    "directed_deviation",
    "hausdorff",
    "fill_distance",
    "cloud_from_complex",
]


def cloud_from_complex(points: np.ndarray) -> np.ndarray:
    """Flatten an (m, n) complex cloud to real coordinates in R^{2n}.

    A 1-D complex array is read as m points in the plane.
    """
    points = np.asarray(points)
    if points.ndim == 1:
        points = points[:, None]
    return np.concatenate([points.real, points.imag], axis=1) \
        if not np.iscomplexobj(points) else \
        np.stack([points.real, points.imag], axis=2).reshape(points.shape[0], -1)


def _as_real(cloud: np.ndarray) -> np.ndarray:
    cloud = np.asarray(cloud)
    if np.iscomplexobj(cloud):
        return cloud_from_complex(cloud)
    return np.atleast_2d(cloud.astype(float))


def _check(a: np.ndarray, b: np.ndarray):
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptyCloud("directed deviation of an empty cloud")
    if a.shape[1] != b.shape[1]:
        raise ValueError("clouds live in different dimensions")


def directed_deviation(a: np.ndarray, b: np.ndarray,
                       brute_force: bool = False) -> float:
    """r_AB: the radius needed for A's neighborhood to cover B."""
    a, b = _as_real(a), _as_real(b)
    _check(a, b)
    if brute_force:
        d = np.sqrt(((b[:, None, :] - a[None, :, :]) ** 2).sum(axis=2))
        return float(d.min(axis=1).max())
    dist, _ = cKDTree(a).query(b)
    return float(dist.max())


@dataclass(frozen=True)
class HausdorffResult:
    """Symmetric Hausdorff distance with directed parts and witnesses."""

    d_h: float
    r_ab: float
    r_ba: float
    witness_a: int
    witness_b: int

    def to_json(self) -> dict:
        return {"d_h": self.d_h, "r_ab": self.r_ab, "r_ba": self.r_ba,
                "witness_a": int(self.witness_a), "witness_b": int(self.witness_b)}

    def save(self, path: str, fill_a: float | None = None, fill_b: float | None = None):
        d = self.to_json()
        d["fill_distance_a"] = fill_a
        d["fill_distance_b"] = fill_b
        with open(path, "w") as fh:
            json.dump(d, fh, indent=2)


def hausdorff(a: np.ndarray, b: np.ndarray, brute_force: bool = False) -> HausdorffResult:
    """d_H = max(r_AB, r_BA); witnesses index the farthest probe points."""
    ar, br = _as_real(a), _as_real(b)
    _check(ar, br)
    if brute_force:
        d = np.sqrt(((br[:, None, :] - ar[None, :, :]) ** 2).sum(axis=2))
        min_b = d.min(axis=1)  # distance of each b to A
        min_a = d.min(axis=0)  # distance of each a to B
    else:
        min_b, _ = cKDTree(ar).query(br)
        min_a, _ = cKDTree(br).query(ar)
    r_ab = float(min_b.max())
    r_ba = float(min_a.max())
    wb = int(np.argmax(min_b))
    wa = int(np.argmax(min_a))
    return HausdorffResult(max(r_ab, r_ba), r_ab, r_ba, wa, wb)


def fill_distance(cloud: np.ndarray) -> float:
    """Largest nearest-neighbor spacing: the sampling bias scale of the cloud."""
    c = _as_real(cloud)
    if c.shape[0] < 2:
        return 0.0
    d, _ = cKDTree(c).query(c, k=2)
    return float(d[:, 1].max())
