"""Rectified boundary charts, near-contour Cauchy evaluation and pairing.

Near a boundary anchor a the map zeta(z) = (z - eta_j(a)) / d_gamma(eta_j)(a)
straightens the trace curve: in the coordinates s = psi1_inverse(zeta_1),
r = zeta_2 - psi2(s) the curve becomes the line r = 0.  Points of a perturbed
image are paired with reference points by matching their (s, r) coordinates.
Cauchy integrals with targets inside the plain-quadrature exclusion band are
evaluated by subtracting the value at the boundary foot, which regularizes
the integrand, and integrating on panels graded toward the foot.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import boundary as bc
from . import argument as ap
from . import errors
from .boundary import BoundaryFunction
from .errors import (
    AllChartsFailed,
    DeltaTooSmall,
    DerivativeVanishes,
    OutOfChart,
    WindowCollapse,
)
from .holomorphic import TraceTuple

__all__ = [
    "BoundaryChart",
    "build_chart",
    "rectify",
    "unrectify",
    "pair_points",
    "split_cauchy",
    "near_boundary_diagnostic",
    "DiagnosticReport",
]

_C0 = 0.5
_DERIV_TOL = 1e-8


@dataclass(frozen=True)
class BoundaryChart:
    """Local rectifying chart of a trace curve at a boundary anchor."""

    eta_j: BoundaryFunction
    anchor: float
    chart_index: int
    disk_radius: float
    zeta_shift: complex
    zeta_scale: complex
    gamma_window: tuple          # (l_lo, l_hi), l_lo < anchor < l_hi
    psi1_inverse: PchipInterpolator
    c0: float = _C0

    @property
    def window_length(self) -> float:
        return self.gamma_window[1] - self.gamma_window[0]

    def zeta(self, z: np.ndarray | complex) -> np.ndarray | complex:
        return (z - self.zeta_shift) / self.zeta_scale

    def psi(self, l: np.ndarray | float) -> np.ndarray | complex:
        """Image of the curve in chart coordinates, psi = psi1 + i psi2."""
        return self.zeta(self.eta_j.eval_at(np.atleast_1d(np.asarray(l, float))))

    def contains_l(self, l: float) -> bool:
        lo, hi = self.gamma_window
        return lo <= l <= hi


def build_chart(eta_j: BoundaryFunction, a: float, chart_index: int = 0,
                c0: float = _C0) -> BoundaryChart:
    """Grow a rectifying chart symmetrically from the anchor.

    The window extends while the tangent stays inside the cone
    Re(d_gamma eta_j(l) / d_gamma eta_j(a)) in [c0, 1/c0]; the chart disk
    radius is set so the curve enters the disk only through the window.
    """
    length = eta_j.length
    deta = bc.derivative_gamma(eta_j)
    scale = complex(deta.eval_at(a)[0])
    if abs(scale) <= _DERIV_TOL:
        raise DerivativeVanishes(f"|d_gamma eta_j({a})| = {abs(scale):.2e}")
    n = eta_j.n_modes
    n_fine = 8 * n
    h = length / n_fine
    # grow symmetrically on the oversampled grid
    steps = np.arange(1, n_fine // 2)
    ratio_p = (deta.eval_at(a + steps * h) / scale).real
    ratio_m = (deta.eval_at(a - steps * h) / scale).real
    ok_p = (ratio_p >= c0) & (ratio_p <= 1.0 / c0)
    ok_m = (ratio_m >= c0) & (ratio_m <= 1.0 / c0)
    kp = int(np.argmin(ok_p)) if not ok_p.all() else ok_p.size
    km = int(np.argmin(ok_m)) if not ok_m.all() else ok_m.size
    k = min(kp, km)
    if k * h < 4.0 * length / n:
        raise WindowCollapse(f"window {k * h:.3e} below 4 grid steps")
    lo, hi = a - k * h, a + k * h
    z_a = complex(eta_j.eval_at(a)[0])

    # psi1 on the window, monotone interpolant for its inverse
    ls = np.linspace(lo, hi, 8 * max(k, 8) + 1)
    psi1 = ((eta_j.eval_at(ls) - z_a) / scale).real
    if np.any(np.diff(psi1) <= 0):
        raise WindowCollapse("psi1 not strictly increasing on the window")
    inv = PchipInterpolator(psi1, ls, extrapolate=False)

    # disk radius: curve outside the window must stay out of the disk
    all_l = np.arange(4 * n) * (length / (4 * n))
    rel = np.remainder(all_l - a + length / 2.0, length) - length / 2.0
    outside = (rel < lo - a) | (rel > hi - a)
    curve = eta_j.values(4 * n)
    d_out = np.abs(curve[outside] - z_a).min() if outside.any() else np.inf
    d_in = np.abs(curve[~outside] - z_a).max()
    radius = 0.99 * min(d_out, d_in)
    return BoundaryChart(eta_j, a, chart_index, float(radius), z_a, scale,
                         (lo, hi), inv, c0)


def _refine_s(chart: BoundaryChart, zeta1: float, s0: float,
              tol: float = 1e-12, max_iter: int = 50) -> float:
    """Newton refinement of psi1(s) = zeta1 from the interpolant's estimate."""
    deta = bc.derivative_gamma(chart.eta_j)
    s = s0
    for _ in range(max_iter):
        f = chart.psi(s)[0].real - zeta1
        df = (deta.eval_at(s)[0] / chart.zeta_scale).real
        step = f / df
        s -= step
        if abs(step) < tol * max(1.0, abs(s)):
            break
    return float(s)


def rectify(chart: BoundaryChart, z: complex) -> tuple[float, float]:
    """Chart coordinates (s, r) of a point near the trace curve."""
    zeta = chart.zeta(z)
    lo, hi = chart.gamma_window
    rng = chart.psi1_inverse.x
    if not (rng[0] <= zeta.real <= rng[-1]):
        raise OutOfChart(f"zeta_1 = {zeta.real:.4f} outside [{rng[0]:.4f}, {rng[-1]:.4f}]")
    s0 = float(chart.psi1_inverse(zeta.real))
    s = _refine_s(chart, zeta.real, s0)
    s = min(max(s, lo), hi)
    psi2 = chart.psi(s)[0].imag
    return s, float(zeta.imag - psi2)


def unrectify(chart: BoundaryChart, s: float, r: float) -> complex:
    """Inverse of rectify: closed form, no iteration needed."""
    if not chart.contains_l(s):
        raise OutOfChart(f"s = {s:.4f} outside window {chart.gamma_window}")
    psi = chart.psi(s)[0]
    return complex(chart.zeta_shift + chart.zeta_scale * (psi + 1j * r))


_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(16)


def _panel_quad(fun, a: float, b: float) -> complex:
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    x = mid + half * _GAUSS_X
    return complex(np.sum(fun(x) * _GAUSS_W) * half)


def _graded_edges(a: float, b: float, toward_a: bool, finest: float) -> np.ndarray:
    """Dyadic panel edges of [a, b] refined toward one end."""
    span = b - a
    q = max(1, int(np.ceil(np.log2(span / max(finest, 1e-300)))))
    fracs = np.concatenate([[0.0], 2.0 ** np.arange(-q, 1)])
    if toward_a:
        return a + span * fracs
    return b - span * fracs[::-1]


def split_cauchy(eta_k: BoundaryFunction | None, eta_j: BoundaryFunction,
                 z: complex, s: float, delta: float | None = None) -> complex:
    """Cauchy integral for a target inside the exclusion band.

    Uses the subtracted form
    (1/2 pi i) int (eta_k - eta_k(s)) d_gamma(eta_j) / (eta_j - z) dl + eta_k(s),
    valid when eta_j winds once around z.  The integrand is bounded near the
    boundary foot s; panels graded toward s resolve its oscillation scale.
    """
    length = eta_j.length
    n = eta_j.n_modes
    if delta is None:
        delta = 8.0 * length / n
    if delta < 4.0 * length / n:
        raise DeltaTooSmall(f"delta {delta:.3e} below 4 grid steps")
    delta = min(delta, 0.25 * length)
    deta = bc.derivative_gamma(eta_j)
    ek_s = 1.0 if eta_k is None else complex(eta_k.eval_at(s)[0])

    def integrand(ls):
        num = 0.0 if eta_k is None else (eta_k.eval_at(ls) - ek_s)
        if eta_k is None:
            return np.zeros_like(ls, dtype=complex)
        return num * deta.eval_at(ls) / (eta_j.eval_at(ls) - z)

    if eta_k is None:
        return complex(1.0)  # winding-1 premise: the constant reconstructs itself

    dist = float(ap.contour_distance(eta_j, z))
    finest = max(dist / 4.0, length / (64.0 * n))
    total = 0.0 + 0.0j
    # near piece: [s - delta, s] and [s, s + delta], graded toward s
    for edges in (_graded_edges(s - delta, s, toward_a=False, finest=finest),
                  _graded_edges(s, s + delta, toward_a=True, finest=finest)):
        for a_, b_ in zip(edges[:-1], edges[1:]):
            total += _panel_quad(integrand, a_, b_)
    # far piece: smooth, uniform panels around the rest of the circle
    n_far = max(16, n // 4)
    far_edges = np.linspace(s + delta, s + length - delta, n_far + 1)
    for a_, b_ in zip(far_edges[:-1], far_edges[1:]):
        total += _panel_quad(integrand, a_, b_)
    return complex(total / (2j * np.pi) + ek_s)


def _near_band(eta_j: BoundaryFunction, z: complex) -> bool:
    """True when plain adaptive quadrature would refuse the target."""
    dist = float(ap.contour_distance(eta_j, z))
    n_q = ap._node_count(eta_j, dist, squared=False)
    eps_min = 4.0 * ap._z_arclength(eta_j) / n_q
    return dist < eps_min


def _coordinate_at(e: TraceTuple, j: int, z: complex, s_foot: float,
                   delta: float | None = None) -> np.ndarray:
    """All n coordinates of the image point above z in chart j."""
    out = np.empty(len(e), dtype=complex)
    near = _near_band(e[j], z)
    for k in range(len(e)):
        if near:
            out[k] = split_cauchy(e[k], e[j], z, s_foot, delta)
        else:
            out[k] = ap.cauchy_integral(e[k], e[j], z)
    return out


def pair_points(chart: BoundaryChart, chart_p: BoundaryChart,
                p_prime: np.ndarray, e: TraceTuple,
                delta: float | None = None) -> np.ndarray:
    """Reference-image point paired with a perturbed-image point.

    Matches the rectified coordinates: read (s, r) of the perturbed point in
    its own chart, place the same (s, r) in the reference chart and evaluate
    the reference immersion there.  Points on the curve (r = 0) map to the
    boundary trace values at the same arclength, exactly.
    """
    j = chart.chart_index
    if chart_p.chart_index != j:
        raise OutOfChart("charts use different coordinate projections")
    z_p = complex(p_prime[j])
    s, r = rectify(chart_p, z_p)
    if r == 0.0:
        return np.array([complex(e[k].eval_at(s)[0]) for k in range(len(e))])
    z = unrectify(chart, s, r)
    return _coordinate_at(e, j, z, s, delta)


@dataclass
class DiagnosticReport:
    """Near-boundary pairing discrepancy, per anchor and global."""

    anchors: list = field(default_factory=list)
    global_sup: float = 0.0

    def to_json(self) -> dict:
        return {"anchors": self.anchors, "global_sup": self.global_sup}

    def save(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


def near_boundary_diagnostic(e: TraceTuple, e_prime: TraceTuple,
                             n_anchors: int = 8, depth: float = 0.05,
                             n_depths: int = 4, n_feet: int = 3,
                             delta: float | None = None) -> DiagnosticReport:
    """Sup of |pair(p') - p'| over sampled near-boundary perturbed points.

    For each equispaced anchor, the chart index with the largest tangential
    derivative is tried first; anchors where every index fails are recorded
    and skipped.  Perturbed points are synthesized at rectified depths
    r in (0, depth] above several window feet.
    """
    length = e.length
    report = DiagnosticReport()
    n_built = 0
    for i in range(n_anchors):
        a = i * length / n_anchors
        derivs = [abs(complex(bc.derivative_gamma(e[j]).eval_at(a)[0]))
                  for j in range(len(e))]
        entry = {"a": a, "chart_j": None, "c0": _C0, "window": None,
                 "sup_discrepancy": None, "n_failed": 0}
        chart = chart_p = None
        for j in np.argsort(derivs)[::-1]:
            try:
                chart = build_chart(e[int(j)], a, int(j))
                chart_p = build_chart(e_prime[int(j)], a, int(j))
                # the pairing needs a single preimage: probe the interior side
                z_probe = unrectify(chart, a, depth)
                if ap.winding_number(e[int(j)], z_probe) != 1:
                    raise OutOfChart("projection not single-sheeted here")
                entry["chart_j"] = int(j)
                break
            except (DerivativeVanishes, WindowCollapse, OutOfChart,
                    errors.NonIntegerWinding, errors.TooCloseToContour):
                chart = chart_p = None
        if chart is None:
            entry["n_failed"] = len(e)
            report.anchors.append(entry)
            continue
        n_built += 1
        entry["window"] = list(chart.gamma_window)
        lo, hi = chart_p.gamma_window
        wl = hi - lo
        feet = a + np.linspace(-0.25, 0.25, n_feet) * wl
        depths = depth * np.arange(1, n_depths + 1) / n_depths
        sup = 0.0
        n_failed = 0
        for s0 in feet:
            for r0 in depths:
                try:
                    z_p = unrectify(chart_p, float(s0), float(r0))
                    j = chart.chart_index
                    p_prime = _coordinate_at(e_prime, j, z_p, float(s0), delta)
                    p = pair_points(chart, chart_p, p_prime, e, delta)
                    sup = max(sup, float(np.abs(p - p_prime).max()))
                except (OutOfChart, DeltaTooSmall) as exc:
                    n_failed += 1
        entry["sup_discrepancy"] = sup
        entry["n_failed"] = n_failed
        report.anchors.append(entry)
        report.global_sup = max(report.global_sup, sup)
    if n_built == 0:
        raise AllChartsFailed("no anchor admitted a valid chart")
    return report
