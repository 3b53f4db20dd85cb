"""Sweep harness: perturbation families, stability measurements, outputs.

A sweep walks a perturbation parameter toward zero, builds the perturbed DN
operator, transports the reference immersion traces, reconstructs both image
clouds on a common target grid and reports the Hausdorff distances, the
trace-transport operator ratio, the near-boundary pairing discrepancy and
the immersion margins, together with log-log slopes against the operator
perturbation size t.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import argument as ap
from . import boundary as bc
from . import dn as dnm
from . import holomorphic as hm
from . import metrics as mt
from . import nearboundary as nb
from .errors import ConfigInvalid, EitlabError
from .holomorphic import TraceTuple

__all__ = [
    "ExperimentConfig",
    "SweepRecord",
    "run_sweep",
    "emit_outputs",
    "immersion_from_recipe",
]

_RECIPES = {
    "z": lambda w: w,
    "z2": lambda w: w ** 2,
    "z3": lambda w: w ** 3,
    "expz": lambda w: np.exp(w),
}


@dataclass
class ExperimentConfig:
    """Declarative description of one perturbation sweep."""

    base_surface: dict
    perturbation_family: dict
    immersion: str
    n_modes: int = 256
    epsilon: float = 0.2
    grid_resolution: int = 48
    seed: int = 7
    output_dir: str = "sweep_out"
    n_anchors: int = 8
    depth: float = 0.05

    def validate(self):
        if self.base_surface.get("kind") != "disk":
            raise ConfigInvalid("base_surface.kind must be 'disk'")
        fam = self.perturbation_family
        if fam.get("kind") not in ("conformal_polynomial", "fem_metric"):
            raise ConfigInvalid("unknown perturbation_family.kind")
        ps = fam.get("parameter_list", [])
        if not ps:
            raise ConfigInvalid("empty parameter_list")
        if any(p < 0 for p in ps):
            raise ConfigInvalid("parameters must be nonnegative")
        if list(ps) != sorted(ps, reverse=True):
            raise ConfigInvalid("parameter_list must decrease toward 0")
        for name in self.immersion.split(","):
            if name.strip() not in _RECIPES:
                raise ConfigInvalid(f"unknown immersion recipe {name!r}")
        if self.n_modes < 16 or self.n_modes % 2:
            raise ConfigInvalid("n_modes must be even and >= 16")
        if self.epsilon <= 0 or self.grid_resolution < 8:
            raise ConfigInvalid("epsilon > 0 and grid_resolution >= 8 required")

    @staticmethod
    def from_json(path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
        known = {f for f in ExperimentConfig.__dataclass_fields__}
        extra = set(raw) - known
        if extra:
            raise ConfigInvalid(f"unknown config keys: {sorted(extra)}")
        try:
            cfg = ExperimentConfig(**raw)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from exc
        cfg.validate()
        return cfg


@dataclass
class SweepRecord:
    """Measurements at one perturbation parameter."""

    s: float
    t: float = np.nan
    t_alt: float = np.nan
    lemma1_ratio: float = np.nan
    d_h_interior: float = np.nan
    d_h_full: float = np.nan
    near_boundary_sup: float = np.nan
    kappa: int = -1
    kappa_prime: int = -1
    immersion_margin: float = np.nan
    wall_time: float = np.nan
    valid: bool = True
    failure: str = ""

    CSV_FIELDS = ("s", "t", "t_alt", "lemma1_ratio", "d_h_interior", "d_h_full",
                  "near_boundary_sup", "kappa", "kappa_prime",
                  "immersion_margin", "valid", "failure")


def immersion_from_recipe(recipe: str, n_modes: int) -> TraceTuple:
    """Boundary traces of the named holomorphic coordinates on the disk."""
    th = np.arange(n_modes) * (2.0 * np.pi / n_modes)
    w = np.exp(1j * th)
    traces = []
    for name in recipe.split(","):
        fn = _RECIPES[name.strip()]
        traces.append(bc.from_samples(fn(w), 2.0 * np.pi))
    return TraceTuple(tuple(traces))


def _perturbed_dn(cfg: ExperimentConfig, s: float):
    fam = cfg.perturbation_family
    if fam["kind"] == "conformal_polynomial":
        if s == 0.0:
            return dnm.dn_disk(cfg.n_modes)
        dom = dnm.ConformalDomain((s,))
        return dnm.dn_conformal(dom, cfg.n_modes).operator
    # fem_metric: anisotropic interior edge scaling of the disk mesh,
    # identity on the boundary, so the conformal class actually moves
    res = int(fam.get("resolution", 24))
    mesh = dnm.unit_disk_mesh(res)
    verts, tris, tl = mesh.vertices, mesh.triangles, mesh.tri_lengths.copy()
    for i in range(3):
        u = verts[tris[:, (i + 1) % 3]]
        v = verts[tris[:, (i + 2) % 3]]
        mid = 0.5 * (u + v)
        d = v - u
        ang = np.arctan2(d[:, 1], d[:, 0])
        bump = np.clip(1.0 - np.linalg.norm(mid, axis=1), 0.0, 1.0)
        tl[:, i] *= 1.0 + s * bump * np.sin(2.0 * ang)
    pert = dnm.TriMesh(verts, tris, mesh.boundary_loop,
                       mesh.boundary_arclength, tl)
    return dnm.dn_fem(pert, n_modes=cfg.n_modes, rescale_to=2.0 * np.pi, order=2)


def _lemma1_ratio(lam, lam_p, proj_p, t: float, seed: int, n_traces: int = 5) -> float:
    """Max over a trace test set of ||transport(eta) - eta||_C2 / (t ||eta||_H3)."""
    if t <= 0:
        return np.nan
    n = lam.n_modes
    proj = hm.build_projections(lam, 0)
    rng = np.random.default_rng(seed)
    th = np.arange(n) * (lam.length / n)
    worst = 0.0
    for _ in range(n_traces):
        vals = np.zeros(n)
        for m in range(1, 9):
            vals += rng.standard_normal() * np.cos(2 * np.pi * m * th / lam.length)
            vals += rng.standard_normal() * np.sin(2 * np.pi * m * th / lam.length)
        f = bc.from_samples(vals, lam.length)
        eta = hm.complete_trace(f, 0.0, lam, proj)
        eta_p = hm.beta_gamma(eta, lam_p, proj_p)
        num = bc.ck_norm(eta_p - eta, 2)
        den = t * bc.sobolev_norm(eta, 3)
        worst = max(worst, num / den)
    return worst


def run_sweep(cfg: ExperimentConfig, verbose: bool = False):
    """Execute the sweep; returns (records, summary)."""
    cfg.validate()
    n = cfg.n_modes
    lam = dnm.dn_disk(n)
    e = immersion_from_recipe(cfg.immersion, n)
    e = TraceTuple(e.traces, source_dn=lam)
    kappa_ref = hm.estimate_kappa(lam)
    # one shared winding classification: both clouds sample identical targets
    fields = [ap.classify(e[j], cfg.grid_resolution, cfg.epsilon)
              for j in range(len(e))]
    cloud_ref = ap.reconstruct(e, cfg.epsilon, cfg.grid_resolution, fields=fields)
    fill_ref = mt.fill_distance(cloud_ref.interior_points())

    records = []
    clouds = []
    for s in cfg.perturbation_family["parameter_list"]:
        rec = SweepRecord(s=float(s))
        t0 = time.perf_counter()
        try:
            lam_p = _perturbed_dn(cfg, float(s))
            rec.t = hm.dn_distance(lam, lam_p)
            rec.t_alt = bc.operator_norm(lam_p - lam, 3, 2)
            rec.kappa = kappa_ref
            rec.kappa_prime = hm.estimate_kappa(lam_p)
            if rec.kappa_prime != rec.kappa:
                rec.valid = False
                rec.failure = "kappa mismatch"
                rec.wall_time = time.perf_counter() - t0
                records.append(rec)
                continue
            proj_p = hm.build_projections(lam_p, rec.kappa_prime, seed=cfg.seed)
            cert = 1e-8 if cfg.perturbation_family["kind"] == "conformal_polynomial" else 1e-2
            e_p = hm.transport_immersion(e, lam_p, proj_p, cert_tol_rel=cert)
            rec.lemma1_ratio = _lemma1_ratio(lam, lam_p, proj_p, rec.t, cfg.seed)
            cloud_p = ap.reconstruct(e_p, cfg.epsilon, cfg.grid_resolution,
                                     fields=fields)
            rec.d_h_interior = mt.hausdorff(cloud_ref.interior_points(),
                                            cloud_p.interior_points()).d_h
            rec.d_h_full = mt.hausdorff(cloud_ref.points, cloud_p.points).d_h
            diag = nb.near_boundary_diagnostic(e, e_p, cfg.n_anchors, cfg.depth)
            rec.near_boundary_sup = diag.global_sup
            imm = ap.immersion_check(e_p, fields, m=len(e))
            rec.immersion_margin = imm.min_margin if imm.applicable else np.nan
            clouds.append((float(s), cloud_ref, cloud_p))
        except EitlabError as exc:
            rec.valid = False
            rec.failure = f"{type(exc).__name__}: {exc}"
        rec.wall_time = time.perf_counter() - t0
        if verbose:
            print(f"s={s}: t={rec.t:.3e} d_h={rec.d_h_interior:.3e} "
                  f"nb={rec.near_boundary_sup:.3e} ({rec.wall_time:.1f}s)")
        records.append(rec)

    summary = _summarize(records, fill_ref, kappa_ref)
    summary["config"] = {k: getattr(cfg, k) for k in
                         ("immersion", "n_modes", "epsilon", "grid_resolution",
                          "seed")}
    summary["perturbation_family"] = cfg.perturbation_family
    return records, summary, clouds


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    good = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if good.sum() < 2:
        return np.nan
    return float(np.polyfit(np.log(x[good]), np.log(y[good]), 1)[0])


def _summarize(records, fill_ref: float, kappa_ref: int) -> dict:
    ok = [r for r in records if r.valid]
    t = np.array([r.t for r in ok])
    return {
        "kappa": int(kappa_ref),
        "fill_distance_ref": fill_ref,
        "n_records": len(records),
        "n_valid": len(ok),
        "slope_dh_interior_vs_t": _loglog_slope(
            t, np.array([r.d_h_interior for r in ok])),
        "slope_dh_full_vs_t": _loglog_slope(
            t, np.array([r.d_h_full for r in ok])),
        "slope_nb_sup_vs_t": _loglog_slope(
            t, np.array([r.near_boundary_sup for r in ok])),
        "lemma1_ratio_min": float(np.nanmin([r.lemma1_ratio for r in ok]))
        if ok else np.nan,
        "lemma1_ratio_max": float(np.nanmax([r.lemma1_ratio for r in ok]))
        if ok else np.nan,
        "immersion_margin_min": float(np.nanmin([r.immersion_margin for r in ok]))
        if ok else np.nan,
    }


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _svg_scatter(path: str, cloud_a, cloud_b, size: int = 480):
    """Deterministic scatter of the first complex coordinate of two clouds."""
    pa = cloud_a.points[:, 0]
    pb = cloud_b.points[:, 0]
    allp = np.concatenate([pa, pb])
    x0, x1 = allp.real.min(), allp.real.max()
    y0, y1 = allp.imag.min(), allp.imag.max()
    span = max(x1 - x0, y1 - y0, 1e-12)
    pad = 0.05 * span

    def sx(x):
        return (x - x0 + pad) / (span + 2 * pad) * size

    def sy(y):
        return size - (y - y0 + pad) / (span + 2 * pad) * size

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
             f'height="{size}" viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    for pts, color in ((pa, "#1f77b4"), (pb, "#d62728")):
        for z in pts:
            parts.append(f'<circle cx="{sx(z.real):.2f}" cy="{sy(z.imag):.2f}" '
                         f'r="1.5" fill="{color}" fill-opacity="0.6"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))


def emit_outputs(records, summary, clouds, output_dir: str):
    """Write sweep.csv, summary.json, clouds/*.csv, plotdata/*.tsv and SVGs.

    Wall times are kept out of sweep.csv so reruns with the same seed produce
    byte-identical tables; timings go to timings.csv instead.
    """
    os.makedirs(output_dir, exist_ok=True)
    os.makedirs(os.path.join(output_dir, "clouds"), exist_ok=True)
    os.makedirs(os.path.join(output_dir, "plotdata"), exist_ok=True)
    os.makedirs(os.path.join(output_dir, "plots"), exist_ok=True)

    with open(os.path.join(output_dir, "sweep.csv"), "w") as fh:
        fh.write(",".join(SweepRecord.CSV_FIELDS) + "\n")
        for r in records:
            fh.write(",".join(_fmt(getattr(r, f)) for f in SweepRecord.CSV_FIELDS)
                     + "\n")
    with open(os.path.join(output_dir, "timings.csv"), "w") as fh:
        fh.write("s,wall_time\n")
        for r in records:
            fh.write(f"{_fmt(r.s)},{r.wall_time:.3f}\n")
    with open(os.path.join(output_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, default=float)
    with open(os.path.join(output_dir, "plotdata", "dh_vs_t.tsv"), "w") as fh:
        fh.write("t\td_h_interior\n")
        for r in records:
            if r.valid:
                fh.write(f"{_fmt(r.t)}\t{_fmt(r.d_h_interior)}\n")
    for s, ca, cb in clouds:
        tag = _fmt(float(s)).replace(".", "p").replace("-", "m")
        ca.to_csv(os.path.join(output_dir, "clouds", f"ref_s{tag}.csv"))
        cb.to_csv(os.path.join(output_dir, "clouds", f"pert_s{tag}.csv"))
        _svg_scatter(os.path.join(output_dir, "plots", f"clouds_s{tag}.svg"),
                     ca, cb)
