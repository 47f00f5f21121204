"""Angular distortion, bijectivity and Beltrami statistics of a uv map."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .mesh import TriMesh, boundary_loop, corner_angles, signed_areas
from .quasiconformal import DilationSummary, beltrami_coefficient, dilation_summary

HIST_RANGE = (-10.0, 10.0)
HIST_BINS = 100
# relative area below which a uv face counts as degenerate
DEGENERATE_RTOL = 1e-14


def _uv_of(uv) -> np.ndarray:
    uv = getattr(uv, "uv", uv)
    uv = np.asarray(uv)
    if not np.iscomplexobj(uv) and uv.ndim == 2:
        uv = uv[:, 0] + 1j * uv[:, 1]
    return uv.astype(complex)


def degenerate_uv_faces(uv: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Mask of faces whose uv triangle has (numerically) zero area."""
    c = uv[faces]
    edge = np.abs(c - np.roll(c, 1, axis=1)).max(axis=1)
    return np.abs(signed_areas(uv, faces)) <= DEGENERATE_RTOL * np.maximum(edge, 1e-300) ** 2


@dataclass(eq=False)
class DistortionReport:
    """Per-corner angle change ``uv angle - 3D angle`` in degrees.

    ``distortion`` is ``(F, 3)``; corners of degenerate uv faces are NaN and
    left out of every statistic. The histogram has ``HIST_BINS`` uniform bins
    over ``HIST_RANGE`` plus the ``below`` / ``above`` outlier counts.
    """

    distortion: np.ndarray
    mean_abs_deg: float
    sd_abs_deg: float
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    hist_below: int
    hist_above: int
    flips: int
    degenerate_faces: np.ndarray
    K: float = float("nan")
    timings: dict = field(default_factory=dict)

    @property
    def num_corners(self) -> int:
        return int(np.isfinite(self.distortion).sum())

    def to_dict(self) -> dict:
        return {
            "mean_abs_deg": self.mean_abs_deg,
            "sd_abs_deg": self.sd_abs_deg,
            "flips": self.flips,
            "K": _json_float(self.K),
            "num_corners": self.num_corners,
            "degenerate_faces": int(len(self.degenerate_faces)),
            "timings": {k: float(v) for k, v in self.timings.items()},
            "histogram": {
                "edges": self.hist_edges.tolist(),
                "counts": self.hist_counts.tolist(),
                "below": self.hist_below,
                "above": self.hist_above,
            },
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_text(self) -> str:
        lines = [
            f"mean_abs_deg {self.mean_abs_deg:.4f}",
            f"sd_abs_deg {self.sd_abs_deg:.4f}",
            f"flips {self.flips}",
            f"K {self.K:.6g}",
            f"num_corners {self.num_corners}",
            f"degenerate_faces {len(self.degenerate_faces)}",
        ]
        lines += [f"time_{k} {v:.6g}" for k, v in self.timings.items()]
        return "\n".join(lines)


def _json_float(x):
    return float(x) if np.isfinite(x) else None


def angular_distortion(mesh: TriMesh, uv, timings: dict | None = None, K: float = float("nan")) -> DistortionReport:
    uvc = _uv_of(uv)
    faces = mesh.faces
    if len(uvc) != mesh.num_vertices:
        raise ValueError(f"uv has {len(uvc)} vertices, mesh has {mesh.num_vertices}")
    bad = degenerate_uv_faces(uvc, faces)
    good = ~bad
    d = np.full((len(faces), 3), np.nan)
    if good.any():
        d[good] = np.degrees(corner_angles(uvc, faces[good]) - corner_angles(mesh.vertices, faces[good]))
    a = np.abs(d[good]).ravel()
    mean = float(a.mean()) if len(a) else float("nan")
    sd = float(a.std(ddof=1)) if len(a) > 1 else 0.0
    vals = d[good].ravel()
    edges = np.linspace(*HIST_RANGE, HIST_BINS + 1)
    inside = (vals >= edges[0]) & (vals <= edges[-1])
    counts, _ = np.histogram(vals[inside], bins=edges)
    if timings is None and hasattr(uv, "provenance"):
        timings = uv.provenance.get("timings", {})
    return DistortionReport(
        distortion=d,
        mean_abs_deg=mean,
        sd_abs_deg=sd,
        hist_edges=edges,
        hist_counts=counts,
        hist_below=int((vals < edges[0]).sum()),
        hist_above=int((vals > edges[-1]).sum()),
        flips=int((signed_areas(uvc, faces) <= 0).sum()),
        degenerate_faces=np.flatnonzero(bad),
        K=K,
        timings=dict(timings or {}),
    )


# ------------------------------------------------------------ bijectivity


@dataclass(frozen=True, eq=False)
class BijectivityReport:
    flips: int
    flipped_faces: np.ndarray
    boundary_simple: bool

    @property
    def ok(self) -> bool:
        return self.flips == 0 and self.boundary_simple


def _orient(a, b, c):
    return np.sign((b.real - a.real) * (c.imag - a.imag) - (b.imag - a.imag) * (c.real - a.real))


def _on_segment(a, b, p):
    # p collinear with a-b; inside the closed bounding box?
    return (
        (np.minimum(a.real, b.real) <= p.real)
        & (p.real <= np.maximum(a.real, b.real))
        & (np.minimum(a.imag, b.imag) <= p.imag)
        & (p.imag <= np.maximum(a.imag, b.imag))
    )


def segments_intersect(p1, p2, q1, q2) -> np.ndarray:
    """Closed-segment intersection test, vectorized over broadcast inputs."""
    d1, d2 = _orient(q1, q2, p1), _orient(q1, q2, p2)
    d3, d4 = _orient(p1, p2, q1), _orient(p1, p2, q2)
    hit = (d1 * d2 < 0) & (d3 * d4 < 0)
    hit |= (d1 == 0) & _on_segment(q1, q2, p1)
    hit |= (d2 == 0) & _on_segment(q1, q2, p2)
    hit |= (d3 == 0) & _on_segment(p1, p2, q1)
    hit |= (d4 == 0) & _on_segment(p1, p2, q2)
    return hit


def polygon_is_simple(points) -> bool:
    """True if the closed polygon has no self-intersection.

    Sweep over x: segments are visited by left endpoint and only tested
    against the active segments whose x-range overlaps.
    """
    z = np.asarray(points, dtype=complex)
    n = len(z)
    if n < 3:
        return False
    a, b = z, np.roll(z, -1)
    if np.any(a == b):
        return False
    # consecutive edges may only share their common vertex: reject fold-backs
    nxt = np.roll(b, -1)
    fold = (_orient(a, b, nxt) == 0) & (((b - a) * np.conj(nxt - b)).real < 0)
    if fold.any():
        return False
    lo = np.minimum(a.real, b.real)
    hi = np.maximum(a.real, b.real)
    order = np.argsort(lo, kind="stable")
    active = np.empty(0, dtype=np.int64)
    for i in order:
        active = active[hi[active] >= lo[i]]
        if len(active):
            j = active[(active != (i + 1) % n) & (active != (i - 1) % n)]
            if len(j) and segments_intersect(a[i], b[i], a[j], b[j]).any():
                return False
        active = np.append(active, i)
    return True


def bijectivity_report(mesh: TriMesh, uv) -> BijectivityReport:
    uvc = _uv_of(uv)
    flipped = np.flatnonzero(signed_areas(uvc, mesh.faces) <= 0)
    loop = getattr(uv, "boundary", None)
    if loop is None:
        loop = boundary_loop(mesh)
    return BijectivityReport(flips=len(flipped), flipped_faces=flipped, boundary_simple=polygon_is_simple(uvc[loop]))


def conformality_stats(mesh: TriMesh, uv, bins: int = 50) -> DilationSummary:
    """``|mu|`` per face and maximal dilation of the map mesh -> uv."""
    return dilation_summary(beltrami_coefficient(mesh.vertices, mesh.faces, _uv_of(uv)), bins=bins)


def evaluate(mesh: TriMesh, uv) -> DistortionReport:
    """Distortion report with the maximal dilation ``K`` filled in."""
    return angular_distortion(mesh, uv, K=conformality_stats(mesh, uv).K)
