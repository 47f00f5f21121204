"""Disk conformal parameterization of a simply-connected open mesh.

double cover -> spherical conformal map -> Moebius placement -> stereographic
projection of the kept half -> boundary normalization -> linear Beltrami
solve with the Beltrami coefficient of (normalized region -> surface).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .double_cover import GluedMesh, double_cover
from .linalg import DEFAULT_TOL, SolveLog
from .mesh import TriMesh, boundary_loop, mostly_clockwise, signed_areas
from .quasiconformal import MU_BOUND, beltrami_coefficient, lbs_reconstruct
from .spherical import (
    choose_anchor_face,
    inverse_stereographic,
    spherical_conformal_map,
    stereographic_project,
)

BOUNDARY_TOL = 1e-9


class ParameterizationError(RuntimeError):
    def __init__(self, stage: str, message: str, faces=None):
        self.stage = stage
        self.faces = None if faces is None else np.asarray(faces)
        super().__init__(f"[{stage}] {message}")


@dataclass
class ParamOptions:
    skip_south_pole: bool = False
    tol: float = DEFAULT_TOL
    anchor_face: Optional[int] = None
    mu_bound: float = MU_BOUND
    calibrate_anchor: bool = True


@dataclass(eq=False)
class DiskParameterization:
    """Per-vertex disk coordinates (complex) over the input mesh."""

    mesh: TriMesh
    uv: np.ndarray
    boundary: np.ndarray
    region: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def uv2(self) -> np.ndarray:
        return np.column_stack([self.uv.real, self.uv.imag])


# -------------------------------------------------------------- stages


def mobius_to_hemispheres(sphere: np.ndarray, glued: GluedMesh) -> np.ndarray:
    """Move the source half of the sphere onto the southern hemisphere.

    Rotates the area-weighted centroid of the source faces to the South
    pole, then rescales the North-pole stereographic plane so the seam's
    geometric-mean modulus is 1, which puts the seam on the equator on
    average.
    """
    p = np.asarray(sphere, dtype=float)
    f = glued.faces[: glued.num_source_faces]
    a, b, c = p[f[:, 0]], p[f[:, 1]], p[f[:, 2]]
    area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    centroid = (area[:, None] * (a + b + c) / 3.0).sum(axis=0)
    if np.linalg.norm(centroid) > 1e-9 * max(area.sum(), 1e-300):
        d = centroid / np.linalg.norm(centroid)
    else:
        seam = p[glued.seam]
        _, _, vt = np.linalg.svd(seam - seam.mean(axis=0))
        d = vt[-1]
        if np.dot(d, p[: glued.source.num_vertices].mean(axis=0)) < 0:
            d = -d
    rot, _ = Rotation.align_vectors([[0.0, 0.0, -1.0]], [d])
    q = rot.apply(p)
    q /= np.linalg.norm(q, axis=1, keepdims=True)

    at_north = 1.0 - q[:, 2] < 1e-14
    z = np.zeros(len(q), dtype=complex)
    z[~at_north] = stereographic_project(q[~at_north])
    scale = np.exp(np.mean(np.log(np.abs(z[glued.seam]))))
    out = q.copy()
    out[~at_north] = inverse_stereographic(z[~at_north] / scale)
    return out


def normalize_boundary(region: np.ndarray, boundary) -> np.ndarray:
    """Push the boundary vertices radially onto the unit circle."""
    z = np.array(region, dtype=complex)
    b = np.asarray(boundary)
    r = np.abs(z[b])
    if np.any(r == 0):
        raise ParameterizationError("normalization", "boundary vertex at the origin")
    z[b] = z[b] / r
    return z


def _check_disk(mesh: TriMesh, uv: np.ndarray, boundary: np.ndarray):
    problems = []
    on_b = np.zeros(mesh.num_vertices, dtype=bool)
    on_b[boundary] = True
    off_circle = np.abs(np.abs(uv[on_b]) - 1.0) >= BOUNDARY_TOL
    if off_circle.any():
        problems.append(f"{off_circle.sum()} boundary vertices off the unit circle")
    outside = np.abs(uv[~on_b]) >= 1.0
    if outside.any():
        problems.append(f"{outside.sum()} interior vertices not strictly inside the disk")
    flipped = np.flatnonzero(signed_areas(uv, mesh.faces) <= 0)
    if len(flipped):
        problems.append(f"{len(flipped)} flipped faces")
    return problems, flipped


def disk_conformal_parameterize(mesh: TriMesh, options: Optional[ParamOptions] = None, **kwargs) -> DiskParameterization:
    """Bijective disk conformal map of a disk-topology mesh.

    Keyword arguments override fields of :class:`ParamOptions`. Raises
    :class:`ParameterizationError` if the result violates the disk
    contract (boundary on the unit circle, interior inside, no flips).
    """
    opts = options or ParamOptions()
    if kwargs:
        opts = ParamOptions(**{**opts.__dict__, **kwargs})
    log = SolveLog()
    timings: dict = {}
    info: dict = {}
    t_start = time.perf_counter()

    t = time.perf_counter()
    glued = double_cover(mesh)
    timings["double_cover"] = time.perf_counter() - t

    anchor = choose_anchor_face(glued, opts.anchor_face)
    sphere = spherical_conformal_map(
        glued,
        skip_south_pole=opts.skip_south_pole,
        anchor=anchor,
        tol=opts.tol,
        log=log,
        timings=timings,
        info=info,
        calibrate=opts.calibrate_anchor,
    )

    t = time.perf_counter()
    sphere = mobius_to_hemispheres(sphere, glued)
    V = mesh.num_vertices
    try:
        z = stereographic_project(sphere[:V])
    except ValueError as exc:
        raise ParameterizationError("mobius_projection", str(exc)) from None
    if mostly_clockwise(z, mesh.faces):
        z = np.conj(z)
    timings["mobius_projection"] = time.perf_counter() - t

    t = time.perf_counter()
    loop = boundary_loop(mesh)
    region = normalize_boundary(z, loop)
    timings["normalization"] = time.perf_counter() - t

    t = time.perf_counter()
    mu = beltrami_coefficient(region, mesh.faces, mesh.vertices)
    mu, n_clamped = mu.clamped(opts.mu_bound)
    uv = lbs_reconstruct(region, mesh.faces, mu, loop, region[loop], tol=opts.tol, bound=opts.mu_bound, log=log, stage="lbs")
    timings["lbs"] = time.perf_counter() - t
    timings["total"] = time.perf_counter() - t_start

    provenance = dict(
        anchor_face=anchor.face,
        skip_south_pole=opts.skip_south_pole,
        tol=opts.tol,
        mu_bound=opts.mu_bound,
        calibrate_anchor=opts.calibrate_anchor,
        anchor_calibration=info.get("anchor_calibration", 0j),
        clamped_faces=n_clamped,
        south_pole_clamped=info.get("south_pole_clamped", 0),
        south_pole_fixed=info.get("south_pole_fixed", 0),
        region_flips=int(np.sum(signed_areas(region, mesh.faces) <= 0)),
        solves=list(log.entries),
        num_systems=log.num_systems,
        num_rhs=log.num_rhs,
        timings=timings,
    )
    problems, flipped = _check_disk(mesh, uv, loop)
    if problems:
        raise ParameterizationError("verify", "; ".join(problems), faces=flipped)
    return DiskParameterization(mesh=mesh, uv=uv, boundary=loop, region=region, provenance=provenance)
