"""Spherical conformal map of a glued genus-0 mesh.

A harmonic map to the plane with one pinned triangle, lifted to the sphere
by inverse stereographic projection, optionally followed by a South-pole
quasi-conformal correction of the region around the pinned triangle.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .double_cover import MIRROR, SEAM, GluedMesh
from .linalg import DEFAULT_TOL, SolveLog, solve_with_dirichlet
from .mesh import corner_angles, mostly_clockwise
from .quasiconformal import MU_BOUND, beltrami_coefficient, layout_faces, lbs_reconstruct

ANCHOR_SCALE = 10.0
FIX_RADIUS_FACTOR = 2.0


class PoleWarning(RuntimeWarning):
    pass


# ----------------------------------------------------------- projections


def stereographic_project(sphere: np.ndarray) -> np.ndarray:
    """North-pole projection ``(x, y, z) -> (x + iy) / (1 - z)``."""
    p = np.asarray(sphere, dtype=float)
    d = 1.0 - p[:, 2]
    if np.any(d < 1e-12):
        bad = np.flatnonzero(d < 1e-12)
        raise ValueError(f"vertices at the North pole cannot be projected: {bad.tolist()[:10]}")
    return (p[:, 0] + 1j * p[:, 1]) / d


def inverse_stereographic(z: np.ndarray) -> np.ndarray:
    """Inverse of :func:`stereographic_project`; 0 goes to the South pole."""
    z = np.asarray(z, dtype=complex)
    r2 = np.abs(z) ** 2
    d = 1.0 + r2
    p = np.column_stack([2 * z.real / d, 2 * z.imag / d, (r2 - 1) / d])
    return p / np.linalg.norm(p, axis=1, keepdims=True)


def south_project(sphere: np.ndarray) -> np.ndarray:
    """South-pole projection ``(x, y, z) -> (x + iy) / (1 + z)``."""
    p = np.asarray(sphere, dtype=float)
    return (p[:, 0] + 1j * p[:, 1]) / (1.0 + p[:, 2])


def inverse_south(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    r2 = np.abs(w) ** 2
    d = 1.0 + r2
    p = np.column_stack([2 * w.real / d, 2 * w.imag / d, (1 - r2) / d])
    return p / np.linalg.norm(p, axis=1, keepdims=True)


def orient_outward(sphere: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Reflect ``y`` if most face normals point into the sphere."""
    p = sphere
    vol = np.einsum("ij,ij->i", p[faces[:, 0]], np.cross(p[faces[:, 1]], p[faces[:, 2]]))
    if np.sum(vol < 0) > np.sum(vol > 0):
        p = p * np.array([1.0, -1.0, 1.0])
    return p


def sphere_flips(sphere: np.ndarray, faces: np.ndarray) -> int:
    """Number of spherical triangles whose normal points into the sphere."""
    p = sphere
    vol = np.einsum("ij,ij->i", p[faces[:, 0]], np.cross(p[faces[:, 1]], p[faces[:, 2]]))
    return int(np.sum(vol <= 0))


# ---------------------------------------------------------------- anchor


@dataclass(frozen=True, eq=False)
class AnchorTriangle:
    face: int
    vertices: np.ndarray
    target: np.ndarray


def _anchor_target(glued: GluedMesh, face: int) -> AnchorTriangle:
    f = glued.faces[face]
    b = layout_faces(glued.vertices, f[None, :])[0]
    longest = max(abs(b[1] - b[0]), abs(b[2] - b[1]), abs(b[0] - b[2]))
    S = ANCHOR_SCALE * np.sqrt(glued.mesh.face_areas().sum())
    return AnchorTriangle(face=int(face), vertices=f.copy(), target=b * (S / longest))


def choose_anchor_face(glued: GluedMesh, face: Optional[int] = None) -> AnchorTriangle:
    """Pick the pinned triangle for the harmonic map.

    Candidates are mirror-copy faces with no seam vertex (the pinned face
    ends up near the North pole, away from the half that is kept). The face
    with the largest minimum angle wins; ties go to the lowest index.
    ``face`` overrides the choice.
    """
    if face is not None:
        return _anchor_target(glued, face)
    tags = glued.copy_of[glued.faces]
    candidates = np.flatnonzero((tags == MIRROR).all(axis=1))
    if len(candidates) == 0:
        candidates = np.flatnonzero((tags != SEAM).any(axis=1))
    if len(candidates) == 0:
        candidates = np.arange(glued.mesh.num_faces)
    min_angle = corner_angles(glued.vertices, glued.faces[candidates]).min(axis=1)
    best = candidates[int(np.argmax(np.round(min_angle, 12)))]
    return _anchor_target(glued, best)


def central_anchor_face(glued: GluedMesh) -> AnchorTriangle:
    """Mirror-copy face farthest (in edge hops) from the seam.

    A well-conditioned choice when the South-pole correction is skipped:
    the distorted neighbourhood of the pinned face then sits as far as
    possible from the kept half. Ties are broken by the largest minimum
    angle, then lowest index.
    """
    from scipy.sparse import coo_array
    from scipy.sparse.csgraph import shortest_path

    n = glued.mesh.num_vertices
    e = glued.mesh.edges
    adj = coo_array((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n)).tocsr()
    hop = shortest_path(adj, directed=False, unweighted=True, indices=glued.seam).min(axis=0)
    faces = glued.faces
    depth = hop[faces].min(axis=1)
    depth[: glued.num_source_faces] = -1  # only mirror faces qualify
    min_angle = np.round(corner_angles(glued.vertices, faces).min(axis=1), 12)
    order = np.lexsort((np.arange(len(faces)), -min_angle, -depth))
    return _anchor_target(glued, int(order[0]))


# ------------------------------------------------------------ north step


def harmonic_plane_map(glued: GluedMesh, anchor: AnchorTriangle, tol: float = DEFAULT_TOL, log: SolveLog | None = None) -> np.ndarray:
    """Discrete harmonic map to the plane with the anchor corners pinned."""
    L = glued.laplacian()
    return solve_with_dirichlet(L, anchor.vertices, anchor.target, tol=tol, log=log, stage="harmonic")


def calibrate_anchor(z: np.ndarray, glued: GluedMesh) -> tuple[np.ndarray, complex]:
    """Remove the uniform Beltrami coefficient left by the pinned triangle.

    Far from a small pinned triangle the discrete harmonic map behaves like
    ``a/(p - p0) + b*conj(1/(p - p0))``: a conformal map followed by a fixed
    real-linear map of the plane, so its Beltrami coefficient is nearly
    constant and does not vanish under refinement. Composing with
    ``w + nu*conj(w)``, ``nu`` the median coefficient of the plane -> mesh map,
    cancels it. This equals pinning the anchor to an adjusted target triangle.
    Returns the corrected map and ``nu``.
    """
    cw = mostly_clockwise(z, glued.faces)
    w = np.conj(z) if cw else z
    mu = beltrami_coefficient(w, glued.faces, glued.vertices).mu
    mu = mu[np.isfinite(mu) & (np.abs(mu) < 1)]
    nu = complex(np.median(mu.real), np.median(mu.imag)) if len(mu) else 0j
    if abs(nu) >= 0.99:
        # not a small uniform defect; leave the map alone
        return z, 0j
    w = w + nu * np.conj(w)
    return (np.conj(w) if cw else w), nu


# ------------------------------------------------------------ south step


def _fixed_outer(w_abs: np.ndarray) -> np.ndarray:
    med = np.median(w_abs)
    fixed = np.flatnonzero(w_abs > FIX_RADIUS_FACTOR * med)
    if len(fixed) < 3:
        k = max(3, len(w_abs) // 10)
        fixed = np.sort(np.argsort(-w_abs)[:k])
    return fixed


def south_pole_correction(
    sphere: np.ndarray,
    glued: GluedMesh,
    tol: float = DEFAULT_TOL,
    log: SolveLog | None = None,
    info: Optional[dict] = None,
) -> np.ndarray:
    """Quasi-conformal correction of the region around the North pole.

    After South-pole projection the North-pole region sits in the middle of
    the plane. The outer vertices (``|w|`` above twice the median) are held
    fixed while the linear Beltrami solver rebuilds the rest with the
    Beltrami coefficient of the map from the plane back to the mesh, which
    cancels the distortion of the composite.
    """
    p = np.array(sphere, dtype=float)
    near = 1.0 + p[:, 2] < 1e-12
    if np.any(near):
        warnings.warn(f"{near.sum()} vertices at the South pole were perturbed", PoleWarning, stacklevel=2)
        p[near, 0] += 1e-9
        p[near] /= np.linalg.norm(p[near], axis=1, keepdims=True)
        p[near, 2] = np.maximum(p[near, 2], -1 + 1e-12)
    faces = glued.faces
    w = south_project(p)
    flip = mostly_clockwise(w, faces)
    if flip:
        w = np.conj(w)
    mu = beltrami_coefficient(w, faces, glued.vertices)
    mu, n_clamped = mu.clamped(MU_BOUND)
    fixed = _fixed_outer(np.abs(w))
    h = lbs_reconstruct(w, faces, mu, fixed, w[fixed], tol=tol, log=log, stage="south_pole")
    if flip:
        h = np.conj(h)
    if info is not None:
        info["south_pole_fixed"] = int(len(fixed))
        info["south_pole_clamped"] = n_clamped
    return inverse_south(h)


# ----------------------------------------------------------- orchestrate


def spherical_conformal_map(
    glued: GluedMesh,
    skip_south_pole: bool = False,
    anchor: Optional[AnchorTriangle] = None,
    tol: float = DEFAULT_TOL,
    log: SolveLog | None = None,
    timings: Optional[dict] = None,
    info: Optional[dict] = None,
    calibrate: bool = True,
) -> np.ndarray:
    """Unit-sphere embedding ``(V, 3)`` of the glued mesh, outward oriented.

    ``calibrate`` applies :func:`calibrate_anchor` to the harmonic map.
    """
    t0 = time.perf_counter()
    if anchor is None:
        anchor = choose_anchor_face(glued)
    z = harmonic_plane_map(glued, anchor, tol=tol, log=log)
    nu = 0j
    if calibrate:
        z, nu = calibrate_anchor(z, glued)
    # a similarity of the plane is conformal: centre on the bulk of the
    # vertices (not on the pinned triangle, whose far field can sit off
    # centre) and balance the two hemispheres
    z = z - complex(np.median(z.real), np.median(z.imag))
    z = z / np.median(np.abs(z))
    sphere = orient_outward(inverse_stereographic(z), glued.faces)
    t1 = time.perf_counter()
    if info is not None:
        info["anchor_face"] = anchor.face
        info["anchor_calibration"] = nu
    if timings is not None:
        timings["harmonic"] = t1 - t0
    if not skip_south_pole:
        sphere = south_pole_correction(sphere, glued, tol=tol, log=log, info=info)
        sphere = orient_outward(sphere, glued.faces)
        if timings is not None:
            timings["south_pole"] = time.perf_counter() - t1
    return sphere


def sphere_mean_abs_mu(glued: GluedMesh, sphere: np.ndarray) -> float:
    """Mean per-face ``|mu|`` of the map from the glued mesh to the sphere."""
    return float(np.mean(np.abs(beltrami_coefficient(glued.vertices, glued.faces, sphere).mu)))
