"""Synthetic disk-topology test meshes (flat, irregular, curved, sliver-heavy)."""
from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay

from .mesh import TriMesh, signed_areas


def _rings_for(n_faces: int) -> int:
    # a disk of n concentric rings with 6k points on ring k has 6 n^2 faces
    return max(1, int(round(np.sqrt(n_faces / 6.0))))


def ring_points(n_rings: int, jitter: float = 0.0, seed: int = 0) -> np.ndarray:
    """Centre plus rings of 6k points at radius k/n; boundary ring stays on the circle."""
    rng = np.random.default_rng(seed)
    pts = [np.zeros((1, 2))]
    h = 1.0 / n_rings
    for k in range(1, n_rings + 1):
        m = 6 * k
        phi = 2 * np.pi * (np.arange(m) + 0.5 * (k % 2)) / m + 0.1 * k
        r = np.full(m, k * h)
        if jitter and k < n_rings:
            r = r + rng.uniform(-jitter, jitter, m) * h
            phi = phi + rng.uniform(-jitter, jitter, m) * (2 * np.pi / m)
        pts.append(np.column_stack([r * np.cos(phi), r * np.sin(phi)]))
    return np.concatenate(pts)


def triangulate(points2d: np.ndarray) -> np.ndarray:
    """Delaunay triangulation with every face counter-clockwise."""
    faces = Delaunay(points2d).simplices.astype(np.int64)
    z = points2d[:, 0] + 1j * points2d[:, 1]
    cw = signed_areas(z, faces) < 0
    faces[cw] = faces[cw][:, [0, 2, 1]]
    return faces


def flat_disk(n_faces: int = 1000) -> TriMesh:
    p = ring_points(_rings_for(n_faces))
    return TriMesh(np.column_stack([p, np.zeros(len(p))]), triangulate(p))


def irregular_disk(n_faces: int = 1000, seed: int = 1) -> TriMesh:
    """Flat unit disk with strongly jittered interior points."""
    p = ring_points(_rings_for(n_faces), jitter=0.4, seed=seed)
    return TriMesh(np.column_stack([p, np.zeros(len(p))]), triangulate(p))


def hemisphere(n_faces: int = 2000) -> TriMesh:
    """Lower unit hemisphere; ring k sits at polar angle k/n * pi/2."""
    p = ring_points(_rings_for(n_faces))
    faces = triangulate(p)
    r = np.hypot(p[:, 0], p[:, 1])
    phi = np.arctan2(p[:, 1], p[:, 0])
    theta = r * (np.pi / 2)
    v = np.column_stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), -np.cos(theta)])
    return TriMesh(v, faces)


BUMPS = ((0.35, 0.2, 0.3), (-0.3, 0.35, 0.25), (0.0, -0.4, 0.35))


def bumpy_disk(n_faces: int = 1000, width: float = 0.18) -> TriMesh:
    """Unit disk raised by three Gaussian bumps ``(cx, cy, height)``."""
    p = ring_points(_rings_for(n_faces))
    z = np.zeros(len(p))
    for cx, cy, a in BUMPS:
        z += a * np.exp(-((p[:, 0] - cx) ** 2 + (p[:, 1] - cy) ** 2) / (2 * width**2))
    return TriMesh(np.column_stack([p, z]), triangulate(p))


def saddle(n_faces: int = 1000, curvature: float = 0.6) -> TriMesh:
    p = ring_points(_rings_for(n_faces))
    z = 0.5 * curvature * (p[:, 0] ** 2 - p[:, 1] ** 2)
    return TriMesh(np.column_stack([p, z]), triangulate(p))


def sliver_disk(n_angular: int = 600, n_rings: int = 15, seed: int = 2) -> TriMesh:
    """Polar grid with a fixed number of spokes: needle triangles near the centre.

    Every quad cell is split along a random diagonal; the centre is a fan.
    """
    rng = np.random.default_rng(seed)
    phi = 2 * np.pi * np.arange(n_angular) / n_angular
    pts = [np.zeros((1, 2))]
    for k in range(1, n_rings + 1):
        r = k / n_rings
        pts.append(np.column_stack([r * np.cos(phi), r * np.sin(phi)]))
    p = np.concatenate(pts)

    def idx(k, j):
        return 1 + (k - 1) * n_angular + (j % n_angular)

    j = np.arange(n_angular)
    faces = [np.column_stack([np.zeros(n_angular, dtype=np.int64), idx(1, j), idx(1, j + 1)])]
    for k in range(1, n_rings):
        a, b = idx(k, j), idx(k, j + 1)
        c, d = idx(k + 1, j + 1), idx(k + 1, j)
        flip = rng.random(n_angular) < 0.5
        t1 = np.where(flip[:, None], np.column_stack([a, d, c]), np.column_stack([a, d, b]))
        t2 = np.where(flip[:, None], np.column_stack([a, c, b]), np.column_stack([b, d, c]))
        faces += [t1, t2]
    f = np.concatenate(faces)
    z = p[:, 0] + 1j * p[:, 1]
    cw = signed_areas(z, f) < 0
    f[cw] = f[cw][:, [0, 2, 1]]
    return TriMesh(np.column_stack([p, np.zeros(len(p))]), f)


FAMILIES = {
    "flat_disk": flat_disk,
    "irregular_disk": irregular_disk,
    "hemisphere": hemisphere,
    "bumpy_disk": bumpy_disk,
    "saddle": saddle,
}


def suite(sizes=(1000, 20000)):
    """``{(family, n_faces): mesh}`` for every family and size."""
    return {(name, n): make(n) for n in sizes for name, make in FAMILIES.items()}
