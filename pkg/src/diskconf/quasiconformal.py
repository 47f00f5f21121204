"""Discrete Beltrami coefficients and the linear Beltrami solver (LBS).

Maps are piecewise linear over a shared triangulation. Planar coordinates
are complex numbers; 3D triangles are first laid flat one face at a time.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import DEFAULT_TOL, SolveLog, assemble, solve_with_dirichlet

MU_BOUND = 0.98


class ClampWarning(RuntimeWarning):
    pass


def layout_faces(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Place each 3D face in the plane, preserving edge lengths.

    First corner at the origin, second on the positive real axis, third in
    the upper half-plane. Returns complex corners ``(F, 3)``.
    """
    p = np.asarray(vertices, dtype=float)
    e1 = p[faces[:, 1]] - p[faces[:, 0]]
    e2 = p[faces[:, 2]] - p[faces[:, 0]]
    l1 = np.linalg.norm(e1, axis=1)
    x = np.einsum("ij,ij->i", e1, e2) / l1
    y = np.linalg.norm(np.cross(e1, e2), axis=1) / l1
    out = np.zeros((len(faces), 3), dtype=complex)
    out[:, 1] = l1
    out[:, 2] = x + 1j * y
    return out


def face_corners(points, faces) -> np.ndarray:
    """Complex corner coordinates ``(F, 3)`` of a planar or 3D embedding."""
    p = np.asarray(points)
    if np.iscomplexobj(p) or p.ndim == 1:
        return p.astype(complex)[faces]
    if p.shape[1] == 2:
        z = p[:, 0] + 1j * p[:, 1]
        return z[faces]
    return layout_faces(p, faces)


def derivative_stencils(corners: np.ndarray):
    """Per-face ``D_x, D_y`` rows ``(F, 3)`` for piecewise-linear functions.

    ``D_x @ f_corners`` is the exact x-derivative of the linear interpolant;
    uses the signed face area so the result is a true gradient for either
    orientation.
    """
    a, b = corners.real, corners.imag
    area2 = (a[:, 1] - a[:, 0]) * (b[:, 2] - b[:, 0]) - (a[:, 2] - a[:, 0]) * (b[:, 1] - b[:, 0])
    if np.any(area2 == 0):
        raise ValueError(f"degenerate source faces: {np.flatnonzero(area2 == 0).tolist()[:10]}")
    Dx = np.column_stack([b[:, 1] - b[:, 2], b[:, 2] - b[:, 0], b[:, 0] - b[:, 1]]) / area2[:, None]
    Dy = np.column_stack([a[:, 2] - a[:, 1], a[:, 0] - a[:, 2], a[:, 1] - a[:, 0]]) / area2[:, None]
    return Dx, Dy


def divergence_stencils(corners: np.ndarray):
    """Discrete divergence weights ``(A, B)``, each ``(F, 3)``.

    For corner i of face T = [i, j, k] with v = g + i h:
    ``A_i = (h_j - h_k) / Area``, ``B_i = (g_k - g_j) / Area`` (unsigned area).
    """
    g, h = corners.real, corners.imag
    area = 0.5 * np.abs((g[:, 1] - g[:, 0]) * (h[:, 2] - h[:, 0]) - (g[:, 2] - g[:, 0]) * (h[:, 1] - h[:, 0]))
    j, k = [1, 2, 0], [2, 0, 1]
    A = (h[:, j] - h[:, k]) / area[:, None]
    B = (g[:, k] - g[:, j]) / area[:, None]
    return A, B


def wirtinger(source, faces, target):
    """Per-face ``(f_z, f_zbar)`` of the piecewise-linear map source -> target."""
    s = face_corners(source, faces)
    w = face_corners(target, faces)
    Dx, Dy = derivative_stencils(s)
    fx = np.einsum("ij,ij->i", Dx, w)
    fy = np.einsum("ij,ij->i", Dy, w)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


@dataclass(frozen=True, eq=False)
class BeltramiField:
    """Per-face complex Beltrami coefficient."""

    mu: np.ndarray
    degenerate: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.mu)

    @property
    def alphas(self):
        rho, eta = self.mu.real, self.mu.imag
        d = 1.0 - rho**2 - eta**2
        a1 = ((rho - 1) ** 2 + eta**2) / d
        a2 = -2.0 * eta / d
        a3 = (1 + 2 * rho + rho**2 + eta**2) / d
        return a1, a2, a3

    def clamped(self, bound: float = MU_BOUND):
        """Rescale faces with ``|mu| >= bound`` to modulus ``bound``; returns (field, count)."""
        mu = np.array(self.mu, dtype=complex)
        bad = ~np.isfinite(mu)
        mu[bad] = bound
        r = np.abs(mu)
        over = r >= bound
        # land strictly below the bound so clamping is idempotent
        mu[over] *= bound * (1 - 1e-9) / r[over]
        return BeltramiField(mu, self.degenerate), int(over.sum())


def beltrami_coefficient(source, faces, target) -> BeltramiField:
    """Beltrami coefficient of the piecewise-linear map ``source -> target``.

    ``source`` and ``target`` are per-vertex positions over ``faces``: complex
    ``(V,)``, ``(V, 2)`` or ``(V, 3)``. Faces whose image is degenerate get
    ``|mu| = 1`` and are marked in ``degenerate``.
    """
    faces = np.asarray(faces)
    fz, fzb = wirtinger(source, faces, target)
    scale = np.maximum(np.abs(fz), np.abs(fzb))
    degenerate = (scale == 0) | (np.abs(np.abs(fz) - np.abs(fzb)) <= 1e-14 * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = fzb / fz
    mu[degenerate] = np.where(fz[degenerate] != 0, mu[degenerate] / np.abs(mu[degenerate]), 1.0)
    return BeltramiField(mu, degenerate)


def _mu_array(mu):
    return mu.mu if isinstance(mu, BeltramiField) else np.asarray(mu, dtype=complex)


def lbs_matrix(domain, faces, mu) -> "scipy.sparse.csr_array":
    """Symmetric stiffness matrix of div(A grad u) = 0 over the domain faces.

    Element form ``|T| * grad(phi_l)^T A_T grad(phi_m)`` with ``A_T`` built from
    the alphas of ``mu``; area weighting makes affine maps exact solutions.
    """
    faces = np.asarray(faces)
    corners = face_corners(domain, faces)
    Dx, Dy = derivative_stencils(corners)
    g, h = corners.real, corners.imag
    area = 0.5 * np.abs((g[:, 1] - g[:, 0]) * (h[:, 2] - h[:, 0]) - (g[:, 2] - g[:, 0]) * (h[:, 1] - h[:, 0]))
    a1, a2, a3 = BeltramiField(_mu_array(mu)).alphas
    rows, cols, vals = [], [], []
    for l in range(3):
        for m in range(3):
            k = area * (
                a1 * Dx[:, l] * Dx[:, m]
                + a2 * (Dx[:, l] * Dy[:, m] + Dy[:, l] * Dx[:, m])
                + a3 * Dy[:, l] * Dy[:, m]
            )
            rows.append(faces[:, l])
            cols.append(faces[:, m])
            vals.append(k)
    n = len(np.asarray(domain))
    return assemble(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), n)


def lbs_reconstruct(
    domain,
    faces,
    mu,
    fixed_idx,
    fixed_val,
    tol: float = DEFAULT_TOL,
    bound: float = MU_BOUND,
    log: SolveLog | None = None,
    stage: str = "lbs",
) -> np.ndarray:
    """Planar map with Beltrami coefficient ``mu`` and Dirichlet data.

    Both coordinates solve the same SPD system, so one factorization serves
    the complex right-hand side. Faces with ``|mu| >= bound`` are clamped with
    a :class:`ClampWarning`.
    """
    field = mu if isinstance(mu, BeltramiField) else BeltramiField(_mu_array(mu))
    field, n_clamped = field.clamped(bound)
    if n_clamped:
        warnings.warn(f"{n_clamped} faces had |mu| >= {bound} and were clamped", ClampWarning, stacklevel=2)
    domain = np.asarray(domain)
    if not np.iscomplexobj(domain) and domain.ndim == 2:
        domain = domain[:, 0] + 1j * domain[:, 1]
    K = lbs_matrix(domain, faces, field)
    fixed_val = np.asarray(fixed_val)
    if not np.iscomplexobj(fixed_val) and fixed_val.ndim == 2:
        fixed_val = fixed_val[:, 0] + 1j * fixed_val[:, 1]
    return solve_with_dirichlet(K, fixed_idx, fixed_val.astype(complex), tol=tol, log=log, stage=stage)


def compose_beltrami(mu_f, mu_g_of_f, fz_ratio) -> np.ndarray:
    """Beltrami coefficient of ``g o f`` from ``mu_f``, ``mu_g o f`` and ``conj(f_z)/f_z``."""
    mf = _mu_array(mu_f)
    mg = _mu_array(mu_g_of_f)
    r = np.asarray(fz_ratio, dtype=complex)
    den = 1 + r * np.conj(mf) * mg
    small = np.abs(den) < 1e-14
    if np.any(small):
        warnings.warn(f"near-zero denominator on {small.sum()} faces", RuntimeWarning, stacklevel=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (mf + r * mg) / den


@dataclass(frozen=True)
class DilationSummary:
    abs_mu: np.ndarray
    sup: float
    mean: float
    K: float
    infinite: bool
    hist_edges: np.ndarray
    hist_counts: np.ndarray


def dilation_summary(mu, bins: int = 50) -> DilationSummary:
    """``|mu|`` statistics and the maximal dilation ``(1 + sup) / (1 - sup)``."""
    a = np.abs(_mu_array(mu))
    sup = float(a.max()) if len(a) else 0.0
    infinite = not sup < 1.0
    K = np.inf if infinite else (1.0 + sup) / (1.0 - sup)
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogram(np.minimum(a, 1.0), bins=edges)
    return DilationSummary(
        abs_mu=a,
        sup=sup,
        mean=float(a.mean()) if len(a) else 0.0,
        K=float(K),
        infinite=infinite,
        hist_edges=edges,
        hist_counts=counts,
    )
