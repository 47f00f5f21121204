"""Sparse SPD systems: cotangent Laplacian, factor/solve, Dirichlet elimination."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu, cg

DEFAULT_TOL = 1e-10


class SolverError(RuntimeError):
    """Linear solve failed or did not meet the residual contract."""


class NotSPDError(SolverError):
    pass


class IndefiniteSystemWarning(RuntimeWarning):
    pass


class DisconnectedWarning(RuntimeWarning):
    pass


@dataclass
class SolveLog:
    """Records every linear system solved; pipelines use it to count solves."""

    entries: list = field(default_factory=list)

    def record(self, stage, n, nrhs, residual, method):
        self.entries.append(dict(stage=stage, n=int(n), nrhs=int(nrhs), residual=float(residual), method=method))

    @property
    def num_systems(self) -> int:
        return len(self.entries)

    @property
    def num_rhs(self) -> int:
        return sum(e["nrhs"] for e in self.entries)


def assemble(rows, cols, vals, n: int) -> sp.csr_array:
    """Compress COO triplets into CSR; duplicates are summed, indices sorted."""
    A = sp.coo_array((np.asarray(vals, dtype=float), (np.asarray(rows), np.asarray(cols))), shape=(n, n)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


# ------------------------------------------------------------ cotangents


def face_cotangents(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """``cot`` of the interior angle at each corner, shape ``(F, 3)``.

    Column k belongs to corner ``faces[:, k]`` and is opposite the edge
    ``(faces[:, k+1], faces[:, k+2])``.
    """
    p = np.asarray(vertices, dtype=float)
    if np.iscomplexobj(p):
        p = np.column_stack([p.real, p.imag, np.zeros(len(p))])
    elif p.shape[1] == 2:
        p = np.column_stack([p, np.zeros(len(p))])
    out = np.empty((len(faces), 3))
    for k in range(3):
        a = p[faces[:, (k + 1) % 3]] - p[faces[:, k]]
        b = p[faces[:, (k + 2) % 3]] - p[faces[:, k]]
        dot = np.einsum("ij,ij->i", a, b)
        cross = np.linalg.norm(np.cross(a, b), axis=1)
        if np.any(cross == 0):
            raise ValueError(f"degenerate faces: {np.flatnonzero(cross == 0).tolist()[:10]}")
        out[:, k] = dot / cross
    return out


def laplacian_from_cotangents(faces: np.ndarray, cots: np.ndarray, n: int) -> sp.csr_array:
    """Assemble ``A_ij = k_ij`` (i != j), ``A_ii = -sum_j k_ij``.

    Off-diagonals receive at most two contributions per edge, so mirrored
    edges with identical face cotangents get bit-identical weights. The
    diagonal is accumulated per face in face order for the same reason.
    """
    faces = np.asarray(faces)
    rows, cols, vals = [], [], []
    for k in range(3):
        i, j = faces[:, (k + 1) % 3], faces[:, (k + 2) % 3]
        w = cots[:, k]
        rows += [i, j]
        cols += [j, i]
        vals += [w, w]
    off = assemble(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), n)
    # corner k touches the two edges opposite corners k+1 and k+2
    corner_sum = np.column_stack(
        [cots[:, 1] + cots[:, 2], cots[:, 2] + cots[:, 0], cots[:, 0] + cots[:, 1]]
    )
    diag = -np.bincount(faces.ravel(), weights=corner_sum.ravel(), minlength=n)
    A = (off + sp.diags_array(diag, format="csr")).tocsr()
    A.sort_indices()
    return A


def cotangent_laplacian(mesh) -> sp.csr_array:
    """Cotangent Laplacian of a :class:`TriMesh` or :class:`GluedMesh`.

    For a glued double cover only the source faces' cotangents are
    computed; the mirrored faces reuse them.
    """
    from .double_cover import GluedMesh

    if isinstance(mesh, GluedMesh):
        return mesh.laplacian()
    return laplacian_from_cotangents(mesh.faces, face_cotangents(mesh.vertices, mesh.faces), mesh.num_vertices)


# --------------------------------------------------------------- solvers


class SPDFactor:
    """Sparse LU in symmetric mode with an SPD check on the pivots.

    With a symmetric fill-reducing permutation and no numerical pivoting,
    ``A = L U`` has ``diag(U) > 0`` exactly when ``A`` is positive definite.
    If that check fails the matrix is refactored with partial pivoting and
    a warning is issued.
    """

    def __init__(self, A, check_spd: bool = True):
        A = sp.csc_array(A, dtype=float)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("matrix must be square")
        self.A = A
        self.n = n
        self.spd = True
        if A.nnz == 0 or not np.any(A.diagonal()):
            raise NotSPDError("matrix is zero on the diagonal; not positive definite")
        diag = A.diagonal()
        if check_spd and np.any(diag <= 0):
            bad = np.flatnonzero(diag <= 0)
            raise NotSPDError(f"non-positive diagonal entries at rows {bad.tolist()[:10]}")
        try:
            lu = splu(
                A,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options=dict(SymmetricMode=True),
            )
            pivots = lu.U.diagonal()
            ok = np.all(np.isfinite(pivots)) and np.all(pivots > 0)
        except RuntimeError:
            lu, ok = None, False
        if not ok:
            if check_spd:
                warnings.warn(
                    "system failed the SPD pivot test; solving it as symmetric indefinite",
                    IndefiniteSystemWarning,
                    stacklevel=3,
                )
            self.spd = False
            try:
                lu = splu(A)
            except RuntimeError as exc:
                raise NotSPDError(f"factorization failed: {exc}") from None
        self._lu = lu

    def solve(self, b):
        return self._lu.solve(np.asarray(b, dtype=float))


def _as_real_columns(b):
    b = np.asarray(b)
    is_complex = np.iscomplexobj(b)
    vec = b.ndim == 1
    B = b.reshape(len(b), -1)
    if is_complex:
        B = np.concatenate([B.real, B.imag], axis=1)
    return B.astype(float), is_complex, vec


def _from_real_columns(X, is_complex, vec):
    if is_complex:
        k = X.shape[1] // 2
        X = X[:, :k] + 1j * X[:, k:]
    return X[:, 0] if vec else X


def solve_spd(A, b, tol: float = DEFAULT_TOL, log: SolveLog | None = None, stage: str = "", factor: SPDFactor | None = None):
    """Solve ``A x = b`` for SPD ``A``; ``b`` may be real/complex, 1- or 2-D.

    Complex right-hand sides are split into real and imaginary columns that
    share one factorization. The relative residual ``|Ax - b| / |b|`` must
    be at most ``tol`` (after a few steps of iterative refinement and, if
    needed, a conjugate-gradient polish); otherwise :class:`SolverError`.
    """
    B, is_complex, vec = _as_real_columns(b)
    if factor is None:
        factor = SPDFactor(A)
    A = factor.A
    X = factor.solve(B)
    bnorm = np.linalg.norm(B, axis=0)
    bnorm[bnorm == 0] = 1.0

    def residual(X):
        return np.max(np.linalg.norm(A @ X - B, axis=0) / bnorm)

    res = residual(X)
    method = "lu-spd" if factor.spd else "lu-indefinite"
    for _ in range(3):
        if res <= tol:
            break
        X = X + factor.solve(B - A @ X)
        res = residual(X)
    if res > tol and factor.spd:
        for c in range(B.shape[1]):
            x, info = cg(A, B[:, c], x0=X[:, c], rtol=tol * 0.1, maxiter=10 * factor.n)
            X[:, c] = x
        res = residual(X)
        method = "lu-spd+cg"
    if not np.all(np.isfinite(X)) or res > tol:
        raise SolverError(f"relative residual {res:.3e} exceeds tolerance {tol:.1e} ({method}, n={factor.n})")
    if log is not None:
        log.record(stage, factor.n, B.shape[1], res, method)
    return _from_real_columns(X, is_complex, vec)


def solve_with_dirichlet(A, fixed_idx, fixed_val, rhs=None, tol: float = DEFAULT_TOL, log: SolveLog | None = None, stage: str = ""):
    """Solve ``A x = rhs`` on the free rows with ``x[fixed_idx] = fixed_val``.

    ``fixed_val`` may be real, complex, or ``(k, d)``. Constrained entries of
    the result are copied from ``fixed_val`` unchanged. A Laplacian with a
    negative diagonal (the cotangent convention) is negated before the
    solve so the reduced system is positive definite.
    """
    A = sp.csr_array(A)
    n = A.shape[0]
    fixed_idx = np.asarray(fixed_idx, dtype=np.int64).ravel()
    if fixed_idx.size == 0:
        raise ValueError("at least one vertex must be fixed")
    if len(np.unique(fixed_idx)) != len(fixed_idx):
        raise ValueError("duplicate fixed indices")
    fixed_val = np.asarray(fixed_val)
    if len(fixed_val) != len(fixed_idx):
        raise ValueError("fixed_idx and fixed_val lengths differ")
    out_shape = (n,) + fixed_val.shape[1:]
    x = np.zeros(out_shape, dtype=np.result_type(fixed_val.dtype, float))
    x[fixed_idx] = fixed_val
    free = np.ones(n, dtype=bool)
    free[fixed_idx] = False
    free_idx = np.flatnonzero(free)
    if free_idx.size == 0:
        return x
    Aff = A[free_idx][:, free_idx]
    Afc = A[free_idx][:, fixed_idx]
    b = -(Afc @ fixed_val)
    if rhs is not None:
        b = b + np.asarray(rhs)[free_idx]
    if Aff.diagonal().sum() < 0:
        Aff, b = -Aff, -b
    _warn_disconnected(A, free)
    x[free_idx] = solve_spd(Aff, b, tol=tol, log=log, stage=stage)
    return x


def _warn_disconnected(A, free):
    ncomp, labels = connected_components(A, directed=False)
    for c in range(ncomp):
        members = labels == c
        if np.all(free[members]):
            warnings.warn(
                f"{members.sum()} free vertices are not connected to any fixed vertex",
                DisconnectedWarning,
                stacklevel=3,
            )
