"""Indexed triangle meshes: construction, OBJ/OFF I/O, topology checks, angles."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import coo_array
from scipy.sparse.csgraph import connected_components

DEGENERATE_AREA_FACTOR = 1e-12


class MeshError(ValueError):
    """Base class for invalid mesh input."""


class MeshParseError(MeshError):
    def __init__(self, message: str, path=None, lineno: Optional[int] = None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}"
            if lineno is not None:
                where += f":{lineno}"
            where += ": "
        super().__init__(where + message)


class DegenerateFaceError(MeshError):
    def __init__(self, faces):
        self.faces = np.asarray(faces, dtype=np.int64)
        shown = ", ".join(str(int(f)) for f in self.faces[:20])
        more = "" if len(self.faces) <= 20 else f" (+{len(self.faces) - 20} more)"
        super().__init__(f"degenerate faces: {shown}{more}")


class OrientationError(MeshError):
    pass


class NonManifoldError(MeshError):
    pass


class TopologyError(MeshError):
    pass


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def triangle_areas(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Unsigned area of every face (works for 2D or 3D vertex arrays)."""
    p = np.asarray(vertices, dtype=float)
    if p.shape[1] == 2:
        p = np.column_stack([p, np.zeros(len(p))])
    e1 = p[faces[:, 1]] - p[faces[:, 0]]
    e2 = p[faces[:, 2]] - p[faces[:, 0]]
    return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)


def signed_areas(z: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Signed area of planar faces given complex vertex coordinates."""
    a, b, c = z[faces[:, 0]], z[faces[:, 1]], z[faces[:, 2]]
    return 0.5 * np.imag(np.conj(b - a) * (c - a))


def mostly_clockwise(z: np.ndarray, faces: np.ndarray) -> bool:
    """True when more planar faces are clockwise than counter-clockwise."""
    s = signed_areas(z, faces)
    return int(np.sum(s < 0)) > int(np.sum(s > 0))


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Immutable triangle mesh with consistent orientation.

    ``vertices`` is ``(V, 3)`` float, ``faces`` is ``(F, 3)`` int with
    0-based indices. Construction validates index range, non-degeneracy
    and orientation consistency; topology is checked separately by
    :func:`validate_topology`.
    """

    vertices: np.ndarray
    faces: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        f = np.asarray(self.faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] not in (2, 3):
            raise MeshError(f"vertices must be (V, 3), got shape {v.shape}")
        if v.shape[1] == 2:
            v = np.column_stack([v, np.zeros(len(v))])
        if f.size == 0:
            f = f.reshape(0, 3)
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshError(f"faces must be (F, 3), got shape {f.shape}")
        if not np.all(np.isfinite(v)):
            raise MeshError("vertex coordinates must be finite")
        bad = np.flatnonzero((f < 0).any(axis=1) | (f >= len(v)).any(axis=1))
        if len(bad):
            raise MeshError(f"faces reference vertices out of range [0, {len(v)}): {bad.tolist()[:20]}")
        repeated = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
        areas = triangle_areas(v, f)
        if len(v):
            diag2 = float(np.sum((v.max(axis=0) - v.min(axis=0)) ** 2))
        else:
            diag2 = 0.0
        tiny = areas <= DEGENERATE_AREA_FACTOR * diag2
        bad = np.flatnonzero(repeated | tiny)
        if len(bad):
            raise DegenerateFaceError(bad)
        object.__setattr__(self, "vertices", _readonly(v))
        object.__setattr__(self, "faces", _readonly(f))
        _check_orientation(f)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    @property
    def edges(self) -> np.ndarray:
        """Undirected edges ``(E, 2)`` with ``e[:, 0] < e[:, 1]``, sorted."""
        if "edges" not in self._cache:
            self._cache["edges"], self._cache["edge_count"] = _edge_table(self.faces)
        return self._cache["edges"]

    @property
    def edge_face_count(self) -> np.ndarray:
        self.edges
        return self._cache["edge_count"]

    @property
    def boundary_edges(self) -> np.ndarray:
        """Directed boundary half-edges ``(u, v)`` in face orientation."""
        if "boundary_edges" not in self._cache:
            f = self.faces
            directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
            key = np.sort(directed, axis=1)
            _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
            self._cache["boundary_edges"] = directed[counts[inv.ravel()] == 1]
        return self._cache["boundary_edges"]

    def face_areas(self) -> np.ndarray:
        return triangle_areas(self.vertices, self.faces)


def _edge_table(faces):
    directed = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    key = np.sort(directed, axis=1)
    edges, counts = np.unique(key, axis=0, return_counts=True)
    return _readonly(edges.reshape(-1, 2)), _readonly(counts)


def _check_orientation(faces):
    # a directed edge used twice on a two-face edge means a flipped neighbour;
    # edges with more than two faces are left to validate_topology
    if len(faces) == 0:
        return
    directed = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    key = np.sort(directed, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    on_pairs = counts[inv] == 2
    d = directed[on_pairs]
    _, dcounts = np.unique(d, axis=0, return_counts=True)
    if np.any(dcounts > 1):
        raise OrientationError("face orientation is not consistent across shared edges")


# ---------------------------------------------------------------- topology


@dataclass(frozen=True)
class TopologyReport:
    num_vertices: int
    num_edges: int
    num_faces: int
    euler_characteristic: int
    num_boundary_loops: int
    is_disk_topology: bool


def validate_topology(mesh: TriMesh) -> TopologyReport:
    """Count V, E, F and boundary loops; raise on non-manifold input."""
    V, F = mesh.num_vertices, mesh.num_faces
    counts = mesh.edge_face_count
    if np.any(counts > 2):
        bad = mesh.edges[counts > 2]
        raise NonManifoldError(f"non-manifold edges shared by more than two faces: {bad.tolist()[:10]}")
    used = np.zeros(V, dtype=bool)
    used[mesh.faces.ravel()] = True
    if not used.all():
        raise NonManifoldError(f"isolated vertices: {np.flatnonzero(~used).tolist()[:10]}")
    E = len(mesh.edges)
    adj = coo_array(
        (np.ones(E), (mesh.edges[:, 0], mesh.edges[:, 1])), shape=(V, V)
    )
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        raise NonManifoldError(f"mesh has {ncomp} connected components")
    b = mesh.boundary_edges
    out_deg = np.bincount(b[:, 0], minlength=V) if len(b) else np.zeros(V, int)
    if np.any(out_deg > 1):
        bad = np.flatnonzero(out_deg > 1)
        raise NonManifoldError(f"non-manifold boundary vertices: {bad.tolist()[:10]}")
    loops = _boundary_loops(b)
    chi = V - E + F
    return TopologyReport(
        num_vertices=V,
        num_edges=E,
        num_faces=F,
        euler_characteristic=int(chi),
        num_boundary_loops=len(loops),
        is_disk_topology=bool(chi == 1 and len(loops) == 1),
    )


def _boundary_loops(bedges):
    nxt = {int(u): int(v) for u, v in bedges}
    loops = []
    seen = set()
    for start in sorted(nxt):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        cur = nxt[start]
        while cur != start:
            if cur in seen or cur not in nxt:
                raise NonManifoldError("boundary edges do not form simple loops")
            loop.append(cur)
            seen.add(cur)
            cur = nxt[cur]
        loops.append(loop)
    return loops


def boundary_loop(mesh: TriMesh) -> np.ndarray:
    """The single boundary loop, ordered along the boundary half-edges.

    The loop starts at the first vertex (in face order) of the first face
    touching the boundary, so a lone triangle yields its vertices in face
    order.
    """
    if "boundary_loop" in mesh._cache:
        return mesh._cache["boundary_loop"]
    b = mesh.boundary_edges
    loops = _boundary_loops(b)
    if len(loops) != 1:
        raise TopologyError(f"expected exactly one boundary loop, found {len(loops)}")
    loop = loops[0]
    on_boundary = np.zeros(mesh.num_vertices, dtype=bool)
    on_boundary[loop] = True
    first = next(int(v) for v in mesh.faces.ravel() if on_boundary[v])
    k = loop.index(first)
    out = _readonly(np.array(loop[k:] + loop[:k], dtype=np.int64))
    mesh._cache["boundary_loop"] = out
    return out


# ------------------------------------------------------------------ angles


def corner_angles(mesh_or_vertices, faces=None) -> np.ndarray:
    """Interior angles ``(F, 3)`` in radians; column k is the angle at ``faces[:, k]``.

    Accepts a :class:`TriMesh`, or a vertex array (2D, 3D or complex)
    together with ``faces``.
    """
    if faces is None:
        v, faces = mesh_or_vertices.vertices, mesh_or_vertices.faces
    else:
        v = np.asarray(mesh_or_vertices)
        if np.iscomplexobj(v):
            v = np.column_stack([v.real, v.imag])
    p = [v[faces[:, k]] for k in range(3)]
    out = np.empty((len(faces), 3))
    for k in range(3):
        a = p[(k + 1) % 3] - p[k]
        b = p[(k + 2) % 3] - p[k]
        la = np.linalg.norm(a, axis=1)
        lb = np.linalg.norm(b, axis=1)
        if np.any(la == 0) or np.any(lb == 0):
            bad = np.flatnonzero((la == 0) | (lb == 0))
            raise DegenerateFaceError(bad)
        dot = np.einsum("ij,ij->i", a, b)
        if v.shape[1] == 2:
            cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
        else:
            cross = np.linalg.norm(np.cross(a, b), axis=1)
        out[:, k] = np.arctan2(cross, dot)
    return out


# --------------------------------------------------------------------- I/O


def load_mesh(path, format: str = "auto") -> TriMesh:
    """Read an OBJ or OFF triangle mesh, preserving vertex and face order."""
    mesh, _ = _load(path, format)
    return mesh


def load_uv(path, mesh: Optional[TriMesh] = None) -> np.ndarray:
    """Per-vertex texture coordinates (complex) from an OBJ with ``vt`` records.

    When ``mesh`` is given the file's connectivity must match it exactly.
    """
    other, uv = _load(path, "obj", want_uv=True)
    if uv is None:
        raise MeshParseError("file has no vt records", path)
    if mesh is not None:
        if other.num_vertices != mesh.num_vertices or other.num_faces != mesh.num_faces:
            raise MeshError(
                f"connectivity mismatch: mesh has V={mesh.num_vertices}, F={mesh.num_faces}; "
                f"uv file has V={other.num_vertices}, F={other.num_faces}"
            )
        if not np.array_equal(other.faces, mesh.faces):
            raise MeshError("connectivity mismatch: face lists differ")
    return uv


def _detect_format(path, format):
    fmt = format.lower()
    if fmt != "auto":
        if fmt not in ("obj", "off"):
            raise ValueError(f"unknown mesh format {format!r}")
        return fmt
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".obj", ".off"):
        return ext[1:]
    with open(path) as fh:
        for line in fh:
            s = line.strip()
            if s and not s.startswith("#"):
                return "off" if s.upper().startswith("OFF") else "obj"
    raise MeshParseError("empty file", path)


def _load(path, format, want_uv=False):
    fmt = _detect_format(path, format)
    if fmt == "off":
        v, f = _read_off(path)
        uv = None
    else:
        v, f, uv = _read_obj(path, want_uv)
    if len(f) == 0:
        raise MeshParseError("no faces", path)
    return TriMesh(v, f), uv


def _obj_index(tok, n, path, lineno):
    try:
        i = int(tok)
    except ValueError:
        raise MeshParseError(f"bad index {tok!r}", path, lineno) from None
    if i < 0:
        i = n + i
    else:
        i -= 1
    return i


def _read_obj(path, want_uv):
    verts, texs, faces, ftex = [], [], [], []
    face_lines = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].split()
            if not s:
                continue
            tag = s[0]
            if tag == "v":
                try:
                    verts.append([float(x) for x in s[1:4]])
                except ValueError:
                    raise MeshParseError("bad vertex record", path, lineno) from None
                if len(verts[-1]) != 3:
                    raise MeshParseError("vertex needs 3 coordinates", path, lineno)
            elif tag == "vt":
                try:
                    texs.append([float(x) for x in s[1:3]])
                except ValueError:
                    raise MeshParseError("bad texture record", path, lineno) from None
                if len(texs[-1]) != 2:
                    raise MeshParseError("texture coordinate needs 2 values", path, lineno)
            elif tag == "f":
                if len(s) != 4:
                    raise MeshParseError(f"only triangles are supported, got {len(s) - 1} vertices", path, lineno)
                tri, ttri = [], []
                for tok in s[1:]:
                    parts = tok.split("/")
                    tri.append(_obj_index(parts[0], len(verts), path, lineno))
                    if len(parts) > 1 and parts[1]:
                        ttri.append(_obj_index(parts[1], len(texs), path, lineno))
                faces.append(tri)
                ftex.append(ttri if len(ttri) == 3 else None)
                face_lines.append(lineno)
    V = len(verts)
    for k, tri in enumerate(faces):
        for i in tri:
            if not 0 <= i < V:
                raise MeshParseError(
                    f"face {k} references vertex {i + 1} but the file has {V} vertices",
                    path,
                    face_lines[k],
                )
    uv = None
    if want_uv and texs:
        uv = np.full(V, np.nan + 0j)
        for k, (tri, ttri) in enumerate(zip(faces, ftex)):
            if ttri is None:
                raise MeshParseError("face without texture indices", path, face_lines[k])
            for i, t in zip(tri, ttri):
                if not 0 <= t < len(texs):
                    raise MeshParseError(f"texture index {t + 1} out of range", path, face_lines[k])
                val = texs[t][0] + 1j * texs[t][1]
                if np.isnan(uv[i]):
                    uv[i] = val
                elif uv[i] != val:
                    raise MeshParseError(f"vertex {i + 1} has more than one texture coordinate", path, face_lines[k])
        if np.isnan(uv).any():
            raise MeshParseError("some vertices have no texture coordinate", path)
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3), uv


def _read_off(path):
    with open(path) as fh:
        lines = [
            (n, ln.split("#", 1)[0].split())
            for n, ln in enumerate(fh, 1)
        ]
    lines = [(n, s) for n, s in lines if s]
    if not lines or not lines[0][1][0].upper().startswith("OFF"):
        raise MeshParseError("missing OFF header", path, lines[0][0] if lines else None)
    head = lines[0][1]
    rest = lines[1:]
    counts_tokens = head[1:] if len(head) > 1 else None
    if counts_tokens is None:
        if not rest:
            raise MeshParseError("missing counts line", path)
        n, counts_tokens = rest[0]
        rest = rest[1:]
    try:
        nv, nf = int(counts_tokens[0]), int(counts_tokens[1])
    except (ValueError, IndexError):
        raise MeshParseError("bad counts line", path, lines[0][0]) from None
    if len(rest) < nv + nf:
        raise MeshParseError(f"expected {nv} vertices and {nf} faces, file is truncated", path)
    verts = []
    for n, s in rest[:nv]:
        try:
            verts.append([float(x) for x in s[:3]])
        except ValueError:
            raise MeshParseError("bad vertex record", path, n) from None
        if len(verts[-1]) != 3:
            raise MeshParseError("vertex needs 3 coordinates", path, n)
    faces = []
    for k, (n, s) in enumerate(rest[nv:nv + nf]):
        try:
            cnt = int(s[0])
            idx = [int(x) for x in s[1:1 + cnt]]
        except ValueError:
            raise MeshParseError("bad face record", path, n) from None
        if cnt != 3 or len(idx) != 3:
            raise MeshParseError(f"only triangles are supported, got {cnt} vertices", path, n)
        for i in idx:
            if not 0 <= i < nv:
                raise MeshParseError(f"face {k} references vertex {i} but the file has {nv} vertices", path, n)
        faces.append(idx)
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)


def write_mesh_with_uv(path, mesh: TriMesh, uv, mtllib: Optional[str] = None, material: Optional[str] = None):
    """Write an OBJ with one ``vt`` per vertex; faces use ``v/vt`` pairs.

    ``uv`` may be complex ``(V,)`` or real ``(V, 2)``. Coordinates are written
    with 17 significant digits so a read-back is exact.
    """
    uv = np.asarray(uv)
    if np.iscomplexobj(uv):
        uv = np.column_stack([uv.real, uv.imag])
    if uv.ndim != 2 or uv.shape != (mesh.num_vertices, 2):
        raise MeshError(f"uv must have one 2D coordinate per vertex ({mesh.num_vertices}), got shape {uv.shape}")
    lines = []
    if mtllib:
        lines.append(f"mtllib {mtllib}")
    lines.extend("v %.17g %.17g %.17g" % tuple(p) for p in mesh.vertices)
    lines.extend("vt %.17g %.17g" % tuple(t) for t in uv)
    if material:
        lines.append(f"usemtl {material}")
    f1 = mesh.faces + 1
    lines.extend(f"f {a}/{a} {b}/{b} {c}/{c}" for a, b, c in f1)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_off(path, mesh: TriMesh):
    with open(path, "w") as fh:
        fh.write(f"OFF\n{mesh.num_vertices} {mesh.num_faces} 0\n")
        for p in mesh.vertices:
            fh.write("%.17g %.17g %.17g\n" % tuple(p))
        for a, b, c in mesh.faces:
            fh.write(f"3 {a} {b} {c}\n")
