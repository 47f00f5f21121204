"""Glue a disk-topology mesh to its orientation-reversed copy along the boundary."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import face_cotangents, laplacian_from_cotangents
from .mesh import TopologyError, TriMesh, boundary_loop, validate_topology

ORIGINAL, MIRROR, SEAM = 0, 1, 2


@dataclass(frozen=True, eq=False)
class GluedMesh:
    """Closed genus-0 double cover of a disk mesh.

    Glued vertices ``0..V-1`` are the source vertices (seam vertices keep
    their source index); ``V..2V-r-1`` are the mirrored interior vertices in
    increasing source order. Faces ``0..F-1`` are the source faces and face
    ``F+t`` is the mirror of source face ``t`` with its last two corners
    swapped.
    """

    mesh: TriMesh
    source: TriMesh
    copy_of: np.ndarray
    to_source: np.ndarray
    mirror_of: np.ndarray
    seam: np.ndarray

    @property
    def num_source_faces(self) -> int:
        return self.source.num_faces

    @property
    def vertices(self):
        return self.mesh.vertices

    @property
    def faces(self):
        return self.mesh.faces

    def face_cotangents(self) -> np.ndarray:
        """Corner cotangents of every glued face, computed once for the source half."""
        c = face_cotangents(self.source.vertices, self.source.faces)
        return np.concatenate([c, c[:, [0, 2, 1]]])

    def laplacian(self):
        return laplacian_from_cotangents(self.mesh.faces, self.face_cotangents(), self.mesh.num_vertices)


def double_cover(mesh: TriMesh) -> GluedMesh:
    report = validate_topology(mesh)
    if not report.is_disk_topology:
        raise TopologyError(
            f"not disk topology: euler characteristic {report.euler_characteristic}, "
            f"{report.num_boundary_loops} boundary loops"
        )
    V = mesh.num_vertices
    loop = boundary_loop(mesh)
    on_seam = np.zeros(V, dtype=bool)
    on_seam[loop] = True
    interior = np.flatnonzero(~on_seam)
    n_int = len(interior)

    relabel = np.arange(V)
    relabel[interior] = V + np.arange(n_int)
    mirror_faces = relabel[mesh.faces][:, [0, 2, 1]]

    vertices = np.concatenate([mesh.vertices, mesh.vertices[interior]])
    faces = np.concatenate([mesh.faces, mirror_faces])

    mirror_of = np.concatenate([relabel, interior])
    copy_of = np.full(V + n_int, MIRROR, dtype=np.int8)
    copy_of[:V] = ORIGINAL
    copy_of[loop] = SEAM
    to_source = np.concatenate([np.arange(V), interior])

    for a in (copy_of, to_source, mirror_of):
        a.setflags(write=False)
    return GluedMesh(
        mesh=TriMesh(vertices, faces),
        source=mesh,
        copy_of=copy_of,
        to_source=to_source,
        mirror_of=mirror_of,
        seam=loop,
    )


def seam_vertices(glued: GluedMesh) -> np.ndarray:
    """Glued indices of the identified boundary, in source boundary order."""
    return glued.seam
