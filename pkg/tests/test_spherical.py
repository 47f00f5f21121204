import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diskconf import synthetic
from diskconf.double_cover import MIRROR, double_cover
from diskconf.linalg import SolveLog
from diskconf.mesh import TriMesh, corner_angles, mostly_clockwise
from diskconf.quasiconformal import beltrami_coefficient
from diskconf.spherical import (
    ANCHOR_SCALE,
    calibrate_anchor,
    choose_anchor_face,
    harmonic_plane_map,
    inverse_south,
    inverse_stereographic,
    south_pole_correction,
    south_project,
    sphere_flips,
    sphere_mean_abs_mu,
    spherical_conformal_map,
    stereographic_project,
)
from meshes import TRIANGLE, planar, symmetric_disk


def test_stereographic_examples():
    p = np.array([[0.0, 0, -1], [1, 0, 0], [0, 1, 0]])
    np.testing.assert_allclose(stereographic_project(p), [0, 1, 1j], atol=1e-15)
    np.testing.assert_allclose(inverse_stereographic(np.array([0, 1, 1j])), p, atol=1e-15)


def test_north_pole_rejected():
    with pytest.raises(ValueError, match="North pole"):
        stereographic_project(np.array([[0.0, 0, 1]]))


unit = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(lambda t: 0.1 < np.linalg.norm(t))


@given(st.lists(unit, min_size=1, max_size=20))
def test_stereographic_roundtrip(vs):
    p = np.array(vs, dtype=float)
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    p = p[np.abs(p[:, 2]) < 1 - 1e-3]
    if len(p) == 0:
        return
    assert np.abs(inverse_stereographic(stereographic_project(p)) - p).max() < 1e-12
    assert np.abs(inverse_south(south_project(p)) - p).max() < 1e-12
    np.testing.assert_allclose(south_project(p), 1 / np.conj(stereographic_project(p)), rtol=1e-12)


# ------------------------------------------------------------------ anchor


def test_anchor_picks_the_equilateral_face():
    t = 2 * np.pi * np.arange(40) / 40
    eq = 0.05 * np.exp(1j * (np.pi / 2 + 2 * np.pi * np.arange(3) / 3))
    p = np.concatenate([np.column_stack([np.cos(t), np.sin(t)]), np.column_stack([eq.real, eq.imag])])
    m = planar(p)
    g = double_cover(m)
    a = choose_anchor_face(g)
    inner = {40, 41, 42}
    assert set(g.to_source[g.faces[a.face]].tolist()) == inner
    assert np.degrees(corner_angles(g.vertices, g.faces[[a.face]])).min() > 59.999


def test_anchor_tie_goes_to_lowest_index():
    # triangular lattice: every interior face is equilateral
    i, j = np.meshgrid(np.arange(-6, 7), np.arange(-6, 7))
    z = (i + 0.5 * j) + 1j * (np.sqrt(3) / 2) * j
    z = z[np.abs(z) <= 5.2].ravel()
    m = planar(np.column_stack([z.real, z.imag]))
    g = double_cover(m)
    F = g.num_source_faces
    on_seam = np.isin(m.faces, g.seam).any(axis=1)
    assert choose_anchor_face(g).face == F + np.flatnonzero(~on_seam).min()


@pytest.mark.parametrize("make", list(synthetic.FAMILIES.values()))
def test_anchor_target_similar(make):
    g = double_cover(make(1000))
    a = choose_anchor_face(g)
    src = corner_angles(g.vertices, g.faces[[a.face]])
    tgt = corner_angles(a.target, np.array([[0, 1, 2]]))
    assert np.abs(src - tgt).max() < 1e-9
    assert not np.isin(g.faces[a.face], g.seam).any()
    longest = np.abs(a.target - np.roll(a.target, 1)).max()
    np.testing.assert_allclose(longest, ANCHOR_SCALE * np.sqrt(g.mesh.face_areas().sum()), rtol=1e-12)


# ---------------------------------------------------------------- harmonic


def test_pillow_fully_constrained():
    g = double_cover(TRIANGLE)
    a = choose_anchor_face(g)
    z = harmonic_plane_map(g, a)
    assert np.array_equal(z[a.vertices], a.target)


@pytest.mark.parametrize("name", list(synthetic.FAMILIES))
def test_harmonic_residual_and_anchor(name):
    g = double_cover(synthetic.FAMILIES[name](2000))
    a = choose_anchor_face(g)
    z = harmonic_plane_map(g, a)
    assert np.array_equal(z[a.vertices], a.target)
    L = g.laplacian()
    free = np.setdiff1d(np.arange(len(z)), a.vertices)
    res = np.abs(L @ z)[free]
    absL = abs(L)
    scale = np.asarray(absL.sum(axis=1)).ravel()[free] * np.abs(z - z.mean()).max() * 2
    assert (res / scale).max() < 1e-8


def test_symmetric_mesh_gives_symmetric_map():
    m, refl = symmetric_disk(seed=1)
    faces = {frozenset(f) for f in m.faces.tolist()}
    assert all(frozenset(refl[f]) in faces for f in m.faces.tolist())  # precondition
    g = double_cover(m)
    # glued-level reflection: apply refl on source indices, stay on the same copy
    to_glued = {(int(s), c): i for i, (s, c) in enumerate(zip(g.to_source, g.copy_of != MIRROR))}
    R = np.array([to_glued[(int(refl[s]), c)] for s, c in zip(g.to_source, g.copy_of != MIRROR)])
    # mirror-copy face straddling the axis: one vertex on it, the other two swapped by R
    mirror_faces = np.arange(g.num_source_faces, g.mesh.num_faces)
    interior = ~np.isin(g.faces[mirror_faces], g.seam).any(axis=1)
    cand = [f for f in mirror_faces[interior] if sorted(R[g.faces[f]]) == sorted(g.faces[f])]
    assert cand
    a = choose_anchor_face(g, cand[0])
    z = harmonic_plane_map(g, a)
    # reflection of the plane across the target triangle's symmetry axis
    k = next(i for i in range(3) if R[a.vertices[i]] == a.vertices[i])
    apex = a.target[k]
    mid = 0.5 * (a.target[(k + 1) % 3] + a.target[(k + 2) % 3])
    u = (mid - apex) / abs(mid - apex)
    reflect = lambda w: apex + u * np.conj((w - apex) / u)  # noqa: E731
    scale = np.abs(z).max()
    assert np.abs(z[R] - reflect(z)).max() < 1e-9 * scale


# -------------------------------------------------------------- south pole


def test_south_pole_identity_on_conformal_input():
    g = double_cover(synthetic.flat_disk(1000))
    sphere = spherical_conformal_map(g)
    w = south_project(sphere)
    if mostly_clockwise(w, g.faces):
        w = np.conj(w)
    # a glued mesh whose geometry is the projected plane itself: mu = 0 on every face
    flat = TriMesh(np.column_stack([w.real, w.imag, np.zeros(len(w))]), g.faces)
    g0 = dataclasses.replace(g, mesh=flat)
    info = {}
    out = south_pole_correction(sphere, g0, info=info)
    assert np.abs(out - sphere).max() < 1e-9


@pytest.fixture(scope="module")
def bumpy():
    g = double_cover(synthetic.bumpy_disk(5000))
    return g, spherical_conformal_map(g, skip_south_pole=True, calibrate=False)


def test_south_pole_reduces_mu(bumpy):
    g, before = bumpy
    after = south_pole_correction(before, g)
    assert sphere_mean_abs_mu(g, after) <= sphere_mean_abs_mu(g, before)
    assert np.abs(np.linalg.norm(after, axis=1) - 1).max() < 1e-12


def test_skip_runs_one_solve_fewer():
    g = double_cover(synthetic.flat_disk(1000))
    full, skip = SolveLog(), SolveLog()
    spherical_conformal_map(g, log=full)
    spherical_conformal_map(g, skip_south_pole=True, log=skip)
    assert skip.num_systems == full.num_systems - 1


def test_flat_disk_seam_is_planar():
    g = double_cover(synthetic.flat_disk(1000))
    s = spherical_conformal_map(g)[g.seam]
    c = s - s.mean(axis=0)
    normal = np.linalg.svd(c)[2][-1]
    assert np.abs(c @ normal).max() < 0.05


@pytest.mark.parametrize("skip", [False, True])
def test_hemisphere_sphere_map(skip):
    g = double_cover(synthetic.hemisphere(2000))
    s = spherical_conformal_map(g, skip_south_pole=skip)
    assert sphere_mean_abs_mu(g, s) < 0.05
    assert sphere_flips(s, g.faces) == 0
    assert np.abs(np.linalg.norm(s, axis=1) - 1).max() < 1e-12


def test_calibration_removes_uniform_mu():
    g = double_cover(synthetic.hemisphere(20000))
    z = harmonic_plane_map(g, choose_anchor_face(g))
    z2, nu = calibrate_anchor(z, g)
    F = g.num_source_faces

    def kept_mu(w):
        w = np.conj(w) if mostly_clockwise(w, g.faces) else w
        return np.abs(beltrami_coefficient(w, g.faces[:F], g.vertices).mu).mean()

    assert abs(nu) > 0
    assert kept_mu(z2) < 0.5 * kept_mu(z)
