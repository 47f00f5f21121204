"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py`` (lines go to stdout).

Reference meshes (bunny, foot) are optional: point ``DISKCONF_BUNNY`` and
``DISKCONF_FOOT`` at OBJ/OFF files to enable criterion 8.
"""
import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from diskconf import synthetic
from diskconf.double_cover import double_cover
from diskconf.mesh import corner_angles, load_mesh, signed_areas, validate_topology
from diskconf.metrics import angular_distortion, bijectivity_report
from diskconf.pipeline import disk_conformal_parameterize
from diskconf.quasiconformal import beltrami_coefficient, layout_faces, lbs_reconstruct, wirtinger

RESULTS: list[str] = []

SIZES = (1000, 20000)
MAX_SECONDS_20K = 10.0
LARGE = 15000  # face count from which the runtime bound applies
HEMI_SIZES = (1000, 5000, 20000)
SKIP_EXCESS_DEG = 0.2
REFERENCE = {"DISKCONF_BUNNY": ("bunny", 1.08, 1.79), "DISKCONF_FOOT": ("foot", 1.42, 1.22)}
REF_TOL_DEG = 0.5


def report(n: int, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def _timed(mesh, **kw):
    t = time.perf_counter()
    p = disk_conformal_parameterize(mesh, **kw)
    return p, time.perf_counter() - t


_cache: dict = {}


def suite_runs():
    """``{(family, size): (mesh, param_or_exception, seconds)}`` plus the sliver disk."""
    if "suite" not in _cache:
        out = {}
        meshes = dict(synthetic.suite(SIZES))
        sliver = synthetic.sliver_disk()
        meshes[("sliver_disk", sliver.num_faces)] = sliver
        for key, mesh in meshes.items():
            try:
                p, dt = _timed(mesh)
            except Exception as exc:  # reported, not hidden
                p, dt = exc, float("nan")
            out[key] = (mesh, p, dt)
        _cache["suite"] = out
    return _cache["suite"]


def _mean_abs(mesh, uv):
    return angular_distortion(mesh, uv).mean_abs_deg


# ----------------------------------------------------------------- checks


def check_1_bijectivity():
    bad, slow = [], []
    for (name, n), (mesh, p, dt) in suite_runs().items():
        if isinstance(p, Exception):
            bad.append(f"{name}-{n}: {p}")
            continue
        b = bijectivity_report(mesh, p)
        if not b.ok:
            bad.append(f"{name}-{n}: flips={b.flips} simple={b.boundary_simple}")
        if n >= LARGE and not dt <= MAX_SECONDS_20K:
            slow.append(f"{name}-{n}: {dt:.2f}s")
    worst = max(dt for (_, n), (_, _, dt) in suite_runs().items() if n >= LARGE)
    ok = not bad and not slow
    detail = f"{len(suite_runs())} meshes, zero flips + simple boundary, max 20K runtime {worst:.2f}s"
    if not ok:
        detail += " | " + "; ".join(bad + slow)
    return report(1, ok, detail)


def check_2_conformality():
    means = []
    for n in HEMI_SIZES:
        m = synthetic.hemisphere(n)
        means.append(_mean_abs(m, disk_conformal_parameterize(m)))
    flat = {n: _mean_abs(m, disk_conformal_parameterize(m)) for n in SIZES for m in [synthetic.flat_disk(n)]}
    dec = all(a > b for a, b in zip(means, means[1:]))
    ok = dec and means[-1] < 1.5 and all(v < 0.5 for v in flat.values())
    hemi = " > ".join(f"{v:.3f}" for v in means)
    return report(2, ok, f"hemisphere 1K/5K/20K {hemi} deg (< 1.5, strictly decreasing); flat {', '.join(f'{v:.3f}' for v in flat.values())} deg (< 0.5)")


def check_3_lbs_round_trip():
    rng = np.random.default_rng(0)
    t = np.linspace(-1, 1, 15)
    x, y = np.meshgrid(t, t)
    p = np.column_stack([x.ravel(), y.ravel()])
    inner = (np.abs(p) < 1 - 1e-9).all(axis=1)
    p[inner] += rng.uniform(-0.3, 0.3, (inner.sum(), 2)) * (t[1] - t[0])
    faces = synthetic.triangulate(p)
    z = p[:, 0] + 1j * p[:, 1]
    f = z.real + 2j * z.imag
    mu = beltrami_coefficient(z, faces, f).mu
    mu_err = np.abs(mu - (-1 / 3)).max()
    b = np.flatnonzero(~inner)
    h = lbs_reconstruct(z, faces, mu, b, f[b])
    rec_err = np.abs(h - f).max()
    ok = mu_err <= 1e-10 and rec_err <= 1e-6
    return report(3, ok, f"x+2iy: max |mu + 1/3| {mu_err:.1e} (<= 1e-10), reconstruction error {rec_err:.1e} (<= 1e-6)")


def check_4_composition():
    bad, worst = [], -np.inf
    for (name, n), (mesh, p, _) in suite_runs().items():
        if isinstance(p, Exception):
            bad.append(f"{name}-{n}: failed")
            continue
        final = np.abs(beltrami_coefficient(mesh.vertices, mesh.faces, p.uv).mu).mean()
        region = np.abs(beltrami_coefficient(mesh.vertices, mesh.faces, p.region).mu).mean()
        worst = max(worst, final - region)
        if not final <= region:
            bad.append(f"{name}-{n}: {final:.4f} > {region:.4f}")
    return report(4, not bad, f"final mean|mu| <= region mean|mu| on every suite mesh (max difference {worst:+.2e})" + (" | " + "; ".join(bad) if bad else ""))


def check_5_double_cover():
    bad = []
    for (name, n), (mesh, _, _) in suite_runs().items():
        g = double_cover(mesh)
        L = g.laplacian()
        P = g.mirror_of
        chi = validate_topology(g.mesh).euler_characteristic
        nb = len(g.mesh.boundary_edges)
        diff = (L[P][:, P] - L).count_nonzero()
        if chi != 2 or nb != 0 or diff != 0:
            bad.append(f"{name}-{n}: chi={chi} boundary={nb} weight mismatches={diff}")
    return report(5, not bad, "chi = 2, no boundary edges, mirror cotangent weights bit-identical" + (" | " + "; ".join(bad) if bad else ""))


def check_6_jacobian():
    worst, bad = 0.0, []
    for (name, n), (mesh, p, _) in suite_runs().items():
        if isinstance(p, Exception):
            bad.append(f"{name}-{n}: failed")
            continue
        src = layout_faces(mesh.vertices, mesh.faces)
        ratio = signed_areas(p.uv, mesh.faces) / signed_areas(src.ravel(), np.arange(src.size).reshape(-1, 3))
        fz, fzb = wirtinger(mesh.vertices, mesh.faces, p.uv)
        mu = fzb / fz
        jac = np.abs(fz) ** 2 * (1 - np.abs(mu) ** 2)
        err = float(np.max(np.abs(ratio - jac) / np.abs(jac)))
        worst = max(worst, err)
        if not err <= 1e-8:
            bad.append(f"{name}-{n}: {err:.1e}")
    return report(6, not bad, f"area ratio vs |f_z|^2 (1 - |mu|^2), max relative error {worst:.1e} (<= 1e-8)" + (" | " + "; ".join(bad) if bad else ""))


def _paired_times(mesh, k=9):
    """Wall times of ``k`` adjacent (full, skip) run pairs.

    Adjacent runs share machine load, so the median of the per-pair
    differences is a steadier comparison than separate minima."""
    t = np.empty((k, 2))
    out = {}
    for i in range(k):
        for j, skip in enumerate((False, True)):
            out[skip], t[i, j] = _timed(mesh, skip_south_pole=skip)
    return out[False], out[True], t


def check_7_skip_variant():
    rows, ok = [], True
    for n in HEMI_SIZES:
        m = synthetic.hemisphere(n)
        pf, ps, t = _paired_times(m)
        df, ds = _mean_abs(m, pf), _mean_abs(m, ps)
        saved = float(np.median(t[:, 0] - t[:, 1]))
        good = ds - df <= SKIP_EXCESS_DEG and saved > 0
        ok &= good
        tf, ts = np.median(t, axis=0)
        rows.append(f"{n // 1000}K {df:.3f}/{ds:.3f} deg, median {tf:.3f}/{ts:.3f}s, paired saving {saved * 1e3:.1f} ms")
    return report(7, ok, f"full/skip excess <= {SKIP_EXCESS_DEG} deg and faster: " + "; ".join(rows))


def reference_meshes():
    found = {}
    for env, (name, mean, sd) in REFERENCE.items():
        path = os.environ.get(env)
        if path and Path(path).exists():
            found[name] = (Path(path), mean, sd)
    return found


def check_8_reference_meshes():
    found = reference_meshes()
    if not found:
        line = "SKIP criterion 8: reference meshes not available (set DISKCONF_BUNNY / DISKCONF_FOOT)"
        RESULTS.append(line)
        print(line)
        return None
    rows, ok = [], True
    for name, (path, mean, sd) in found.items():
        mesh = load_mesh(path)
        p = disk_conformal_parameterize(mesh)
        rep = angular_distortion(mesh, p)
        good = abs(rep.mean_abs_deg - mean) <= REF_TOL_DEG and abs(rep.sd_abs_deg - sd) <= REF_TOL_DEG and bijectivity_report(mesh, p).ok
        ok &= good
        rows.append(f"{name} {rep.mean_abs_deg:.2f}/{rep.sd_abs_deg:.2f} (target {mean}/{sd})")
    return report(8, ok, "; ".join(rows))


def check_9_sliver():
    mesh, p, _ = next(v for (name, _), v in suite_runs().items() if name == "sliver_disk")
    small = np.degrees(corner_angles(mesh).min(axis=1)) < 2.0
    frac = small.mean()
    if isinstance(p, Exception):
        return report(9, False, f"sliver disk ({frac:.1%} faces under 2 deg) failed: {p}")
    b = bijectivity_report(mesh, p)
    ok = frac >= 0.10 and b.ok
    return report(9, ok, f"sliver disk, {frac:.1%} faces with min angle < 2 deg: flips={b.flips}, simple boundary={b.boundary_simple}, mean {_mean_abs(mesh, p):.3f} deg")


CHECKS = [
    check_1_bijectivity,
    check_2_conformality,
    check_3_lbs_round_trip,
    check_4_composition,
    check_5_double_cover,
    check_6_jacobian,
    check_7_skip_variant,
    check_8_reference_meshes,
    check_9_sliver,
]


@pytest.mark.parametrize("check", CHECKS, ids=lambda c: c.__name__[6:])
def test_criterion(check):
    ok = check()
    if ok is None:
        pytest.skip("optional meshes not provided")
    assert ok, RESULTS[-1]


if __name__ == "__main__":
    outcome = [c() for c in CHECKS]
    sys.exit(0 if all(o is not False for o in outcome) else 1)
